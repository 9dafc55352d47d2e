#include "splitmax/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace splitmax {

namespace {

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "': not a number: " + v);
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "': not an integer: " + v);
  }
}

std::array<double, 3> parse_triple(const std::string& key,
                                   const std::string& v) {
  const auto parts = split_list(v);
  if (parts.size() != 3)
    throw std::runtime_error("config key '" + key +
                             "': expected three comma-separated values");
  return {parse_double(key, parts[0]), parse_double(key, parts[1]),
          parse_double(key, parts[2])};
}

bool is_power_of_two(long long x) { return x > 0 && (x & (x - 1)) == 0; }

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "grid.n",          "box.length",        "noise.lambda1",
      "noise.lambda2",   "noise.decay_r",     "noise.modes_per_axis",
      "noise.seed",      "init.preset",       "init.mode_k",
      "time.t_final",    "time.ladder",       "time.ref_exponent",
      "mc.samples",      "run.schemes",       "split.order",
      "energy.steps",    "energy.samples",    "divergence.steps",
      "divergence.samples", "audit.tau"};
  return keys;
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_key(key))
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": bad key '" + key + "'");
    if (value.empty())
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": empty value for '" + key + "'");
    if (!kv.emplace(key, value).second)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": duplicate key '" + key + "'");
  }
  return kv;
}

ConfigMap load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::uint64_t config_hash(const ConfigMap& kv) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  for (const auto& [key, value] : kv) {  // std::map iterates in key order
    mix(key);
    mix("=");
    mix(value);
    mix("\n");
  }
  return h;
}

ExperimentConfig make_experiment_config(const ConfigMap& kv) {
  for (const auto& [key, value] : kv) {
    (void)value;
    if (known_keys().count(key) == 0)
      throw std::runtime_error("unknown config key: " + key);
  }

  ExperimentConfig cfg;
  cfg.raw = kv;
  cfg.hash = config_hash(kv);

  auto get = [&kv](const char* key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  std::array<double, 3> lengths{1.0, 1.0, 1.0};
  if (const auto* v = get("box.length")) lengths = parse_triple("box.length", *v);
  std::array<int, 3> cells{16, 16, 16};
  if (const auto* v = get("grid.n")) {
    const auto t = parse_triple("grid.n", *v);
    for (int a = 0; a < 3; ++a) {
      if (t[a] != std::floor(t[a]))
        throw std::runtime_error("grid.n: cell counts must be integers");
      cells[a] = int(t[a]);
    }
  }
  Cuboid box;
  box.lo = {0.0, 0.0, 0.0};
  box.hi = lengths;
  cfg.grid = GridSpec(box, cells[0], cells[1], cells[2]);

  if (const auto* v = get("noise.lambda1"))
    cfg.noise.lambda1 = parse_triple("noise.lambda1", *v);
  if (const auto* v = get("noise.lambda2"))
    cfg.noise.lambda2 = parse_triple("noise.lambda2", *v);
  if (const auto* v = get("noise.decay_r"))
    cfg.noise.decay_r = parse_double("noise.decay_r", *v);
  if (const auto* v = get("noise.modes_per_axis")) {
    const long long k = parse_int("noise.modes_per_axis", *v);
    if (k < 1 || k > 64)
      throw std::runtime_error("noise.modes_per_axis: out of range");
    cfg.noise.K = int(k);
  }
  if (const auto* v = get("noise.seed"))
    cfg.noise.seed = std::uint64_t(parse_int("noise.seed", *v));

  if (const auto* v = get("init.preset")) cfg.preset = *v;
  if (const auto* v = get("init.mode_k")) {
    cfg.mode_k = int(parse_int("init.mode_k", *v));
    if (cfg.mode_k < 1) throw std::runtime_error("init.mode_k: must be >= 1");
  }

  if (const auto* v = get("time.t_final")) {
    cfg.t_final = parse_double("time.t_final", *v);
    if (!(cfg.t_final > 0.0))
      throw std::runtime_error("time.t_final: must be positive");
  }
  if (const auto* v = get("time.ladder")) {
    cfg.ladder.clear();
    for (const auto& part : split_list(*v)) {
      const long long e = parse_int("time.ladder", part);
      if (e < 1 || e > 30)
        throw std::runtime_error("time.ladder: exponents must be in [1,30]");
      cfg.ladder.push_back(int(e));
    }
    if (cfg.ladder.empty())
      throw std::runtime_error("time.ladder: empty ladder");
    for (std::size_t i = 1; i < cfg.ladder.size(); ++i)
      if (cfg.ladder[i] <= cfg.ladder[i - 1])
        throw std::runtime_error(
            "time.ladder: exponents must be strictly increasing");
  }
  if (const auto* v = get("time.ref_exponent"))
    cfg.ref_exponent = int(parse_int("time.ref_exponent", *v));
  if (cfg.ref_exponent <= cfg.ladder.back())
    throw std::runtime_error(
        "time.ref_exponent: reference must be finer than the whole ladder");

  if (const auto* v = get("mc.samples")) {
    const long long m = parse_int("mc.samples", *v);
    if (m < 1) throw std::runtime_error("mc.samples: must be >= 1");
    cfg.samples = int(m);
  }

  if (const auto* v = get("run.schemes")) {
    cfg.schemes.clear();
    for (const auto& name : split_list(*v))
      cfg.schemes.push_back(scheme_from_name(name));
    if (cfg.schemes.empty()) throw std::runtime_error("run.schemes: empty");
    for (std::size_t i = 0; i < cfg.schemes.size(); ++i)
      for (std::size_t j = i + 1; j < cfg.schemes.size(); ++j)
        if (cfg.schemes[i] == cfg.schemes[j])
          throw std::runtime_error("run.schemes: duplicate scheme");
  }

  if (const auto* v = get("split.order")) {
    const auto parts = split_list(*v);
    if (parts.size() != 3)
      throw std::runtime_error("split.order: expected three stage indices");
    for (int a = 0; a < 3; ++a)
      cfg.order.stages[a] = int(parse_int("split.order", parts[a]));
    cfg.order.validate();
  }

  if (const auto* v = get("energy.steps")) {
    const long long s = parse_int("energy.steps", *v);
    if (!is_power_of_two(s))
      throw std::runtime_error(
          "energy.steps: must be a power of two (dyadic noise lattice)");
    cfg.energy_steps = int(s);
  }
  if (const auto* v = get("energy.samples")) {
    const long long m = parse_int("energy.samples", *v);
    if (m < 2) throw std::runtime_error("energy.samples: must be >= 2");
    cfg.energy_samples = int(m);
  }
  if (const auto* v = get("divergence.steps")) {
    const long long s = parse_int("divergence.steps", *v);
    if (!is_power_of_two(s))
      throw std::runtime_error(
          "divergence.steps: must be a power of two (dyadic noise lattice)");
    cfg.divergence_steps = int(s);
  }
  if (const auto* v = get("divergence.samples")) {
    const long long m = parse_int("divergence.samples", *v);
    if (m < 1) throw std::runtime_error("divergence.samples: must be >= 1");
    cfg.divergence_samples = int(m);
  }
  if (const auto* v = get("audit.tau")) {
    cfg.audit_tau = parse_double("audit.tau", *v);
    if (!(cfg.audit_tau > 0.0))
      throw std::runtime_error("audit.tau: must be positive");
  }

  // presets are validated by construction; fail now rather than mid-run
  (void)make_preset_state(cfg.grid, cfg.preset, cfg.mode_k);

  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return make_experiment_config(load_config_file(path));
}

}  // namespace splitmax
