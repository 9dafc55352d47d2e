#include "splitmax/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace splitmax {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string iso_utc_now() {
  const std::time_t tt =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec);
  return buf;
}

void ensure_out_dir(const std::string& out_dir) {
  fs::create_directories(out_dir);
}

/// One manifest per run, written after all other outputs.
void write_manifest(const std::string& out_dir, const std::string& command,
                    const ExperimentConfig& cfg, int workers, bool pass,
                    const json& detail,
                    const std::vector<std::string>& outputs) {
  json m;
  m["command"] = command;
  char hx[17];
  std::snprintf(hx, sizeof hx, "%016llx",
                static_cast<unsigned long long>(cfg.hash));
  m["config_hash"] = std::string(hx);
  m["config"] = cfg.raw;
  m["workers"] = workers;
  m["pass"] = pass;
  m["detail"] = detail;
  m["outputs"] = outputs;
  m["created"] = iso_utc_now();
  std::ofstream out(fs::path(out_dir) / "manifest.json", std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write manifest.json");
  out << m.dump(2) << "\n";
}

std::size_t csv_data_rows(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open CSV: " + path);
  std::string line;
  std::size_t rows = 0;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    ++rows;
  }
  return rows;
}

/// First data row of a CSV, for plot guide anchors.
std::vector<double> csv_first_row(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::string line;
  std::getline(in, line);  // header
  std::getline(in, line);
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::strtod(cell.c_str(), nullptr));
  return out;
}

StudySetup setup_from_config(const ExperimentConfig& cfg) {
  StudySetup setup;
  setup.grid = cfg.grid;
  setup.noise = cfg.noise;
  setup.preset = cfg.preset;
  setup.mode_k = cfg.mode_k;
  setup.T = cfg.t_final;
  setup.ladder = cfg.ladder;
  setup.ref_exp = cfg.ref_exponent;
  setup.samples = cfg.samples;
  setup.order = cfg.order;
  return setup;
}

}  // namespace

int resolve_workers(int cli_workers) {
  if (cli_workers > 0) return cli_workers;
  if (const char* env = std::getenv("SPLITMAX_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1)
      throw std::runtime_error(
          "SPLITMAX_WORKERS must be a positive integer, got: " +
          std::string(env));
    return int(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? int(hc) : 1;
}

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary);  // binary: LF line ends only
  if (!out) throw std::ios_base::failure("cannot write CSV: " + path);
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::invalid_argument("write_csv: ragged row");
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << format_g17(row[i]);
    out << "\n";
  }
  if (!out) throw std::ios_base::failure("short write: " + path);
}

void emit_plot_script(const std::string& out_dir, PlotKind kind,
                      const std::vector<std::string>& csv_names,
                      const std::vector<std::string>& titles) {
  if (csv_names.empty() || csv_names.size() != titles.size())
    throw std::invalid_argument("emit_plot_script: csv/title mismatch");
  for (const auto& name : csv_names) {
    if (csv_data_rows((fs::path(out_dir) / name).string()) == 0)
      throw std::ios_base::failure("empty CSV: " + name);
  }

  const char* script_name = kind == PlotKind::Convergence ? "convergence.gp"
                            : kind == PlotKind::Energy    ? "energy.gp"
                                                          : "divergence.gp";
  std::ofstream gp(fs::path(out_dir) / script_name, std::ios::binary);
  if (!gp) throw std::ios_base::failure("cannot write plot script");

  gp << "# gnuplot script, run from this directory\n"
     << "set terminal pngcairo size 900,680\n"
     << "set datafile separator ','\n";

  switch (kind) {
    case PlotKind::Convergence: {
      const auto anchor =
          csv_first_row((fs::path(out_dir) / csv_names.front()).string());
      const double guide =
          anchor.size() >= 2 && anchor[0] > 0.0 && anchor[1] > 0.0
              ? std::sqrt(anchor[1]) / anchor[0]
              : 1.0;
      gp << "set output 'convergence.png'\n"
         << "set logscale xy\n"
         << "set xlabel 'time step tau'\n"
         << "set ylabel 'root mean-square error'\n"
         << "set key left top\n"
         << "plot \\\n";
      for (std::size_t i = 0; i < csv_names.size(); ++i)
        gp << "  '" << csv_names[i]
           << "' skip 1 using 1:(sqrt($2)):(0.5*$3/sqrt($2)) "
              "with yerrorlines pt 7 title '"
           << titles[i] << "', \\\n";
      gp << "  " << format_g17(guide) << " * x with lines dt 2 title 'slope 1'\n";
      break;
    }
    case PlotKind::Energy:
      gp << "set output 'energy.png'\n"
         << "set xlabel 't'\n"
         << "set ylabel 'mean discrete energy'\n"
         << "set key left top\n"
         << "plot '" << csv_names.front()
         << "' skip 1 using 1:2:(4*$3) with yerrorbars pt 6 "
            "title 'sample mean (4 s.e. bars)', \\\n"
         << "  '' skip 1 using 1:4 with lines lw 2 title 'predicted growth'\n";
      break;
    case PlotKind::Divergence:
      gp << "set output 'divergence.png'\n"
         << "set xlabel 't'\n"
         << "set ylabel 'divergence residual'\n"
         << "set key left top\n"
         << "plot '" << csv_names.front()
         << "' skip 1 using 1:2 with linespoints pt 7 title 'step tau', \\\n"
         << "  '' skip 1 using 1:3 with linespoints pt 5 title 'step tau/2'\n";
      break;
  }
  if (!gp) throw std::ios_base::failure("short write: plot script");
}

int cmd_convergence(const ExperimentConfig& cfg, const std::string& out_dir,
                    int workers) {
  ensure_out_dir(out_dir);
  const StudySetup setup = setup_from_config(cfg);
  const auto reports = convergence_study(setup, cfg.schemes, workers);

  bool pass = true;
  std::vector<std::string> csvs, titles, outputs;
  json detail = json::array();
  for (const auto& r : reports) {
    const std::string name = "convergence_" + scheme_name(r.scheme) + ".csv";
    std::vector<std::vector<double>> rows;
    for (const auto& pt : r.points) rows.push_back({pt.tau, pt.ms, pt.se, r.p});
    write_csv((fs::path(out_dir) / name).string(),
              {"tau", "ms_error", "stderr", "order_fit"}, rows);
    csvs.push_back(name);
    titles.push_back(scheme_name(r.scheme));
    outputs.push_back(name);

    const bool ok = r.p >= 0.85 && r.p <= 1.15;
    pass = pass && ok;
    std::printf("convergence %-15s M=%-5d p=%.4f residual=%.3f  %s\n",
                scheme_name(r.scheme).c_str(), r.samples, r.p, r.residual,
                ok ? "PASS" : "FAIL");
    detail.push_back({{"scheme", scheme_name(r.scheme)},
                      {"p", r.p},
                      {"log_residual", r.residual},
                      {"pass", ok}});
  }
  emit_plot_script(out_dir, PlotKind::Convergence, csvs, titles);
  outputs.push_back("convergence.gp");
  write_manifest(out_dir, "convergence", cfg, workers, pass, detail, outputs);
  return pass ? kExitPass : kExitGateFail;
}

int cmd_energy(const ExperimentConfig& cfg, const std::string& out_dir,
               int workers) {
  if (cfg.schemes.size() != 1 || cfg.schemes[0] != Scheme::Exact) {
    std::fprintf(stderr,
                 "energy: the linear growth law is exact only for the exact "
                 "stage rotation; use the convergence command to compare "
                 "discretized schemes\n");
    return kExitError;
  }
  ensure_out_dir(out_dir);
  const StateZ z0 = make_preset_state(cfg.grid, cfg.preset, cfg.mode_k);
  const StepperConfig sc{Scheme::Exact, cfg.order};
  const EnergySeries es =
      energy_study(cfg.grid, cfg.noise, sc, z0, cfg.t_final, cfg.energy_steps,
                   cfg.energy_samples, workers);

  bool pass = true;
  double worst_excess = 0.0;  // deviation minus allowed band, > 0 fails
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < es.t.size(); ++i) {
    rows.push_back({es.t[i], es.mean[i], es.se[i], es.predicted[i]});
    const double band =
        4.0 * es.se[i] + 1e-9 * std::max(1.0, std::abs(es.predicted[i]));
    const double dev = std::abs(es.mean[i] - es.predicted[i]);
    worst_excess = std::max(worst_excess, dev - band);
    if (dev > band) pass = false;
  }
  write_csv((fs::path(out_dir) / "energy.csv").string(),
            {"t", "mean_energy", "stderr", "predicted"}, rows);
  emit_plot_script(out_dir, PlotKind::Energy, {"energy.csv"}, {"energy"});
  std::printf(
      "energy law: %zu rows, every |mean - predicted| within 4 s.e. %s "
      "(worst excess %.3e)\n",
      es.t.size(), pass ? "yes" : "NO", worst_excess);
  write_manifest(out_dir, "energy", cfg, workers, pass,
                 json{{"worst_excess", worst_excess}},
                 {"energy.csv", "energy.gp"});
  return pass ? kExitPass : kExitGateFail;
}

int cmd_divergence(const ExperimentConfig& cfg, const std::string& out_dir,
                   int workers) {
  if (cfg.schemes.size() != 1) {
    std::fprintf(stderr,
                 "divergence: configure exactly one scheme in run.schemes\n");
    return kExitError;
  }
  ensure_out_dir(out_dir);
  const int steps = cfg.divergence_steps;
  const int fine = 2 * steps;
  const StateZ z0 = make_preset_state(cfg.grid, cfg.preset, cfg.mode_k);
  const SplitStepper st(cfg.grid, cfg.noise,
                        StepperConfig{cfg.schemes[0], cfg.order});

  const int m = cfg.divergence_samples;
  std::vector<DivergenceSeries> coarse(m), fines(m);
  parallel_samples(m, workers, [&](int s) {
    const BrownianLattice lat =
        BrownianLattice::sample(cfg.noise, std::uint64_t(s), cfg.t_final, fine);
    coarse[s] = divergence_residual(st, z0, lat, steps, 1);
    fines[s] = divergence_residual(st, z0, lat, fine, 2);
  });

  std::vector<std::vector<double>> rows;
  std::vector<double> mean_c(steps + 1, 0.0), mean_f(steps + 1, 0.0);
  for (int i = 0; i <= steps; ++i) {
    for (int s = 0; s < m; ++s) {
      mean_c[i] += coarse[s].resid[i] / m;
      mean_f[i] += fines[s].resid[i] / m;
    }
    rows.push_back({coarse[0].t[i], mean_c[i], mean_f[i]});
  }
  write_csv((fs::path(out_dir) / "divergence.csv").string(),
            {"t", "residual_coarse", "residual_fine"}, rows);
  emit_plot_script(out_dir, PlotKind::Divergence, {"divergence.csv"},
                   {"divergence"});

  const double ratio_final =
      mean_f[steps] > 0.0 ? mean_c[steps] / mean_f[steps] : 0.0;
  const double peak_c = *std::max_element(mean_c.begin(), mean_c.end());
  const double peak_f = *std::max_element(mean_f.begin(), mean_f.end());
  const double ratio_peak = peak_f > 0.0 ? peak_c / peak_f : 0.0;
  const bool pass = ratio_final >= 1.7;
  std::printf(
      "divergence residual: final-time ratio tau/(tau/2) = %.3f (gate >= 1.7) "
      "%s; peak ratio %.3f (informational)\n",
      ratio_final, pass ? "PASS" : "FAIL", ratio_peak);
  write_manifest(out_dir, "divergence", cfg, workers, pass,
                 json{{"ratio_final", ratio_final}, {"ratio_peak", ratio_peak}},
                 {"divergence.csv", "divergence.gp"});
  return pass ? kExitPass : kExitGateFail;
}

int cmd_audit(const ExperimentConfig& cfg, const std::string& out_dir,
              int workers) {
  ensure_out_dir(out_dir);
  const auto checks = run_structure_audit(cfg.grid, cfg.audit_tau);

  std::ofstream txt(fs::path(out_dir) / "audit.txt", std::ios::binary);
  if (!txt) throw std::ios_base::failure("cannot write audit.txt");
  json detail = json::array();
  for (const auto& c : checks) {
    const char* status = c.informational ? "INFO" : (c.pass ? "PASS" : "FAIL");
    char line[192];
    std::snprintf(line, sizeof line, "%-26s tau=%-10.6g %13.6e %s %9.3e %s",
                  c.name.c_str(), c.tau, c.value,
                  c.lower_bound ? ">=" : "<=", c.threshold, status);
    std::puts(line);
    txt << line << "\n";
    detail.push_back({{"name", c.name},
                      {"value", c.value},
                      {"threshold", c.threshold},
                      {"status", status}});
  }
  const bool pass = audit_passed(checks);
  std::printf("structure audit: %s\n", pass ? "PASS" : "FAIL");
  write_manifest(out_dir, "audit", cfg, workers, pass, detail, {"audit.txt"});
  return pass ? kExitPass : kExitGateFail;
}

}  // namespace splitmax
