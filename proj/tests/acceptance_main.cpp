// Acceptance gate: one self-contained check per shipped claim, each printed as
// a single PASS/FAIL line with its wall time.  Exit status 0 only if every
// criterion holds, so CI can gate on this binary alone.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "splitmax/analysis.hpp"
#include "splitmax/audit.hpp"
#include "splitmax/config.hpp"
#include "splitmax/harness.hpp"

using namespace splitmax;
namespace fs = std::filesystem;

namespace {

fs::path g_out_root;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::string s((std::istreambuf_iterator<char>(in)),
                std::istreambuf_iterator<char>());
  return s;
}

ExperimentConfig headline_config() {
  return make_experiment_config(parse_config_text(
      "grid.n = 16, 16, 16\n"
      "box.length = 1, 1, 1\n"
      "noise.lambda1 = 1, 1, 1\n"
      "noise.lambda2 = 1, 1, 1\n"
      "noise.decay_r = 3\n"
      "noise.modes_per_axis = 4\n"
      "noise.seed = 2026\n"
      "init.preset = smooth-bump\n"
      "time.t_final = 0.5\n"
      "time.ladder = 3, 4, 5, 6, 7\n"
      "time.ref_exponent = 9\n"
      "mc.samples = 64\n"
      "run.schemes = exact\n"));
}

StudySetup setup_from(const ExperimentConfig& cfg) {
  StudySetup s;
  s.grid = cfg.grid;
  s.noise = cfg.noise;
  s.preset = cfg.preset;
  s.mode_k = cfg.mode_k;
  s.T = cfg.t_final;
  s.ladder = cfg.ladder;
  s.ref_exp = cfg.ref_exponent;
  s.samples = cfg.samples;
  s.order = cfg.order;
  return s;
}

// state shared between criteria 1 and 8 (same experiment, different workers)
int g_c1_exit = -1;
std::string g_c1_csv;

bool crit_exact_order(std::string& detail) {
  const ExperimentConfig cfg = headline_config();
  const fs::path dir = g_out_root / "c1_workers1";
  g_c1_exit = cmd_convergence(cfg, dir.string(), 1);
  g_c1_csv = slurp(dir / "convergence_exact.csv");

  // last CSV column repeats the fitted order; recover it for the report line
  double p = 0.0;
  std::stringstream ss(g_c1_csv);
  std::string line;
  std::getline(ss, line);  // header
  while (std::getline(ss, line)) {
    const auto pos = line.rfind(',');
    p = std::strtod(line.c_str() + pos + 1, nullptr);
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "exact scheme p=%.4f, gate [0.85,1.15]", p);
  detail = buf;
  return g_c1_exit == kExitPass;
}

bool crit_discretized_order(std::string& detail) {
  StudySetup s = setup_from(headline_config());
  s.ladder = {5, 6, 7, 8, 9};
  s.ref_exp = 11;
  const auto reports = convergence_study(
      s, {Scheme::ImplicitEuler, Scheme::Midpoint}, resolve_workers(0));
  bool ok = true;
  std::string d;
  for (const auto& r : reports) {
    ok = ok && r.p >= 0.85 && r.p <= 1.15;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%s p=%.4f", d.empty() ? "" : ", ",
                  scheme_name(r.scheme).c_str(), r.p);
    d += buf;
  }
  detail = d + ", gate [0.85,1.15]";
  return ok;
}

bool crit_energy_law(std::string& detail) {
  const GridSpec g(Cuboid::unit(), 12, 12, 12);
  NoiseSpec ns;  // lambda = (1,1,1)/(1,1,1), decay 3, K = 4
  ns.seed = 301;
  const StateZ z0 = make_preset_state(g, "smooth-bump", 1);
  const EnergySeries es =
      energy_study(g, ns, StepperConfig{}, z0, 0.5, 64, 500, resolve_workers(0));
  double worst = 0.0;
  bool ok = true;
  for (std::size_t i = 0; i < es.t.size(); ++i) {
    const double band =
        4.0 * es.se[i] + 1e-9 * std::max(1.0, std::abs(es.predicted[i]));
    const double dev = std::abs(es.mean[i] - es.predicted[i]);
    worst = std::max(worst, dev - band);
    ok = ok && dev <= band;
  }

  // with the noise switched off the discrete energy must be conserved
  NoiseSpec off = ns;
  off.lambda1 = {0.0, 0.0, 0.0};
  off.lambda2 = {0.0, 0.0, 0.0};
  const SplitStepper st(g, off, StepperConfig{});
  const BrownianLattice lat = BrownianLattice::sample(off, 0, 0.5, 1024);
  TrajectoryOptions opt;
  opt.energy_stride = 1;
  const Trajectory tr = st.run_trajectory(z0, 1024, lat, opt);
  const double e0 = tr.energy.front();
  double drift = 0.0;
  for (double e : tr.energy) drift = std::max(drift, std::abs(e - e0));
  ok = ok && drift <= 1e-9 * e0;

  char buf[128];
  std::snprintf(buf, sizeof buf,
                "M=500 worst band excess %.3e; lambda=0 drift %.3e over 1024 "
                "steps (gate 1e-9 rel)",
                worst, drift / e0);
  detail = buf;
  return ok;
}

bool crit_subflow_energy(std::string& detail) {
  const GridSpec g(Cuboid::unit(), 12, 12, 12);
  NoiseSpec ns;
  ns.seed = 401;
  const StateZ z0 = make_preset_state(g, "smooth-bump", 1);
  bool ok = true;
  std::string d;
  for (int stage = 1; stage <= 3; ++stage) {
    const SubflowEnergyPoint pt =
        subflow_energy_trial(g, ns, z0, 0.1, stage, 1000, resolve_workers(0));
    const double dev = std::abs(pt.measured.mean - pt.predicted);
    const bool sok = dev <= 4.0 * pt.measured.se;
    ok = ok && sok;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%sstage %d dev/se=%.2f", stage > 1 ? ", " : "",
                  stage, pt.measured.se > 0 ? dev / pt.measured.se : 0.0);
    d += buf;
  }
  detail = d + " (gate 4)";
  return ok;
}

bool crit_structure_audit(std::string& detail) {
  const auto checks =
      run_structure_audit(GridSpec(Cuboid::unit(), 4, 4, 4), 0.1);
  int gated = 0, passed = 0;
  for (const auto& c : checks) {
    if (c.informational) continue;
    ++gated;
    if (c.pass) ++passed;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%d/%d gated checks hold", passed, gated);
  detail = buf;
  return audit_passed(checks);
}

bool crit_splitting_defect(std::string& detail) {
  const GridSpec g(Cuboid::unit(), 4, 4, 4);
  NoiseSpec off;
  off.K = 2;
  off.lambda1 = {0.0, 0.0, 0.0};
  off.lambda2 = {0.0, 0.0, 0.0};
  const SplitStepper st(g, off, StepperConfig{});
  const Matrix m = band_generator(g);
  const StateZ z0 = make_preset_state(g, "smooth-bump", 1);
  const Vector x0 = flatten(z0);
  const Vector w = weight_vector(g);

  std::vector<double> defect;
  double tau = 0.05;
  for (int lvl = 0; lvl < 4; ++lvl, tau *= 0.5) {
    NoiseIncrement incr;
    incr.dt = tau;
    incr.db.assign(std::size_t(off.mode_count()), 0.0);
    incr.w = ScalarField(g);
    StateZ z = z0;
    st.one_step(z, incr);
    const Vector diff = flatten(z) - expm(tau * m) * x0;
    defect.push_back(
        std::sqrt((diff.array().square() * w.array()).sum()));
  }

  bool ok = true;
  std::string d = "defect ratios";
  for (int i = 0; i + 1 < int(defect.size()); ++i) {
    const double r = defect[i] / defect[i + 1];
    ok = ok && r >= 3.0 && r <= 5.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, " %.3f", r);
    d += buf;
  }
  detail = d + " (gate [3,5])";
  return ok;
}

bool crit_divergence_law(std::string& detail) {
  const ExperimentConfig cfg = make_experiment_config(parse_config_text(
      "grid.n = 16, 16, 16\n"
      "noise.modes_per_axis = 2\n"
      "noise.seed = 7\n"
      "init.preset = smooth-bump\n"
      "time.t_final = 0.5\n"
      "divergence.steps = 4\n"
      "divergence.samples = 8\n"
      "run.schemes = exact\n"));
  const fs::path dir = g_out_root / "c7_divergence";
  const int rc = cmd_divergence(cfg, dir.string(), resolve_workers(0));
  const std::string csv = slurp(dir / "divergence.csv");
  const auto pos = csv.rfind('\n', csv.size() - 2);
  std::stringstream last(csv.substr(pos + 1));
  std::string cell;
  std::getline(last, cell, ',');
  std::getline(last, cell, ',');
  const double coarse = std::strtod(cell.c_str(), nullptr);
  std::getline(last, cell, ',');
  const double fine = std::strtod(cell.c_str(), nullptr);
  char buf[96];
  std::snprintf(buf, sizeof buf, "final-time ratio %.3f (gate >= 1.7)",
                fine > 0 ? coarse / fine : 0.0);
  detail = buf;
  return rc == kExitPass;
}

bool crit_worker_determinism(std::string& detail) {
  if (g_c1_exit < 0) {
    detail = "criterion 1 did not run";
    return false;
  }
  const ExperimentConfig cfg = headline_config();
  const fs::path dir = g_out_root / "c8_workers8";
  const int rc = cmd_convergence(cfg, dir.string(), 8);
  const std::string csv = slurp(dir / "convergence_exact.csv");
  const bool same = csv == g_c1_csv && rc == g_c1_exit;
  detail = same ? "1-worker and 8-worker CSV bytes identical"
                : "outputs differ between worker counts";
  return same;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<bool(std::string&)> run;
};

}  // namespace

int main() {
  g_out_root = fs::temp_directory_path() / "splitmax_acceptance";
  fs::remove_all(g_out_root);
  fs::create_directories(g_out_root);

  const std::vector<Criterion> table = {
      {1, "exact splitting strong order 1", 600.0, crit_exact_order},
      {2, "implicit schemes strong order 1", 600.0, crit_discretized_order},
      {3, "linear energy growth law", 300.0, crit_energy_law},
      {4, "per-stage energy injection rate", 60.0, crit_subflow_energy},
      {5, "structure audit on the dense grid", 30.0, crit_structure_audit},
      {6, "one-step splitting defect is O(tau^2)", 60.0, crit_splitting_defect},
      {7, "divergence residual halves with tau", 120.0, crit_divergence_law},
      {8, "worker-count determinism", 600.0, crit_worker_determinism},
  };

  bool all = true;
  for (const auto& c : table) {
    const auto tic = std::chrono::steady_clock::now();
    bool ok = false;
    std::string detail;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - tic)
            .count();
    if (secs > c.budget_s) {
      ok = false;
      detail += " [over time budget]";
    }
    all = all && ok;
    std::printf("criterion %d (%s): %s (%s; %.1f s, budget %.0f s)\n", c.id,
                c.name, ok ? "PASS" : "FAIL", detail.c_str(), secs,
                c.budget_s);
    std::fflush(stdout);
  }
  std::printf("acceptance: %s\n", all ? "ALL CRITERIA PASS" : "FAILURES");
  return all ? 0 : 1;
}
