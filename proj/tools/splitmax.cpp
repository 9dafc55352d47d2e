#include <CLI11.hpp>

#include <cstdio>

#include "splitmax/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "splitting solver for the stochastic Maxwell cavity: strong "
      "convergence, energy law, divergence law, and structure audits"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  int workers = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config file")
        ->required();
    sub->add_option("--out", out_dir, "output directory (default: out)");
    sub->add_option("--workers", workers,
                    "worker threads; 0 = SPLITMAX_WORKERS env or hardware");
  };
  CLI::App* conv =
      app.add_subcommand("convergence", "coupled-path strong error ladder");
  CLI::App* ener = app.add_subcommand("energy", "mean energy growth law");
  CLI::App* dive =
      app.add_subcommand("divergence", "divergence residual step-halving");
  CLI::App* audi = app.add_subcommand("audit", "dense structure audit");
  for (CLI::App* s : {conv, ener, dive, audi}) add_common(s);

  CLI11_PARSE(app, argc, argv);

  try {
    const splitmax::ExperimentConfig cfg =
        splitmax::load_experiment_config(config_path);
    const int w = splitmax::resolve_workers(workers);
    if (conv->parsed()) return splitmax::cmd_convergence(cfg, out_dir, w);
    if (ener->parsed()) return splitmax::cmd_energy(cfg, out_dir, w);
    if (dive->parsed()) return splitmax::cmd_divergence(cfg, out_dir, w);
    if (audi->parsed()) return splitmax::cmd_audit(cfg, out_dir, w);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "splitmax: error: %s\n", e.what());
    return splitmax::kExitError;
  }
  return splitmax::kExitError;
}
