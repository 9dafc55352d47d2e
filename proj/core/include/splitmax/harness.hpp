#pragma once

#include <string>
#include <vector>

#include "splitmax/audit.hpp"
#include "splitmax/config.hpp"

// Experiment drivers behind the command-line tool.  Every command writes its
// CSV outputs, one gnuplot script, and exactly one manifest.json into the
// output directory, prints a human-readable summary, and returns an exit
// code: 0 = gate passed, 1 = gate failed, 2 = error.

namespace splitmax {

constexpr int kExitPass = 0;
constexpr int kExitGateFail = 1;
constexpr int kExitError = 2;

/// Explicit value > 0 wins, else the SPLITMAX_WORKERS environment variable,
/// else the hardware concurrency.
int resolve_workers(int cli_workers);

/// Shortest-round-trip formatting used by every CSV cell ("%.17g").
std::string format_g17(double x);

/// Write UTF-8, LF-only CSV with a header line and %.17g cells.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

enum class PlotKind { Convergence, Energy, Divergence };

/// Emit a gnuplot script for csv files that already exist in out_dir.
/// A CSV without data rows is an I/O error (std::ios_base::failure).
void emit_plot_script(const std::string& out_dir, PlotKind kind,
                      const std::vector<std::string>& csv_names,
                      const std::vector<std::string>& titles);

int cmd_convergence(const ExperimentConfig& cfg, const std::string& out_dir,
                    int workers);
int cmd_energy(const ExperimentConfig& cfg, const std::string& out_dir,
               int workers);
int cmd_divergence(const ExperimentConfig& cfg, const std::string& out_dir,
                   int workers);
int cmd_audit(const ExperimentConfig& cfg, const std::string& out_dir,
              int workers);

}  // namespace splitmax
