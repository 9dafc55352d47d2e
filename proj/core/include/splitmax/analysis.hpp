#pragma once

#include <functional>
#include <utility>

#include "splitmax/stepper.hpp"

// Monte Carlo experiment drivers.  Strong (mean-square) errors are estimated
// against a coupled reference: the Exact splitting on the same grid driven by
// the same Brownian lattice at a much finer step.  All cross-sample
// reductions are deterministic pairwise folds, so results are bit-identical
// for any worker count.

namespace splitmax {

struct MeanStderr {
  double mean = 0.0;
  double se = 0.0;
};

/// Sample mean and standard error sqrt(var/M) with unbiased variance.
/// Sums via a pairwise fold over the value-sorted sequence, so the output is
/// bitwise independent of the input ordering.  Requires M >= 2.
MeanStderr mc_aggregate(const std::vector<double>& xs);

/// Least-squares slope of log(sqrt(ms)) vs log(tau) over (tau, ms) points;
/// second value is the max absolute deviation from the fit line in log space.
/// Requires >= 3 points with positive ms.
std::pair<double, double> fit_order(
    const std::vector<std::pair<double, double>>& tau_ms);

/// Run fn(sample) for sample = 0..M-1 on `workers` threads (0: hardware
/// concurrency).  Work distribution never influences results; samples are
/// pure functions of their index.
void parallel_samples(int M, int workers, const std::function<void(int)>& fn);

// --- convergence ladder ----------------------------------------------------

struct StudySetup {
  GridSpec grid;
  NoiseSpec noise;
  std::string preset = "smooth-bump";
  int mode_k = 1;
  double T = 0.5;
  std::vector<int> ladder{3, 4, 5, 6, 7};  // tau = T * 2^-e per exponent e
  int ref_exp = 9;                         // reference tau = T * 2^-ref_exp
  int samples = 64;
  SplitOrder order{};
};

struct ConvergencePoint {
  double tau;
  double ms;  // max over snapshot times of the sample-mean squared error
  double se;  // standard error at the maximizing time
};

struct ConvergenceReport {
  Scheme scheme = Scheme::Exact;
  int samples = 0;
  std::vector<ConvergencePoint> points;
  double p = 0.0;
  double residual = 0.0;
};

/// Coupled-path ladder study.  One reference trajectory per sample is shared
/// by every rung and every requested scheme; errors are compared at the
/// snapshot times of the finest rung and maximized over time after averaging.
std::vector<ConvergenceReport> convergence_study(
    const StudySetup& setup, const std::vector<Scheme>& schemes, int workers);

/// Single-rung strong error (squared) and its standard error.
std::pair<double, double> ms_error(const StudySetup& setup, Scheme scheme,
                                   int ladder_exp, int workers = 0);

// --- energy law ------------------------------------------------------------

struct EnergySeries {
  std::vector<double> t;
  std::vector<double> mean;
  std::vector<double> se;
  std::vector<double> predicted;  // ||Z0||^2 + t |lambda|^2 Tr Q
};

EnergySeries energy_study(const GridSpec& grid, const NoiseSpec& noise,
                          const StepperConfig& cfg, const StateZ& z0, double T,
                          int n_steps, int M, int workers);

/// Mean single sub-flow energy after one step of width tau, versus the
/// predicted ||Z0||^2 + tau |lambda^{[j]}|^2 Tr Q.
struct SubflowEnergyPoint {
  int stage;
  MeanStderr measured;
  double predicted;
};
SubflowEnergyPoint subflow_energy_trial(const GridSpec& grid,
                                        const NoiseSpec& noise, const StateZ& z0,
                                        double tau, int stage, int M,
                                        int workers);

// --- divergence law --------------------------------------------------------

struct DivergenceSeries {
  std::vector<double> t;
  std::vector<double> resid;
};

/// || discrete_div E(t_n) - discrete_div E_0 - lambda1 . grad W(t_n) ||
/// along one replayed trajectory, recorded every `record_stride` steps.
DivergenceSeries divergence_residual(const SplitStepper& st, const StateZ& z0,
                                     const BrownianLattice& lat, int n_steps,
                                     int record_stride = 1);

}  // namespace splitmax
