#pragma once

#include "splitmax/noise.hpp"
#include "splitmax/subflows.hpp"

// One-step splitting map and trajectory driver.  A step of width tau applies
// the three stage maps Psi_j in the configured order, all driven by the same
// aggregated noise increment:
//   Z_{n+1} = Psi_3(tau) Psi_2(tau) Psi_1(tau) Z_n        (default order)
// where Psi_j shifts (E_j,H_j) by (lambda1_j, lambda2_j) dW_n and applies the
// axis-j semigroup of the chosen scheme.

namespace splitmax {

/// Stage execution order; stages[0] runs first.
struct SplitOrder {
  std::array<int, 3> stages{1, 2, 3};

  void validate() const {
    std::array<bool, 3> seen{false, false, false};
    for (int s : stages) {
      if (s < 1 || s > 3) throw std::invalid_argument("SplitOrder: stage id");
      seen[s - 1] = true;
    }
    if (!(seen[0] && seen[1] && seen[2]))
      throw std::invalid_argument("SplitOrder: not a permutation of 1,2,3");
  }
};

struct StepperConfig {
  Scheme scheme = Scheme::Exact;
  SplitOrder order{};
};

struct TrajectoryOptions {
  int energy_stride = 0;            // 0: no energy recording
  std::vector<int> snapshot_steps;  // ascending step indices to store states at
};

struct Trajectory {
  std::vector<double> times;    // recorded energy times
  std::vector<double> energy;   // ||Z||^2 at those times
  std::vector<int> snapshot_steps;
  std::vector<StateZ> snapshots;
  StateZ final_state;
};

class SplitStepper {
 public:
  SplitStepper(const GridSpec& g, const NoiseSpec& spec, StepperConfig cfg);

  const SubflowEngine& engine() const { return engine_; }
  const ModeBasis& basis() const { return basis_; }
  const NoiseSpec& noise() const { return spec_; }
  const StepperConfig& config() const { return cfg_; }

  /// Advance z by one step of width incr.dt; the same increment drives all
  /// three stages.
  void one_step(StateZ& z, const NoiseIncrement& incr) const;

  /// Run n_steps uniform steps over [0, lat.T] replaying the lattice.
  Trajectory run_trajectory(const StateZ& z0, int n_steps,
                            const BrownianLattice& lat,
                            const TrajectoryOptions& opt = {}) const;

 private:
  SubflowEngine engine_;
  ModeBasis basis_;
  NoiseSpec spec_;
  StepperConfig cfg_;
};

}  // namespace splitmax
