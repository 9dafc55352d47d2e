#include "splitmax/stepper.hpp"

namespace splitmax {

SplitStepper::SplitStepper(const GridSpec& g, const NoiseSpec& spec,
                           StepperConfig cfg)
    : engine_(g), basis_(g, spec.K), spec_(spec), cfg_(cfg) {
  cfg_.order.validate();
}

void SplitStepper::one_step(StateZ& z, const NoiseIncrement& incr) const {
  for (int stage : cfg_.order.stages)
    engine_.sub_flow(z, stage, cfg_.scheme, incr.dt, spec_, incr.w);
}

Trajectory SplitStepper::run_trajectory(const StateZ& z0, int n_steps,
                                        const BrownianLattice& lat,
                                        const TrajectoryOptions& opt) const {
  if (n_steps < 1)
    throw std::invalid_argument("run_trajectory: n_steps >= 1");
  if (!(z0.grid == engine_.grid()))
    throw std::invalid_argument("run_trajectory: grid mismatch");

  Trajectory traj;
  StateZ z = z0;
  const double tau = lat.T / n_steps;
  std::size_t snap_pos = 0;

  auto record = [&](int step) {
    if (opt.energy_stride > 0 && step % opt.energy_stride == 0) {
      traj.times.push_back(step * tau);
      traj.energy.push_back(inner_l2(z, z));
    }
    if (snap_pos < opt.snapshot_steps.size() &&
        opt.snapshot_steps[snap_pos] == step) {
      traj.snapshot_steps.push_back(step);
      traj.snapshots.push_back(z);
      ++snap_pos;
    }
  };

  record(0);
  for (int n = 0; n < n_steps; ++n) {
    const NoiseIncrement incr = make_increment(lat, basis_, spec_, n_steps, n);
    one_step(z, incr);
    record(n + 1);
  }
  traj.final_state = std::move(z);
  return traj;
}

}  // namespace splitmax
