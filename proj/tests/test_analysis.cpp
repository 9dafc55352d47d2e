#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "splitmax/analysis.hpp"

using namespace splitmax;

namespace {

StudySetup dev_setup() {
  StudySetup s;
  s.grid = GridSpec(Cuboid::unit(), 8, 8, 8);
  s.noise.K = 2;
  s.noise.decay_r = 3.0;
  s.noise.seed = 99;
  s.T = 0.25;
  s.ladder = {2, 3, 4};
  s.ref_exp = 7;
  s.samples = 8;
  return s;
}

}  // namespace

TEST_CASE("aggregate of a frozen sample set") {
  const MeanStderr r = mc_aggregate({1.0, 2.0, 3.0, 4.0});
  CHECK(r.mean == 2.5);
  // unbiased variance 5/3, standard error sqrt(var/4)
  CHECK(r.se == std::sqrt((5.0 / 3.0) / 4.0));
  CHECK(r.se == doctest::Approx(0.6454972243679028).epsilon(1e-15));

  const MeanStderr flat = mc_aggregate({0.75, 0.75, 0.75, 0.75, 0.75});
  CHECK(flat.mean == 0.75);
  CHECK(flat.se == 0.0);
}

TEST_CASE("aggregate is bitwise independent of sample ordering") {
  std::vector<double> xs = {1e16,        1.0,   -1e16, 3.14159,
                            2.718281828, 1e-8,  -7.5,  42.0,
                            0.1,         1.0 / 3.0};
  const MeanStderr ref = mc_aggregate(xs);
  std::mt19937 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(xs.begin(), xs.end(), rng);
    const MeanStderr r = mc_aggregate(xs);
    CHECK(r.mean == ref.mean);  // bitwise
    CHECK(r.se == ref.se);      // bitwise
  }
}

TEST_CASE("aggregate guards") {
  CHECK_THROWS_AS(mc_aggregate({}), std::exception);
  CHECK_THROWS_AS(mc_aggregate({1.0}), std::exception);
}

TEST_CASE("order fit recovers exact and noisy slopes") {
  std::vector<std::pair<double, double>> pts;
  for (double tau : {0.5, 0.25, 0.125, 0.0625}) pts.push_back({tau, tau * tau});
  auto [p1, r1] = fit_order(pts);  // sqrt(ms) = tau
  CHECK(p1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r1 <= 1e-12);

  pts.clear();
  for (double tau : {0.5, 0.25, 0.125, 0.0625})
    pts.push_back({tau, 0.37 * std::pow(tau, 4.0)});
  auto [p2, r2] = fit_order(pts);  // sqrt(ms) = c tau^2
  CHECK(p2 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r2 <= 1e-12);

  pts.clear();
  double wiggle = 1.05;
  for (double tau : {0.5, 0.25, 0.125, 0.0625, 0.03125}) {
    pts.push_back({tau, tau * tau * wiggle * wiggle});
    wiggle = wiggle > 1.0 ? 1.0 / 1.05 : 1.05;
  }
  auto [p3, r3] = fit_order(pts);
  CHECK(p3 > 0.9);
  CHECK(p3 < 1.1);
  CHECK(r3 <= 0.06);  // log-space deviation of a 5 percent wiggle
}

TEST_CASE("order fit guards") {
  CHECK_THROWS_AS(fit_order({{0.5, 0.1}, {0.25, 0.05}}), std::exception);
  CHECK_THROWS_AS(fit_order({{0.5, 0.1}, {0.25, 0.0}, {0.125, 0.01}}),
                  std::exception);
  CHECK_THROWS_AS(fit_order({{0.25, 0.1}, {0.25, 0.05}, {0.25, 0.01}}),
                  std::exception);
}

TEST_CASE("parallel sample scheduling touches every index exactly once") {
  const int M = 100;
  for (int workers : {1, 3, 7}) {
    std::vector<int> hits(M, 0);
    parallel_samples(M, workers, [&](int s) { hits[s] += 1; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }
  parallel_samples(0, 2, [&](int) { FAIL("no samples requested"); });
  CHECK_THROWS_AS(
      parallel_samples(4, 2,
                       [](int s) {
                         if (s == 2) throw std::runtime_error("boom");
                       }),
      std::runtime_error);
}

TEST_CASE("study setup validation") {
  StudySetup s = dev_setup();
  s.samples = 4;
  CHECK_THROWS_AS(convergence_study(s, {Scheme::Exact}, 1), std::exception);
  try {
    convergence_study(s, {Scheme::Exact}, 1);
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("insufficient samples") !=
          std::string::npos);
  }

  s = dev_setup();
  s.ladder = {4, 3};
  CHECK_THROWS_AS(convergence_study(s, {Scheme::Exact}, 1), std::exception);

  s = dev_setup();
  s.ref_exp = 4;
  CHECK_THROWS_AS(convergence_study(s, {Scheme::Exact}, 1), std::exception);

  s = dev_setup();
  CHECK_THROWS_AS(convergence_study(s, {}, 1), std::exception);
}

TEST_CASE("deterministic error halves per rung without noise") {
  StudySetup s = dev_setup();
  s.noise.lambda1 = {0.0, 0.0, 0.0};
  s.noise.lambda2 = {0.0, 0.0, 0.0};
  s.ref_exp = 8;
  const auto [ms3, se3] = ms_error(s, Scheme::ImplicitEuler, 3, 1);
  const auto [ms4, se4] = ms_error(s, Scheme::ImplicitEuler, 4, 1);
  CHECK(se3 == 0.0);  // identical samples: no spread
  CHECK(se4 == 0.0);
  const double ratio = std::sqrt(ms3 / ms4);
  CHECK(ratio > 1.6);
  CHECK(ratio < 2.4);
}

TEST_CASE("coupled ladder errors shrink monotonically within noise") {
  StudySetup s = dev_setup();
  const auto reports = convergence_study(s, {Scheme::Exact}, 2);
  REQUIRE(reports.size() == 1);
  const auto& pts = reports[0].points;
  REQUIRE(pts.size() == 3);
  for (std::size_t i = 1; i < pts.size(); ++i)
    CHECK(pts[i].ms <= pts[i - 1].ms + pts[i].se + pts[i - 1].se);
}

TEST_CASE("exact splitting shows first order at development scale") {
  StudySetup s = dev_setup();
  const auto reports = convergence_study(s, {Scheme::Exact}, 2);
  const double p = reports[0].p;
  INFO("fit order p = ", p);
  CHECK(p > 0.8);
  CHECK(p < 1.2);
  CHECK(reports[0].samples == 8);
  for (const auto& pt : reports[0].points) {
    CHECK(pt.ms > 0.0);
    CHECK(pt.se > 0.0);
    CHECK(pt.se < pt.ms);
  }
}

TEST_CASE("stage ordering does not break first-order convergence") {
  StudySetup s = dev_setup();
  s.order = SplitOrder{{2, 3, 1}};
  const auto reports = convergence_study(s, {Scheme::Exact}, 2);
  INFO("fit order p = ", reports[0].p);
  CHECK(reports[0].p > 0.8);
  CHECK(reports[0].p < 1.3);
}

TEST_CASE("energy growth matches the predicted linear law at dev scale") {
  const GridSpec g(Cuboid::unit(), 8, 8, 8);
  NoiseSpec noise;
  noise.K = 2;
  noise.seed = 2;
  const StateZ z0 = make_preset_state(g, "smooth-bump");
  const EnergySeries es = energy_study(g, noise, StepperConfig{}, z0, 0.25, 8,
                                       48, 2);
  REQUIRE(es.t.size() == 9);
  const double e0 = inner_l2(z0, z0);
  const double rate = lambda_sq_total(noise) * trace_q(noise);
  for (std::size_t i = 0; i < es.t.size(); ++i) {
    CHECK(es.predicted[i] ==
          doctest::Approx(e0 + es.t[i] * rate).epsilon(1e-12));
    const double band =
        4.0 * es.se[i] + 1e-9 * std::max(1.0, std::abs(es.predicted[i]));
    CHECK(std::abs(es.mean[i] - es.predicted[i]) <= band);
  }
  CHECK(es.se.front() == 0.0);  // all samples share Z_0
  CHECK(es.se.back() > 0.0);

  CHECK_THROWS_AS(energy_study(g, noise, StepperConfig{}, z0, 0.25, 12, 48, 2),
                  std::exception);
  CHECK_THROWS_AS(energy_study(g, noise, StepperConfig{}, z0, 0.25, 8, 1, 2),
                  std::exception);
}

TEST_CASE("single sub-flow energy kick matches its stage magnitude") {
  const GridSpec g(Cuboid::unit(), 8, 8, 8);
  NoiseSpec noise;
  noise.K = 2;
  noise.seed = 5;
  noise.lambda1 = {1.0, 0.5, -1.5};
  noise.lambda2 = {-0.5, 1.0, 0.25};
  const StateZ z0 = make_preset_state(g, "smooth-bump");
  const double e0 = inner_l2(z0, z0);
  const double tau = 0.1;
  for (int stage = 1; stage <= 3; ++stage) {
    const SubflowEnergyPoint pt =
        subflow_energy_trial(g, noise, z0, tau, stage, 400, 2);
    CHECK(pt.stage == stage);
    CHECK(pt.predicted ==
          doctest::Approx(e0 + tau * lambda_sq_stage(noise, stage) *
                                   trace_q(noise))
              .epsilon(1e-12));
    CHECK(std::abs(pt.measured.mean - pt.predicted) <= 4.0 * pt.measured.se);
  }
  CHECK_THROWS_AS(subflow_energy_trial(g, noise, z0, tau, 0, 16, 1),
                  std::exception);
}

TEST_CASE("divergence residual starts at zero and respects the stride") {
  const GridSpec g(Cuboid::unit(), 8, 8, 8);
  NoiseSpec noise;
  noise.K = 2;
  noise.seed = 8;
  const SplitStepper st(g, noise, StepperConfig{});
  const StateZ z0 = make_preset_state(g, "smooth-bump");
  const BrownianLattice lat = BrownianLattice::sample(noise, 0, 0.5, 8);

  const DivergenceSeries full = divergence_residual(st, z0, lat, 8, 1);
  REQUIRE(full.t.size() == 9);
  CHECK(full.resid[0] == 0.0);
  for (double r : full.resid) CHECK(r >= 0.0);
  CHECK(full.resid[8] > 0.0);

  const DivergenceSeries strided = divergence_residual(st, z0, lat, 8, 2);
  REQUIRE(strided.t.size() == 5);
  for (std::size_t i = 0; i < strided.t.size(); ++i) {
    CHECK(strided.t[i] == full.t[2 * i]);
    CHECK(strided.resid[i] == full.resid[2 * i]);  // same replayed trajectory
  }

  CHECK_THROWS_AS(divergence_residual(st, z0, lat, 3, 1), std::exception);
  CHECK_THROWS_AS(divergence_residual(st, z0, lat, 8, 0), std::exception);
}
