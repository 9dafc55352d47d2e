#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>

#include "splitmax/noise.hpp"
#include "splitmax/philox.hpp"

using namespace splitmax;

TEST_CASE("covariance weights and their trace") {
  NoiseSpec s;
  s.decay_r = 3.0;
  CHECK(s.q_of(1, 1, 1) == doctest::Approx(1.0 / 27.0).epsilon(1e-15));
  CHECK(s.q_of(2, 1, 2) == doctest::Approx(std::pow(9.0, -3.0)).epsilon(1e-15));
  s.decay_r = 0.0;
  CHECK(s.q_of(3, 2, 1) == 1.0);

  NoiseSpec k1;
  k1.K = 1;
  k1.decay_r = 0.0;
  CHECK(trace_q(k1) == 1.0);
  k1.decay_r = 2.0;
  CHECK(trace_q(k1) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));

  NoiseSpec k2;
  k2.K = 2;
  k2.decay_r = 0.0;
  CHECK(trace_q(k2) == 8.0);

  NoiseSpec k4;
  k4.K = 4;
  k4.decay_r = 2.0;
  double want = 0.0;
  for (int a = 1; a <= 4; ++a)
    for (int b = 1; b <= 4; ++b)
      for (int c = 1; c <= 4; ++c)
        want += std::pow(double(a * a + b * b + c * c), -2.0);
  CHECK(trace_q(k4) == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("stage pattern magnitudes") {
  NoiseSpec s;
  s.lambda1 = {0.5, -1.0, 2.0};
  s.lambda2 = {0.0, 3.0, -0.25};
  CHECK(lambda_sq_stage(s, 1) == doctest::Approx(0.25));
  CHECK(lambda_sq_stage(s, 2) == doctest::Approx(10.0));
  CHECK(lambda_sq_stage(s, 3) == doctest::Approx(4.0625));
  CHECK(lambda_sq_total(s) ==
        doctest::Approx(lambda_sq_stage(s, 1) + lambda_sq_stage(s, 2) +
                        lambda_sq_stage(s, 3)));
  CHECK_THROWS_AS(lambda_sq_stage(s, 0), std::exception);
  CHECK_THROWS_AS(lambda_sq_stage(s, 4), std::exception);
}

TEST_CASE("mode fields are orthonormal in the weighted product") {
  const GridSpec g(Cuboid::unit(), 12, 12, 12);
  NoiseSpec s;
  s.K = 3;
  s.decay_r = 0.0;  // q = 1 so synthesize_field returns the bare mode
  const ModeBasis basis(g, s.K);
  std::vector<ScalarField> modes;
  for (int m = 0; m < s.mode_count(); ++m) {
    std::vector<double> coeff(s.mode_count(), 0.0);
    coeff[m] = 1.0;
    modes.push_back(synthesize_field(basis, s, coeff));
  }
  for (int a = 0; a < s.mode_count(); ++a)
    for (int b = a; b < s.mode_count(); ++b) {
      const double want = a == b ? 1.0 : 0.0;
      CHECK(std::abs(inner_l2_scalar(modes[a], modes[b]) - want) <= 1e-8);
    }
}

TEST_CASE("mode fields vanish identically on the cavity walls") {
  const GridSpec g(Cuboid{{0, 0, 0}, {1.1, 1.0, 0.9}}, 8, 8, 8);
  NoiseSpec s;
  s.K = 2;
  const ModeBasis basis(g, s.K);
  for (int a = 0; a < 3; ++a)
    for (int k = 1; k <= s.K; ++k) {
      CHECK(basis.sin_at(a, k, 0) == 0.0);
      CHECK(basis.sin_at(a, k, g.n[a]) == 0.0);
    }
  std::vector<double> coeff(s.mode_count(), 1.0);
  const ScalarField w = synthesize_field(basis, s, coeff);
  for (int k = 0; k < g.nodes(2); ++k)
    for (int j = 0; j < g.nodes(1); ++j)
      for (int i = 0; i < g.nodes(0); ++i) {
        const bool wall = i == 0 || i == g.n[0] || j == 0 || j == g.n[1] ||
                          k == 0 || k == g.n[2];
        if (wall) CHECK(w.at(i, j, k) == 0.0);
      }
}

TEST_CASE("mode count exceeding the alias-free range is rejected") {
  const GridSpec g(Cuboid::unit(), 8, 8, 8);
  CHECK_NOTHROW(ModeBasis(g, 7));
  CHECK_THROWS_AS(ModeBasis(g, 8), std::exception);
  CHECK_THROWS_AS(ModeBasis(g, 0), std::exception);
}

TEST_CASE("Brownian increments have the right first and second moments") {
  NoiseSpec s;
  s.K = 2;
  s.seed = 77;
  const double T = 0.4;
  const int n_fine = 2;
  const double dt = T / n_fine;
  const int M = 10000;
  const int slots = s.mode_count() * n_fine;
  std::vector<double> sum(slots, 0.0), sumsq(slots, 0.0);
  double cross = 0.0;  // increments of two distinct modes, same slot
  for (int sample = 0; sample < M; ++sample) {
    const BrownianLattice lat =
        BrownianLattice::sample(s, std::uint64_t(sample), T, n_fine);
    for (int p = 0; p < slots; ++p) {
      sum[p] += lat.incr[p];
      sumsq[p] += lat.incr[p] * lat.incr[p];
    }
    cross += lat.incr[0 * n_fine] * lat.incr[3 * n_fine];
  }
  const double mean_bound = 4.0 * std::sqrt(dt / M);
  for (int p = 0; p < slots; ++p) {
    CHECK(std::abs(sum[p] / M) <= mean_bound);
    const double var = sumsq[p] / M;
    CHECK(var >= 0.9 * dt);
    CHECK(var <= 1.1 * dt);
  }
  CHECK(std::abs(cross / M) <= 4.0 * dt / std::sqrt(double(M)));
}

TEST_CASE("lattice sampling is a pure function of its identifiers") {
  NoiseSpec s;
  s.K = 2;
  s.seed = 12345;
  const BrownianLattice a = BrownianLattice::sample(s, 9, 1.0, 8);
  const BrownianLattice b = BrownianLattice::sample(s, 9, 1.0, 8);
  CHECK(a.incr == b.incr);  // bitwise
  const BrownianLattice c = BrownianLattice::sample(s, 10, 1.0, 8);
  CHECK(a.incr != c.incr);
  NoiseSpec s2 = s;
  s2.seed = 54321;
  const BrownianLattice d = BrownianLattice::sample(s2, 9, 1.0, 8);
  CHECK(a.incr != d.incr);

  CHECK_THROWS_AS(BrownianLattice::sample(s, 0, 1.0, 12), std::exception);
  CHECK_THROWS_AS(BrownianLattice::sample(s, 0, -1.0, 8), std::exception);
}

TEST_CASE("dyadic aggregation is bitwise consistent across levels") {
  NoiseSpec s;
  s.K = 2;
  s.seed = 5;
  const BrownianLattice lat = BrownianLattice::sample(s, 3, 2.0, 16);
  for (int m = 0; m < s.mode_count(); ++m)
    for (int len = 2; len <= 16; len *= 2)
      for (int t0 = 0; t0 + len <= 16; t0 += len) {
        const double parent = lat.aggregate(m, t0, len);
        const double left = lat.aggregate(m, t0, len / 2);
        const double right = lat.aggregate(m, t0 + len / 2, len / 2);
        CHECK(parent == left + right);  // bitwise: same dyadic sum tree
      }
  CHECK_THROWS_AS(lat.aggregate(0, 3, 2), std::exception);   // misaligned
  CHECK_THROWS_AS(lat.aggregate(0, 0, 3), std::exception);   // non-dyadic
  CHECK_THROWS_AS(lat.aggregate(0, 16, 2), std::exception);  // past the end
  CHECK_THROWS_AS(lat.aggregate(8, 0, 2), std::exception);   // bad mode
}

TEST_CASE("coarse increments replay aggregated fine blocks exactly") {
  const GridSpec g(Cuboid::unit(), 6, 6, 6);
  NoiseSpec s;
  s.K = 2;
  s.seed = 21;
  const ModeBasis basis(g, s.K);
  const BrownianLattice lat = BrownianLattice::sample(s, 1, 0.8, 16);
  const NoiseIncrement inc = make_increment(lat, basis, s, 4, 2);
  CHECK(inc.dt == doctest::Approx(0.2));
  for (int m = 0; m < s.mode_count(); ++m)
    CHECK(inc.db[m] == lat.aggregate(m, 2 * 4, 4));  // bitwise
  const ScalarField w = synthesize_field(basis, s, inc.db);
  CHECK(inc.w.v == w.v);  // bitwise

  CHECK_THROWS_AS(make_increment(lat, basis, s, 5, 0), std::exception);
  CHECK_THROWS_AS(make_increment(lat, basis, s, 4, 4), std::exception);
  CHECK_THROWS_AS(make_increment(lat, basis, s, 32, 0), std::exception);
}

TEST_CASE("synthesis matches a direct mode sum") {
  const GridSpec g(Cuboid{{0, 0, 0}, {1.1, 1.0, 0.9}}, 8, 6, 7);
  NoiseSpec s;
  s.K = 2;
  s.decay_r = 2.0;
  const ModeBasis basis(g, s.K);
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> coeff(s.mode_count());
  for (double& c : coeff) c = u(rng);

  const ScalarField w = synthesize_field(basis, s, coeff);
  const auto grad = synthesize_gradient(basis, s, coeff);

  using std::numbers::pi;
  const double norm = std::sqrt(8.0 / (1.1 * 1.0 * 0.9));
  for (int k = 0; k < g.nodes(2); ++k)
    for (int j = 0; j < g.nodes(1); ++j)
      for (int i = 0; i < g.nodes(0); ++i) {
        double want = 0.0, want_dx = 0.0;
        for (int k3 = 1; k3 <= s.K; ++k3)
          for (int k2 = 1; k2 <= s.K; ++k2)
            for (int k1 = 1; k1 <= s.K; ++k1) {
              const double c = norm * std::sqrt(s.q_of(k1, k2, k3)) *
                               coeff[s.mode_index(k1, k2, k3)];
              const double s1 = std::sin(pi * k1 * double(i) / g.n[0]);
              const double s2 = std::sin(pi * k2 * double(j) / g.n[1]);
              const double s3 = std::sin(pi * k3 * double(k) / g.n[2]);
              const double c1 = std::cos(pi * k1 * double(i) / g.n[0]);
              want += c * s1 * s2 * s3;
              want_dx += c * (k1 * pi / g.box.length(0)) * c1 * s2 * s3;
            }
        const bool x_wall = i == 0 || i == g.n[0];
        const bool any_wall = x_wall || j == 0 || j == g.n[1] || k == 0 ||
                              k == g.n[2];
        if (any_wall) {
          CHECK(w.at(i, j, k) == 0.0);
        } else {
          CHECK(w.at(i, j, k) == doctest::Approx(want).epsilon(1e-12));
        }
        // the x-gradient keeps its sine factors in y and z, so it vanishes on
        // the y/z walls but not on the x walls
        if (j == 0 || j == g.n[1] || k == 0 || k == g.n[2]) {
          CHECK(grad[0].at(i, j, k) == 0.0);
        } else {
          CHECK(grad[0].at(i, j, k) ==
                doctest::Approx(want_dx).epsilon(1e-11).scale(1.0));
        }
      }

  std::vector<double> short_coeff(3, 0.0);
  CHECK_THROWS_AS(synthesize_field(basis, s, short_coeff), std::exception);
  CHECK_THROWS_AS(synthesize_gradient(basis, s, short_coeff), std::exception);
}

TEST_CASE("lattice dump and load round trip bitwise") {
  namespace fs = std::filesystem;
  NoiseSpec s;
  s.K = 3;
  s.seed = 404;
  const BrownianLattice lat = BrownianLattice::sample(s, 17, 1.5, 32);
  const fs::path path = fs::temp_directory_path() / "splitmax_lat_test.bin";
  dump_lattice(lat, path.string());
  const BrownianLattice back = load_lattice(path.string(), 1.5);
  CHECK(back.seed == lat.seed);
  CHECK(back.sample_id == lat.sample_id);
  CHECK(back.K == lat.K);
  CHECK(back.n_fine == lat.n_fine);
  CHECK(back.T == lat.T);
  CHECK(back.incr == lat.incr);  // bitwise

  // truncated payload must be detected
  fs::resize_file(path, fs::file_size(path) - 8);
  CHECK_THROWS_AS(load_lattice(path.string(), 1.5), std::exception);
  fs::remove(path);
  CHECK_THROWS_AS(load_lattice(path.string(), 1.5), std::exception);
}

TEST_CASE("counter-based gaussian stream is addressable and standard") {
  CHECK(gaussian_at(1, 2, 3, 4, 5) == gaussian_at(1, 2, 3, 4, 5));
  CHECK(gaussian_at(1, 2, 3, 4, 5) != gaussian_at(1, 2, 3, 4, 6));
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = gaussian_at(2024, std::uint32_t(i), 0, 0, 0);
    sum += x;
    sumsq += x * x;
  }
  CHECK(std::abs(sum / n) <= 4.0 / std::sqrt(double(n)));
  CHECK(sumsq / n == doctest::Approx(1.0).epsilon(0.02));
}
