#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "splitmax/grid.hpp"

// Additive Q-Wiener noise W(t) = sum_k sqrt(q_k) B_k(t) e_k with the sine
// eigenbasis of the cavity, q_k = |k|^(-2r), and one independent scalar
// Brownian motion per retained mode k in {1..K}^3.  The noise enters the
// field equations through the constant amplitude vectors lambda1 (electric)
// and lambda2 (magnetic).

namespace splitmax {

struct NoiseSpec {
  std::array<double, 3> lambda1{1.0, 1.0, 1.0};
  std::array<double, 3> lambda2{1.0, 1.0, 1.0};
  double decay_r = 3.0;  // q_k = (k1^2+k2^2+k3^2)^(-decay_r)
  int K = 4;             // modes per axis
  std::uint64_t seed = 0;

  int mode_count() const { return K * K * K; }
  /// Linear mode index, k1 fastest ("mode-major" order of the lattice dump).
  int mode_index(int k1, int k2, int k3) const {
    return (k3 - 1) * K * K + (k2 - 1) * K + (k1 - 1);
  }
  double q_of(int k1, int k2, int k3) const;
};

/// |lambda^{[j]}|^2 = lambda1_j^2 + lambda2_j^2 for stage j in {1,2,3}.
double lambda_sq_stage(const NoiseSpec& s, int j);
/// |lambda|^2 = sum_j |lambda^{[j]}|^2.
double lambda_sq_total(const NoiseSpec& s);

/// Tr Q = sum over retained modes of q_k.
double trace_q(const NoiseSpec& s);

/// Per-axis sine/cosine tables of the retained modes on a grid, plus the
/// L2(D)-normalization of the product basis.
struct ModeBasis {
  GridSpec grid;
  int K = 0;
  double norm = 0.0;  // sqrt(8 / (L1 L2 L3))
  // tables[a][(k-1)*nodes(a) + i], k = 1..K
  std::array<std::vector<double>, 3> sin_t;
  std::array<std::vector<double>, 3> cos_t;

  ModeBasis() = default;
  ModeBasis(const GridSpec& g, int K);

  double sin_at(int axis, int k, int i) const {
    return sin_t[axis][std::size_t(k - 1) * grid.nodes(axis) + i];
  }
  double cos_at(int axis, int k, int i) const {
    return cos_t[axis][std::size_t(k - 1) * grid.nodes(axis) + i];
  }
};

/// All fine-level Brownian increments of one sample path, one row per mode.
/// Increments at coarser dyadic levels are obtained by pairwise (dyadic)
/// aggregation, so a parent increment is bit-identical to the sum of its two
/// children.
struct BrownianLattice {
  std::uint64_t seed = 0;
  std::uint64_t sample_id = 0;
  int K = 0;
  int n_fine = 0;
  double T = 0.0;
  std::vector<double> incr;  // incr[m * n_fine + t]

  double dt_fine() const { return T / n_fine; }

  static BrownianLattice sample(const NoiseSpec& spec, std::uint64_t sample_id,
                                double T, int n_fine);

  /// Dyadic pairwise sum of fine increments of mode m over [t0, t0+len);
  /// len must be a power of two and t0 a multiple of len.
  double aggregate(int m, int t0, int len) const;
};

/// One aggregated noise increment: raw Brownian increments per mode plus the
/// synthesized scalar field  dW(x) = sum_m sqrt(q_m) dB_m e_m(x).
struct NoiseIncrement {
  double dt = 0.0;
  std::vector<double> db;  // per-mode Brownian increment
  ScalarField w;
};

/// Brownian increment of step `step` out of `n_steps` over [0,T], aggregated
/// from the fine lattice.  n_steps must divide n_fine with a power-of-two
/// ratio, else the replay addressing is ill-defined.
NoiseIncrement make_increment(const BrownianLattice& lat, const ModeBasis& basis,
                              const NoiseSpec& spec, int n_steps, int step);

/// sum_m sqrt(q_m) c_m e_m(x) for an arbitrary coefficient vector c.
ScalarField synthesize_field(const ModeBasis& basis, const NoiseSpec& spec,
                             const std::vector<double>& coeff);

/// Componentwise gradient of synthesize_field(coeff).
std::array<ScalarField, 3> synthesize_gradient(const ModeBasis& basis,
                                               const NoiseSpec& spec,
                                               const std::vector<double>& coeff);

/// Raw little-endian dump: u64 seed, u64 sample_id, u32 K, u32 n_fine, then
/// K^3 * n_fine f64 increments in mode-major order.
void dump_lattice(const BrownianLattice& lat, const std::string& path);
BrownianLattice load_lattice(const std::string& path, double T);

}  // namespace splitmax
