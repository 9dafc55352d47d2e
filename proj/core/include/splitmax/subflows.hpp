#pragma once

#include <vector>

#include "splitmax/grid.hpp"
#include "splitmax/noise.hpp"

// Sub-flows of the directional splitting.  Each stage j in {1,2,3} couples
// the two (E,H) pairs of axis j through one-dimensional wave systems along
// that axis, plus an additive noise shift on the stage's own components
// (E_j, H_j), which the axis-j wave systems do not touch.
//
// Per pair (u,v,c) with du/dt = c dv/dx and dv/dt = c du/dx the line update
// is one of
//   Exact          spectral rotation of the band-limited interpolant
//                  (sine modes for u, cosine modes for v, frequencies k*pi/L)
//   ImplicitEuler  resolvent (Id - tau B)^{-1} of the same band-limited
//                  generator, solved per mode
//   Midpoint       Cayley form (Id - tau/2 B)^{-1}(Id + tau/2 B), per mode

namespace splitmax {

enum class Scheme { Exact, ImplicitEuler, Midpoint };

Scheme scheme_from_name(const std::string& name);
std::string scheme_name(Scheme s);

/// Exact one-dimensional pair rotation on a single line of n+1 nodes over a
/// segment of length L.  u must vanish at both endpoints (tolerance 1e-12
/// relative to its sup-norm); modes rotate by angle kappa_k*tau with
/// kappa_k = k*pi/L, the k=0 and k=n cosine modes are invariant.
/// kappa_sign is +1/-1 and equals -c for the pair sign c above.
void exact_line_wave(std::vector<double>& u, std::vector<double>& v,
                     int kappa_sign, double tau, double L);

/// Holds per-axis spectral tables for a grid; const after construction and
/// safe to share between threads.
class SubflowEngine {
 public:
  explicit SubflowEngine(const GridSpec& g);

  const GridSpec& grid() const { return grid_; }

  /// Apply the axis semigroup S_axis(tau) of the scheme to both pairs.
  void apply_semigroup(StateZ& z, int axis, Scheme s, double tau) const;

  /// z.E_j += lambda1_j * w, z.H_j += lambda2_j * w.
  void apply_stochastic_shift(StateZ& z, int stage_j, const NoiseSpec& spec,
                              const ScalarField& w) const;

  /// Full stage map Psi_j(tau): noise shift, axis semigroup, PEC re-mask.
  /// Shift and semigroup act on disjoint components and commute exactly.
  void sub_flow(StateZ& z, int stage_j, Scheme s, double tau,
                const NoiseSpec& spec, const ScalarField& w) const;

 private:
  struct LineBasis {
    int n = 0;
    double L = 0.0;
    std::vector<double> sin_tab;  // sin_tab[k*(n+1)+i] = sin(pi*k*i/n)
    std::vector<double> cos_tab;  // cos_tab[k*(n+1)+i] = cos(pi*k*i/n)
    std::vector<double> kappa;    // kappa[k] = k*pi/L
  };
  std::array<LineBasis, 3> basis_;
  GridSpec grid_;

  static void fill_line_basis(LineBasis& b, int n, double L);
  static void line_analyze(const LineBasis& lb, const double* u,
                           const double* v, double* a, double* b);
  static void line_synthesize(const LineBasis& lb, const double* a,
                              const double* b, double* u, double* v);
  static void exact_pair_line(const LineBasis& lb, double* u, double* v,
                              int pair_sign, double tau,
                              std::vector<double>& scratch);
  static void rational_pair_line(const LineBasis& lb, double* u, double* v,
                                 int pair_sign, Scheme s, double tau,
                                 std::vector<double>& scratch);

  friend void exact_line_wave(std::vector<double>&, std::vector<double>&, int,
                              double, double);
};

/// Convenience wrappers constructing a throwaway engine (test use).
void apply_sub_semigroup(StateZ& z, int axis, Scheme s, double tau);
void sub_flow(StateZ& z, int stage_j, Scheme s, double tau,
              const NoiseSpec& spec, const ScalarField& w);

}  // namespace splitmax
