#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

// Collocated finite-difference grid for the field pair Z = (E, H) on a cuboid
// cavity with perfectly conducting (PEC) walls.  All six field components live
// on the same (n1+1)x(n2+1)x(n3+1) node lattice.  Spatial derivatives are
// second-order central stencils in the interior; the one-sided closure at the
// walls is chosen per component role so that each directional Maxwell operator
// is exactly skew-adjoint under the trapezoidal inner product (see
// discrete_curl_axis below).

namespace splitmax {

enum Comp : int { E1 = 0, E2 = 1, E3 = 2, H1 = 3, H2 = 4, H3 = 5 };

/// Axis-aligned box [lo0,hi0] x [lo1,hi1] x [lo2,hi2].
struct Cuboid {
  std::array<double, 3> lo{0.0, 0.0, 0.0};
  std::array<double, 3> hi{1.0, 1.0, 1.0};

  double length(int axis) const { return hi[axis] - lo[axis]; }
  static Cuboid unit() { return Cuboid{}; }
  bool operator==(const Cuboid&) const = default;
};

/// Node lattice over a Cuboid; n[a] is the cell count along axis a, so there
/// are n[a]+1 nodes per axis.  The stencil closures need n[a] >= 4.
struct GridSpec {
  Cuboid box;
  std::array<int, 3> n{4, 4, 4};

  GridSpec() = default;
  GridSpec(const Cuboid& b, int n1, int n2, int n3);

  int nodes(int axis) const { return n[axis] + 1; }
  std::size_t node_count() const {
    return std::size_t(nodes(0)) * nodes(1) * nodes(2);
  }
  double h(int axis) const { return box.length(axis) / n[axis]; }
  double coord(int axis, int i) const {
    return box.lo[axis] + i * h(axis);
  }
  std::size_t idx(int i, int j, int k) const {
    return (std::size_t(k) * nodes(1) + j) * nodes(0) + i;
  }
  /// Linear-index stride of one node step along `axis`.
  std::size_t stride(int axis) const {
    switch (axis) {
      case 0: return 1;
      case 1: return std::size_t(nodes(0));
      case 2: return std::size_t(nodes(0)) * nodes(1);
    }
    throw std::out_of_range("GridSpec::stride: axis");
  }
  bool operator==(const GridSpec&) const = default;
};

/// One scalar component sampled at every grid node, x-fastest storage.
struct ScalarField {
  GridSpec grid;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(const GridSpec& g) : grid(g), v(g.node_count(), 0.0) {}

  double& at(int i, int j, int k) { return v[grid.idx(i, j, k)]; }
  double at(int i, int j, int k) const { return v[grid.idx(i, j, k)]; }
};

/// Full state Z = (E1,E2,E3,H1,H2,H3).
struct StateZ {
  GridSpec grid;
  std::array<ScalarField, 6> f;

  StateZ() = default;
  explicit StateZ(const GridSpec& g)
      : grid(g), f{ScalarField(g), ScalarField(g), ScalarField(g),
                   ScalarField(g), ScalarField(g), ScalarField(g)} {}

  ScalarField& comp(int c) { return f[c]; }
  const ScalarField& comp(int c) const { return f[c]; }
};

// --- trapezoidal (weighted l2) geometry -----------------------------------

/// Quadrature weight of node (i,j,k): h1*h2*h3 times 1/2 per face the node
/// lies on (so 1/4 on edges, 1/8 at corners).
double node_weight(const GridSpec& g, int i, int j, int k);

double inner_l2_scalar(const ScalarField& a, const ScalarField& b);
double norm_l2_scalar(const ScalarField& a);
/// Sum of component-wise weighted inner products over all six components.
double inner_l2(const StateZ& a, const StateZ& b);
double norm_l2(const StateZ& a);

// --- derivative kernels ----------------------------------------------------

/// Edge closure of the one-dimensional derivative along an axis.
/// Dirichlet components (tangential E on the two walls normal to the
/// differentiation axis) vanish there; their rows use the first-order
/// one-sided difference with the wall value read as zero, which is the unique
/// closure making (trapezoid-weighted) summation by parts exact.
/// Free components use the standard second-order one-sided difference.
enum class EdgeRule { DirichletMasked, OneSidedSecondOrder };

/// out := d(in)/d(axis) with the given edge closure.  `in` and `out` may not
/// alias.
void axis_derivative(const ScalarField& in, ScalarField& out, int axis,
                     EdgeRule rule);

// --- Maxwell operators -----------------------------------------------------

/*
 * The directional splitting M = M_x + M_y + M_z pairs, per axis, one
 * tangential E component with one tangential H component:
 *
 *   axis x:  dE2 = -dH3/dx   dH3 = -dE2/dx      pair (E2,H3)
 *            dE3 = +dH2/dx   dH2 = +dE3/dx      pair (E3,H2)
 *   axis y:  dE1 = +dH3/dy   dH3 = +dE1/dy      pair (E1,H3)
 *            dE3 = -dH1/dy   dH1 = -dE3/dy      pair (E3,H1)
 *   axis z:  dE1 = -dH2/dz   dH2 = -dE1/dz      pair (E1,H2)
 *            dE2 = +dH1/dz   dH1 = +dE2/dz      pair (E2,H1)
 *
 * The E component of each pair is the Dirichlet one: it vanishes on the two
 * walls normal to the axis.  Both the differentiated E input and the E output
 * rows are masked on those walls, so the assembled operator is exactly
 * skew-adjoint in the weighted inner product.
 */

/// One (E,H) pair evolved by M_axis: du/dt = sign * dv/daxis and
/// dv/dt = sign * du/daxis, with u the Dirichlet (E) component.
struct AxisPair {
  Comp u;
  Comp v;
  int sign;
};
const std::array<std::array<AxisPair, 2>, 3>& axis_pairs();

/// Apply the directional Maxwell operator M_axis to z.
StateZ discrete_curl_axis(const StateZ& z, int axis);

/// Apply the full Maxwell operator M = M_x + M_y + M_z.
StateZ discrete_curl(const StateZ& z);

/// Divergence of a vector field (f1,f2,f3) with second-order one-sided
/// closures at all walls.
ScalarField discrete_div(const ScalarField& f1, const ScalarField& f2,
                         const ScalarField& f3);

// --- PEC boundary handling -------------------------------------------------

/// Zero the tangential E components and the normal H component on each wall:
/// E2,E3,H1 on the x-walls; E1,E3,H2 on the y-walls; E1,E2,H3 on the z-walls.
void apply_pec_mask(StateZ& z);

/// Largest magnitude any PEC-constrained component attains on its wall.
double pec_defect(const StateZ& z);

// --- initial data presets --------------------------------------------------

/// "zero", "smooth-bump" (products of squared sines, PEC-compatible in every
/// component), or "cavity-mode" (a TE eigenmode of the cavity with wave
/// index k in the x and z directions).
StateZ make_preset_state(const GridSpec& g, const std::string& preset,
                         int mode_k = 1);

/// Eigenfrequency of the "cavity-mode" preset.
double cavity_mode_omega(const GridSpec& g, int mode_k);

}  // namespace splitmax
