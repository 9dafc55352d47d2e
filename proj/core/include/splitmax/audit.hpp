#pragma once

#include <Eigen/Dense>

#include "splitmax/stepper.hpp"

// Dense small-matrix oracles and structure checks.  Everything here is
// assembled exhaustively from the production operators (or independently from
// the modal formulas) on grids small enough that dense linear algebra is
// trivially trustworthy.

namespace splitmax {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Flattened coordinates: component-major (E1,E2,E3,H1,H2,H3), nodes in
/// z,y,x order with x fastest — identical to ScalarField storage.
Vector flatten(const StateZ& z);
StateZ unflatten(const GridSpec& g, const Vector& v);

/// Diagonal of the trapezoidal weight matrix over all 6N coordinates.
Vector weight_vector(const GridSpec& g);

/// Dense matrix of discrete_curl_axis / discrete_curl, built by applying the
/// operator to every basis state.  Throws if 6 * nodes > 1000.
Matrix assemble_dense_curl_axis(const GridSpec& g, int axis);
Matrix assemble_dense_curl(const GridSpec& g);

/// Matrix exponential, scaling-and-squaring with the degree-13 Pade core.
Matrix expm(const Matrix& a);

/// S^{IE} = (I - tau A)^{-1}, S^{M} = (I - tau/2 A)^{-1}(I + tau/2 A),
/// or e^{tau A}.
Matrix dense_propagator(const Matrix& a, Scheme s, double tau);
/// T^{M} = (I - tau/2 A)^{-1}.
Matrix dense_midpoint_filter(const Matrix& a, double tau);

/// Canonical pairing of E with H coordinates, quadrature-weighted:
/// J = ((0, W3), (-W3, 0)).  Satisfies J^2 = -W^2.
Matrix canonical_j(const GridSpec& g);

/// Discrete analogue of the subsystem 2-form  integral dE ^ curl_axis dH:
/// J_omega = ((0, W3 C), (-(W3 C)^T, 0)) with C the E-from-H block of the
/// given axis generator, normalized to unit max entry.  Exact weighted
/// skew-adjointness of the generator makes this form exactly invariant under
/// its exponential and Cayley (midpoint) propagators, which is the testable
/// finite-dimensional content of the subsystem symplecticity claim.  The
/// same-component canonical_j pairing is *not* invariant (sine and cosine
/// modes of one frequency rotate against different quadrature profiles) and
/// is reported only informationally.
Matrix curl_weighted_form(const GridSpec& g, const Matrix& axis_gen);

/// max |P^T J P - J|.
double symplectic_defect(const Matrix& p, const Matrix& j);

/// max |W A + A^T W| over entries, W the diagonal weight matrix.
double weighted_skew_defect(const Matrix& a, const GridSpec& g);

// --- band-limited spectral generators --------------------------------------

/// Generator of the exact line rotation on [u; v] coordinates of one line
/// (2(n+1) square): du/dt = c d/dx of the band-limited interpolant of v,
/// dv/dt likewise from u, frequencies k pi / L.  Built directly from the
/// modal analysis/synthesis formulas, independent of the finite-difference
/// stencils.
Matrix line_band_generator(int n, double L, int pair_sign);

/// The same generator assembled over all lines of a grid (6N square), and
/// its sum over axes.  e^{tau Mtilde} is the one-step oracle for the Exact
/// splitting: the one-step defect is then a pure splitting commutator.
Matrix band_generator_axis(const GridSpec& g, int axis);
Matrix band_generator(const GridSpec& g);

/// Mild-solution reference for one step: e^{tau M} z0 plus a left-endpoint
/// Riemann sum of the stochastic convolution, shots[r] = flatten of the
/// lambda-patterned noise state of fine substep r.
Vector oracle_mild_step(const Matrix& m, const Vector& z0, double tau,
                        const std::vector<Vector>& shots);

/// lambda-patterned state (E_a = lambda1_a w, H_a = lambda2_a w), flattened.
Vector lambda_pattern_shot(const GridSpec& g, const NoiseSpec& spec,
                           const ScalarField& w);

// --- multi-symplectic constants --------------------------------------------

Eigen::Matrix<double, 6, 6> f_matrix();
Eigen::Matrix<double, 6, 6> k_matrix(int j);

// --- audit report ----------------------------------------------------------

struct AuditCheck {
  std::string name;
  double tau;
  double value;
  double threshold;
  bool lower_bound;  // pass iff value >= threshold instead of <=
  bool informational;
  bool pass;
};

/// All structure checks on one grid; gated checks must hold for overall pass.
std::vector<AuditCheck> run_structure_audit(const GridSpec& g, double tau);

bool audit_passed(const std::vector<AuditCheck>& checks);

}  // namespace splitmax
