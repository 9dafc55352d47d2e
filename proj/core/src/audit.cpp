#include "splitmax/audit.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <stdexcept>

namespace splitmax {

namespace {

constexpr std::size_t kDenseCap = 1000;

void check_cap(const GridSpec& g) {
  if (6 * g.node_count() > kDenseCap)
    throw std::length_error(
        "dense audit: 6 * node_count exceeds the 1000-row cap");
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

Vector flatten(const StateZ& z) {
  const std::size_t nn = z.grid.node_count();
  Vector out(6 * nn);
  for (int c = 0; c < 6; ++c)
    for (std::size_t q = 0; q < nn; ++q) out[c * nn + q] = z.f[c].v[q];
  return out;
}

StateZ unflatten(const GridSpec& g, const Vector& v) {
  const std::size_t nn = g.node_count();
  if (std::size_t(v.size()) != 6 * nn)
    throw std::invalid_argument("unflatten: size mismatch");
  StateZ z(g);
  for (int c = 0; c < 6; ++c)
    for (std::size_t q = 0; q < nn; ++q) z.f[c].v[q] = v[c * nn + q];
  return z;
}

Vector weight_vector(const GridSpec& g) {
  const std::size_t nn = g.node_count();
  Vector w(6 * nn);
  for (int k = 0; k < g.nodes(2); ++k)
    for (int j = 0; j < g.nodes(1); ++j)
      for (int i = 0; i < g.nodes(0); ++i) {
        const double wq = node_weight(g, i, j, k);
        const std::size_t q = g.idx(i, j, k);
        for (int c = 0; c < 6; ++c) w[c * nn + q] = wq;
      }
  return w;
}

namespace {

template <typename Op>
Matrix assemble(const GridSpec& g, Op&& op) {
  check_cap(g);
  const std::size_t dim = 6 * g.node_count();
  Matrix a(dim, dim);
  Vector e = Vector::Zero(dim);
  for (std::size_t col = 0; col < dim; ++col) {
    e[col] = 1.0;
    a.col(col) = flatten(op(unflatten(g, e)));
    e[col] = 0.0;
  }
  return a;
}

}  // namespace

Matrix assemble_dense_curl_axis(const GridSpec& g, int axis) {
  return assemble(g, [axis](const StateZ& z) {
    return discrete_curl_axis(z, axis);
  });
}

Matrix assemble_dense_curl(const GridSpec& g) {
  return assemble(g, [](const StateZ& z) { return discrete_curl(z); });
}

Matrix expm(const Matrix& a) {
  // Scaling and squaring with the degree-13 Pade approximant; coefficients
  // and the theta_13 switching constant follow the standard double-precision
  // backward-error analysis.
  static const double b[14] = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};
  const double theta13 = 5.371920351148152;

  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("expm: matrix not square");
  const Matrix id = Matrix::Identity(n, n);

  const double nrm = a.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (nrm > theta13) s = int(std::ceil(std::log2(nrm / theta13)));
  const Matrix as = a / std::ldexp(1.0, s);

  const Matrix a2 = as * as;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a2 * a4;
  const Matrix u =
      as * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 +
            b[5] * a4 + b[3] * a2 + b[1] * id);
  const Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 +
                   b[4] * a4 + b[2] * a2 + b[0] * id;
  Matrix f = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < s; ++i) f = f * f;
  return f;
}

Matrix dense_propagator(const Matrix& a, Scheme s, double tau) {
  const Eigen::Index n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  switch (s) {
    case Scheme::Exact:
      return expm(tau * a);
    case Scheme::ImplicitEuler:
      return (id - tau * a).partialPivLu().solve(id);
    case Scheme::Midpoint:
      return (id - 0.5 * tau * a).partialPivLu().solve(id + 0.5 * tau * a);
  }
  throw std::invalid_argument("dense_propagator: scheme");
}

Matrix dense_midpoint_filter(const Matrix& a, double tau) {
  const Matrix id = Matrix::Identity(a.rows(), a.rows());
  return (id - 0.5 * tau * a).partialPivLu().solve(id);
}

Matrix canonical_j(const GridSpec& g) {
  check_cap(g);
  const std::size_t nn = g.node_count();
  Matrix j = Matrix::Zero(6 * nn, 6 * nn);
  const Vector w = weight_vector(g);
  for (int a = 0; a < 3; ++a)
    for (std::size_t q = 0; q < nn; ++q) {
      j(a * nn + q, (a + 3) * nn + q) = w[a * nn + q];
      j((a + 3) * nn + q, a * nn + q) = -w[a * nn + q];
    }
  return j;
}

Matrix curl_weighted_form(const GridSpec& g, const Matrix& axis_gen) {
  const std::size_t nn = g.node_count();
  const Eigen::Index n3 = Eigen::Index(3 * nn);
  const Matrix& a = axis_gen;
  const Vector w = weight_vector(g).head(n3);
  const Matrix wc = w.asDiagonal() * a.topRightCorner(n3, n3);
  Matrix j = Matrix::Zero(6 * nn, 6 * nn);
  j.topRightCorner(n3, n3) = wc;
  j.bottomLeftCorner(n3, n3) = -wc.transpose();
  const double scale = max_abs(j);
  if (scale > 0.0) j /= scale;
  return j;
}

double symplectic_defect(const Matrix& p, const Matrix& j) {
  return max_abs(p.transpose() * j * p - j);
}

double weighted_skew_defect(const Matrix& a, const GridSpec& g) {
  const Vector w = weight_vector(g);
  const Matrix wa = w.asDiagonal() * a;
  return max_abs(wa + wa.transpose());
}

Matrix line_band_generator(int n, double L, int pair_sign) {
  if (n < 2) throw std::invalid_argument("line_band_generator: n < 2");
  if (L <= 0.0) throw std::invalid_argument("line_band_generator: L <= 0");
  if (pair_sign != 1 && pair_sign != -1)
    throw std::invalid_argument("line_band_generator: sign");
  const int m = n + 1;
  const double s = -double(pair_sign);
  const double pi = std::acos(-1.0);
  Matrix gmat = Matrix::Zero(2 * m, 2 * m);
  for (int k = 1; k <= n - 1; ++k) {
    const double kap = k * pi / L;
    for (int i = 0; i <= n; ++i) {
      const double si = std::sin(pi * k * i / double(n));
      const double ci = std::cos(pi * k * i / double(n));
      for (int p = 0; p <= n; ++p) {
        const double wp = (p == 0 || p == n) ? 0.5 : 1.0;
        const double cp = std::cos(pi * k * p / double(n));
        const double sp = std::sin(pi * k * p / double(n));
        // du_i/dt = s sum_k kappa_k b_k sin(.)  with DCT-I analysis of v
        gmat(i, m + p) += s * kap * si * (2.0 / n) * wp * cp;
        // dv_p/dt = -s sum_k kappa_k a_k cos(.) with DST-I analysis of u
        gmat(m + i, p) += -s * kap * ci * (2.0 / n) * sp;
      }
    }
  }
  return gmat;
}

Matrix band_generator_axis(const GridSpec& g, int axis) {
  check_cap(g);
  const std::size_t nn = g.node_count();
  const int n = g.n[axis];
  const int m = n + 1;
  Matrix out = Matrix::Zero(6 * nn, 6 * nn);
  for (const AxisPair& pr : axis_pairs()[axis]) {
    const Matrix gmat = line_band_generator(n, g.box.length(axis), pr.sign);
    const std::size_t st = g.stride(axis);
    // enumerate the base node of every line along `axis`
    for (int k = 0; k < g.nodes(2); ++k)
      for (int j = 0; j < g.nodes(1); ++j)
        for (int i = 0; i < g.nodes(0); ++i) {
          const std::array<int, 3> ix{i, j, k};
          if (ix[axis] != 0) continue;
          const std::size_t base = g.idx(i, j, k);
          for (int p = 0; p <= n; ++p)
            for (int q = 0; q <= n; ++q) {
              const std::size_t rp = base + std::size_t(p) * st;
              const std::size_t cq = base + std::size_t(q) * st;
              out(pr.u * nn + rp, pr.v * nn + cq) += gmat(p, m + q);
              out(pr.v * nn + rp, pr.u * nn + cq) += gmat(m + p, q);
            }
        }
  }
  return out;
}

Matrix band_generator(const GridSpec& g) {
  Matrix out = band_generator_axis(g, 0);
  out += band_generator_axis(g, 1);
  out += band_generator_axis(g, 2);
  return out;
}

Vector oracle_mild_step(const Matrix& m, const Vector& z0, double tau,
                        const std::vector<Vector>& shots) {
  if (shots.empty()) return expm(tau * m) * z0;
  const int r = int(shots.size());
  const Matrix ed = expm((tau / r) * m);
  // Horner form: after the loop acc = e^{tau M} z0 + sum_j e^{(tau - j dt) M}
  // shots[j], the left-endpoint Riemann sum of the stochastic convolution.
  Vector acc = z0;
  for (int j = 0; j < r; ++j) acc = ed * (acc + shots[j]);
  return acc;
}

Vector lambda_pattern_shot(const GridSpec& g, const NoiseSpec& spec,
                           const ScalarField& w) {
  if (!(w.grid == g)) throw std::invalid_argument("lambda_pattern_shot: grid");
  const std::size_t nn = g.node_count();
  Vector out(6 * nn);
  for (int a = 0; a < 3; ++a)
    for (std::size_t q = 0; q < nn; ++q) {
      out[a * nn + q] = spec.lambda1[a] * w.v[q];
      out[(a + 3) * nn + q] = spec.lambda2[a] * w.v[q];
    }
  return out;
}

Eigen::Matrix<double, 6, 6> f_matrix() {
  Eigen::Matrix<double, 6, 6> f = Eigen::Matrix<double, 6, 6>::Zero();
  for (int a = 0; a < 3; ++a) {
    f(a, 3 + a) = 1.0;
    f(3 + a, a) = -1.0;
  }
  return f;
}

Eigen::Matrix<double, 6, 6> k_matrix(int j) {
  Eigen::Matrix3d d = Eigen::Matrix3d::Zero();
  switch (j) {
    case 1:
      d(1, 2) = -1.0;
      d(2, 1) = 1.0;
      break;
    case 2:
      d(0, 2) = 1.0;
      d(2, 0) = -1.0;
      break;
    case 3:
      d(0, 1) = -1.0;
      d(1, 0) = 1.0;
      break;
    default:
      throw std::invalid_argument("k_matrix: j must be 1, 2, or 3");
  }
  Eigen::Matrix<double, 6, 6> k = Eigen::Matrix<double, 6, 6>::Zero();
  k.topLeftCorner(3, 3) = d;
  k.bottomRightCorner(3, 3) = d;
  return k;
}

namespace {

double unit_circle_defect(const Matrix& p) {
  Eigen::EigenSolver<Matrix> es(p, /*computeEigenvectors=*/false);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    worst = std::max(worst, std::abs(std::abs(es.eigenvalues()[i]) - 1.0));
  return worst;
}

double spectral_radius(const Matrix& p) {
  Eigen::EigenSolver<Matrix> es(p, /*computeEigenvectors=*/false);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    worst = std::max(worst, std::abs(es.eigenvalues()[i]));
  return worst;
}

}  // namespace

std::vector<AuditCheck> run_structure_audit(const GridSpec& g, double tau) {
  check_cap(g);
  std::vector<AuditCheck> out;
  const char* axis_tag[3] = {"x", "y", "z"};
  auto add = [&](const std::string& name, double value, double threshold,
                 bool lower_bound = false, bool informational = false) {
    const bool pass =
        informational || (lower_bound ? value >= threshold : value <= threshold);
    out.push_back({name, tau, value, threshold, lower_bound, informational, pass});
  };

  std::array<Matrix, 3> ax;
  for (int a = 0; a < 3; ++a) {
    ax[a] = assemble_dense_curl_axis(g, a);
    add(std::string("skew-M") + axis_tag[a], weighted_skew_defect(ax[a], g),
        1e-10);
  }
  const Matrix atot = assemble_dense_curl(g);
  add("skew-M", weighted_skew_defect(atot, g), 1e-10);
  add("curl-additivity", max_abs(atot - (ax[0] + ax[1] + ax[2])), 1e-13);

  // the generators the schemes are actually rational functions of
  std::array<Matrix, 3> bx;
  for (int a = 0; a < 3; ++a) {
    bx[a] = band_generator_axis(g, a);
    add(std::string("skew-G") + axis_tag[a], weighted_skew_defect(bx[a], g),
        1e-10);
  }

  {
    const Vector w = weight_vector(g);
    const Matrix j = canonical_j(g);
    const Matrix w2 = Matrix(w.asDiagonal()) * Matrix(w.asDiagonal());
    add("canonical-J-square", max_abs(j * j + w2), 0.0);
  }

  std::array<Matrix, 3> pexp, pmid, pie;
  for (int a = 0; a < 3; ++a) {
    const Matrix jw = curl_weighted_form(g, bx[a]);
    pexp[a] = dense_propagator(bx[a], Scheme::Exact, tau);
    pmid[a] = dense_propagator(bx[a], Scheme::Midpoint, tau);
    pie[a] = dense_propagator(bx[a], Scheme::ImplicitEuler, tau);
    add(std::string("omega-expm-") + axis_tag[a], symplectic_defect(pexp[a], jw),
        1e-10);
    add(std::string("omega-midpoint-") + axis_tag[a],
        symplectic_defect(pmid[a], jw), 1e-10);
    // dissipative scheme: the defect must be clearly visible, not tiny
    add(std::string("omega-ie-") + axis_tag[a], symplectic_defect(pie[a], jw),
        1e-3, /*lower_bound=*/true);
    // the same-component canonical pairing is not an invariant of the
    // sub-flows; reported for the record, not gated
    add(std::string("canonical-J-defect-") + axis_tag[a],
        symplectic_defect(pexp[a], canonical_j(g)), 0.0, false,
        /*informational=*/true);
    add(std::string("cayley-inverse-") + axis_tag[a],
        max_abs(pmid[a] * dense_propagator(bx[a], Scheme::Midpoint, -tau) -
                Matrix::Identity(pmid[a].rows(), pmid[a].rows())),
        1e-10);
  }

  {
    // the dense propagators must reproduce the production line updates
    const SubflowEngine engine(g);
    std::mt19937_64 rng(911u);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const std::size_t dim = 6 * g.node_count();
    for (Scheme s :
         {Scheme::Exact, Scheme::ImplicitEuler, Scheme::Midpoint}) {
      double worst = 0.0;
      for (int a = 0; a < 3; ++a) {
        Vector x(dim);
        for (std::size_t q = 0; q < dim; ++q) x[q] = unif(rng);
        // both maps treat only boundary-consistent states identically: the
        // line updates impose the Dirichlet walls that the mask encodes
        StateZ z = unflatten(g, x);
        apply_pec_mask(z);
        x = flatten(z);
        engine.apply_semigroup(z, a, s, tau);
        const Matrix& p = s == Scheme::Exact
                              ? pexp[a]
                              : (s == Scheme::Midpoint ? pmid[a] : pie[a]);
        worst = std::max(worst, (flatten(z) - p * x).cwiseAbs().maxCoeff());
      }
      add("prop-agreement-" + scheme_name(s), worst, 1e-10);
    }
  }

  {
    // composed one-step maps, stage order x,y,z
    const Matrix smid = pmid[2] * pmid[1] * pmid[0];
    const Matrix smid_rev = dense_propagator(bx[0], Scheme::Midpoint, -tau) *
                            dense_propagator(bx[1], Scheme::Midpoint, -tau) *
                            dense_propagator(bx[2], Scheme::Midpoint, -tau);
    add("midpoint-reversed-inverse",
        max_abs(smid * smid_rev -
                Matrix::Identity(smid.rows(), smid.rows())),
        1e-10);
    add("spectrum-midpoint", unit_circle_defect(smid), 1e-8);
    add("spectrum-ie", spectral_radius(pie[2] * pie[1] * pie[0]), 1.0 + 1e-12);
  }
  for (int a = 0; a < 3; ++a)
    add(std::string("spectrum-expm-") + axis_tag[a], unit_circle_defect(pexp[a]),
        1e-8);

  {
    double worst = 0.0;
    const auto sym = [](const Eigen::Matrix<double, 6, 6>& m) {
      return (m + m.transpose()).cwiseAbs().maxCoeff();
    };
    worst = std::max(worst, sym(f_matrix()));
    for (int j = 1; j <= 3; ++j) worst = std::max(worst, sym(k_matrix(j)));
    add("fk-skew", worst, 0.0);
  }

  {
    // band-limited line generator vs the production line rotation
    const int n = 24;
    const double len = 1.0;
    const Matrix gline = line_band_generator(n, len, +1);
    const Matrix p = expm(tau * gline);
    std::mt19937_64 rng(20260823u);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> u(n + 1), v(n + 1);
      for (int i = 0; i <= n; ++i) {
        u[i] = (i == 0 || i == n) ? 0.0 : unif(rng);
        v[i] = unif(rng);
      }
      Vector x(2 * (n + 1));
      for (int i = 0; i <= n; ++i) {
        x[i] = u[i];
        x[n + 1 + i] = v[i];
      }
      const Vector y = p * x;
      exact_line_wave(u, v, /*kappa_sign=*/-1, tau, len);
      for (int i = 0; i <= n; ++i) {
        worst = std::max(worst, std::abs(y[i] - u[i]));
        worst = std::max(worst, std::abs(y[n + 1 + i] - v[i]));
      }
    }
    add("line-expm-agreement", worst, 1e-8);
  }

  {
    // noise placement: stage j shifts exactly (E_j, H_j) and nothing else,
    // and the stage's axis operator annihilates the stage's own pattern
    NoiseSpec spec;
    spec.K = std::min({2, g.n[0] - 1, g.n[1] - 1, g.n[2] - 1});
    spec.lambda1 = {0.7, -1.3, 0.4};
    spec.lambda2 = {1.1, 0.6, -0.8};
    const ModeBasis basis(g, spec.K);
    std::vector<double> coeff(spec.mode_count(), 0.0);
    for (std::size_t m = 0; m < coeff.size(); ++m)
      coeff[m] = 0.3 + 0.1 * double(m % 5);
    const ScalarField w = synthesize_field(basis, spec, coeff);

    const SubflowEngine engine(g);
    double worst_place = 0.0;
    double worst_annih = 0.0;
    for (int j = 1; j <= 3; ++j) {
      StateZ z(g);
      engine.sub_flow(z, j, Scheme::Exact, tau, spec, w);
      for (int c = 0; c < 6; ++c) {
        const double lam =
            (c == j - 1) ? spec.lambda1[j - 1]
                         : (c == j + 2 ? spec.lambda2[j - 1] : 0.0);
        for (std::size_t q = 0; q < g.node_count(); ++q)
          worst_place =
              std::max(worst_place, std::abs(z.f[c].v[q] - lam * w.v[q]));
      }
      NoiseSpec only_j = spec;
      for (int a = 0; a < 3; ++a) {
        if (a != j - 1) {
          only_j.lambda1[a] = 0.0;
          only_j.lambda2[a] = 0.0;
        }
      }
      const Vector shot = lambda_pattern_shot(g, only_j, w);
      worst_annih =
          std::max(worst_annih, (ax[j - 1] * shot).cwiseAbs().maxCoeff());
      worst_annih =
          std::max(worst_annih, (bx[j - 1] * shot).cwiseAbs().maxCoeff());
    }
    add("noise-placement", worst_place, 0.0);
    add("stage-annihilation", worst_annih, 0.0);
  }

  for (Scheme s :
       {Scheme::Exact, Scheme::ImplicitEuler, Scheme::Midpoint}) {
    const Matrix p0 = dense_propagator(atot, s, 0.0);
    add("tau0-identity-" + scheme_name(s),
        max_abs(p0 - Matrix::Identity(p0.rows(), p0.rows())), 1e-14);
  }

  return out;
}

bool audit_passed(const std::vector<AuditCheck>& checks) {
  for (const AuditCheck& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

}  // namespace splitmax
