#include "splitmax/subflows.hpp"

#include <cmath>
#include <numbers>

namespace splitmax {

Scheme scheme_from_name(const std::string& name) {
  if (name == "exact") return Scheme::Exact;
  if (name == "implicit-euler") return Scheme::ImplicitEuler;
  if (name == "midpoint") return Scheme::Midpoint;
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Exact: return "exact";
    case Scheme::ImplicitEuler: return "implicit-euler";
    case Scheme::Midpoint: return "midpoint";
  }
  throw std::logic_error("scheme_name");
}

void SubflowEngine::fill_line_basis(LineBasis& b, int n, double L) {
  using std::numbers::pi;
  const int nn = n + 1;
  b.n = n;
  b.L = L;
  b.sin_tab.assign(std::size_t(nn) * nn, 0.0);
  b.cos_tab.assign(std::size_t(nn) * nn, 0.0);
  b.kappa.assign(nn, 0.0);
  for (int k = 0; k <= n; ++k) {
    b.kappa[k] = k * pi / L;
    for (int i = 0; i <= n; ++i) {
      const double arg = pi * double(k) * double(i) / n;
      b.sin_tab[std::size_t(k) * nn + i] = std::sin(arg);
      b.cos_tab[std::size_t(k) * nn + i] = std::cos(arg);
    }
  }
}

/// a = DST-I of u (sine modes k=1..n-1), b = trapezoid DCT-I of v
/// (cosine modes k=0..n).
void SubflowEngine::line_analyze(const LineBasis& lb, const double* u,
                                 const double* v, double* a, double* b) {
  const int n = lb.n, nn = n + 1;
  for (int k = 1; k <= n - 1; ++k) {
    const double* row = &lb.sin_tab[std::size_t(k) * nn];
    double acc = 0.0;
    for (int i = 1; i <= n - 1; ++i) acc += row[i] * u[i];
    a[k] = 2.0 * acc / n;
  }
  for (int k = 0; k <= n; ++k) {
    const double* row = &lb.cos_tab[std::size_t(k) * nn];
    double acc = 0.5 * (row[0] * v[0] + row[n] * v[n]);
    for (int i = 1; i <= n - 1; ++i) acc += row[i] * v[i];
    b[k] = ((k == 0 || k == n) ? 1.0 : 2.0) * acc / n;
  }
}

void SubflowEngine::line_synthesize(const LineBasis& lb, const double* a,
                                    const double* b, double* u, double* v) {
  const int n = lb.n, nn = n + 1;
  u[0] = 0.0;
  u[n] = 0.0;
  for (int i = 1; i <= n - 1; ++i) {
    double acc = 0.0;
    for (int k = 1; k <= n - 1; ++k)
      acc += a[k] * lb.sin_tab[std::size_t(k) * nn + i];
    u[i] = acc;
  }
  for (int i = 0; i <= n; ++i) {
    double acc = b[0] + b[n] * lb.cos_tab[std::size_t(n) * nn + i];
    for (int k = 1; k <= n - 1; ++k)
      acc += b[k] * lb.cos_tab[std::size_t(k) * nn + i];
    v[i] = acc;
  }
}

/*
 * Line updates.  With a = DST(u) (sine modes k=1..n-1) and b = DCT(v)
 * (cosine modes k=0..n under the trapezoid weight), each shared frequency
 * evolves by the 2x2 system (a,b)' = G_k (a,b), G_k = ((0, s kappa),
 * (-s kappa, 0)), kappa_k = k pi / L, s = -pair_sign; the k=0 and k=n
 * cosine modes are in the kernel of G and stay fixed.  All three schemes
 * are functions of the same generator:
 *   Exact          e^{tau G_k}: the plane rotation by kappa_k tau
 *   ImplicitEuler  (Id - tau G_k)^{-1}: amplitude 1/(1+kappa^2 tau^2),
 *                  i.e. 1/sqrt(1+kappa^2 tau^2) in modulus, rotation
 *                  atan(kappa tau)
 *   Midpoint       Cayley (Id - tau/2 G_k)^{-1}(Id + tau/2 G_k), unit
 *                  modulus, rotation 2 atan(kappa tau / 2)
 */
void SubflowEngine::exact_pair_line(const LineBasis& lb, double* u, double* v,
                                    int pair_sign, double tau,
                                    std::vector<double>& scratch) {
  const int n = lb.n, nn = n + 1;
  const double s = -double(pair_sign);

  scratch.resize(std::size_t(4) * nn);
  double* a = scratch.data();
  double* b = a + nn;
  double* ar = b + nn;
  double* br = ar + nn;

  line_analyze(lb, u, v, a, b);
  br[0] = b[0];
  br[n] = b[n];
  for (int k = 1; k <= n - 1; ++k) {
    const double c = std::cos(lb.kappa[k] * tau);
    const double sn = std::sin(lb.kappa[k] * tau);
    ar[k] = c * a[k] + s * sn * b[k];
    br[k] = -s * sn * a[k] + c * b[k];
  }
  line_synthesize(lb, ar, br, u, v);
}

void SubflowEngine::rational_pair_line(const LineBasis& lb, double* u,
                                       double* v, int pair_sign, Scheme s,
                                       double tau,
                                       std::vector<double>& scratch) {
  const int n = lb.n, nn = n + 1;
  const double sg = -double(pair_sign);
  const bool mp = (s == Scheme::Midpoint);

  scratch.resize(std::size_t(4) * nn);
  double* a = scratch.data();
  double* b = a + nn;
  double* ar = b + nn;
  double* br = ar + nn;

  line_analyze(lb, u, v, a, b);
  br[0] = b[0];
  br[n] = b[n];
  for (int k = 1; k <= n - 1; ++k) {
    if (mp) {
      const double g = 0.5 * lb.kappa[k] * tau;
      const double den = 1.0 + g * g;
      ar[k] = ((1.0 - g * g) * a[k] + 2.0 * sg * g * b[k]) / den;
      br[k] = (-2.0 * sg * g * a[k] + (1.0 - g * g) * b[k]) / den;
    } else {
      const double g = lb.kappa[k] * tau;
      const double den = 1.0 + g * g;
      ar[k] = (a[k] + sg * g * b[k]) / den;
      br[k] = (-sg * g * a[k] + b[k]) / den;
    }
  }
  line_synthesize(lb, ar, br, u, v);
}

SubflowEngine::SubflowEngine(const GridSpec& g) : grid_(g) {
  for (int a = 0; a < 3; ++a)
    fill_line_basis(basis_[a], g.n[a], g.box.length(a));
}

void exact_line_wave(std::vector<double>& u, std::vector<double>& v,
                     int kappa_sign, double tau, double L) {
  if (u.size() != v.size() || u.size() < 5)
    throw std::invalid_argument("exact_line_wave: need matching lines, n >= 4");
  if (L <= 0.0) throw std::invalid_argument("exact_line_wave: L > 0");
  if (kappa_sign != 1 && kappa_sign != -1)
    throw std::invalid_argument("exact_line_wave: kappa_sign must be +-1");
  const int n = int(u.size()) - 1;
  double sup = 0.0;
  for (double x : u) sup = std::max(sup, std::abs(x));
  const double tol = 1e-12 * std::max(1.0, sup);
  if (std::abs(u[0]) > tol || std::abs(u[n]) > tol)
    throw std::domain_error(
        "exact_line_wave: Dirichlet component has nonzero wall value");

  SubflowEngine::LineBasis lb;
  SubflowEngine::fill_line_basis(lb, n, L);
  std::vector<double> scratch;
  SubflowEngine::exact_pair_line(lb, u.data(), v.data(), -kappa_sign, tau,
                                 scratch);
}

void SubflowEngine::apply_semigroup(StateZ& z, int axis, Scheme s,
                                    double tau) const {
  if (!(z.grid == grid_))
    throw std::invalid_argument("apply_semigroup: grid mismatch");
  if (axis < 0 || axis > 2) throw std::out_of_range("apply_semigroup: axis");

  const GridSpec& g = grid_;
  const int n = g.n[axis];
  const std::size_t st = g.stride(axis);
  const int b1 = (axis + 1) % 3, b2 = (axis + 2) % 3;
  const std::size_t st1 = g.stride(b1), st2 = g.stride(b2);

  std::vector<double> ubuf(n + 1), vbuf(n + 1), scratch;
  for (const AxisPair& pr : axis_pairs()[axis]) {
    ScalarField& fu = z.f[pr.u];
    ScalarField& fv = z.f[pr.v];
    for (int qo = 0; qo < g.nodes(b2); ++qo)
      for (int po = 0; po < g.nodes(b1); ++po) {
        double* up = fu.v.data() + qo * st2 + po * st1;
        double* vp = fv.v.data() + qo * st2 + po * st1;
        for (int i = 0; i <= n; ++i) {
          ubuf[i] = up[i * st];
          vbuf[i] = vp[i * st];
        }
        if (s == Scheme::Exact)
          exact_pair_line(basis_[axis], ubuf.data(), vbuf.data(), pr.sign, tau,
                          scratch);
        else
          rational_pair_line(basis_[axis], ubuf.data(), vbuf.data(), pr.sign,
                             s, tau, scratch);
        for (int i = 0; i <= n; ++i) {
          up[i * st] = ubuf[i];
          vp[i * st] = vbuf[i];
        }
      }
  }
}

void SubflowEngine::apply_stochastic_shift(StateZ& z, int stage_j,
                                           const NoiseSpec& spec,
                                           const ScalarField& w) const {
  if (stage_j < 1 || stage_j > 3)
    throw std::out_of_range("apply_stochastic_shift: stage");
  if (!(w.grid == z.grid))
    throw std::invalid_argument("apply_stochastic_shift: grid mismatch");
  const double c1 = spec.lambda1[stage_j - 1];
  const double c2 = spec.lambda2[stage_j - 1];
  double* e = z.f[stage_j - 1].v.data();
  double* hh = z.f[3 + stage_j - 1].v.data();
  const double* ww = w.v.data();
  const std::size_t nn = w.v.size();
  for (std::size_t p = 0; p < nn; ++p) {
    e[p] += c1 * ww[p];
    hh[p] += c2 * ww[p];
  }
}

void SubflowEngine::sub_flow(StateZ& z, int stage_j, Scheme s, double tau,
                             const NoiseSpec& spec, const ScalarField& w) const {
  // the stage components (E_j, H_j) are untouched by the axis-j pairs, so
  // shift and semigroup commute exactly; shift first by convention
  apply_stochastic_shift(z, stage_j, spec, w);
  apply_semigroup(z, stage_j - 1, s, tau);
  apply_pec_mask(z);
}

void apply_sub_semigroup(StateZ& z, int axis, Scheme s, double tau) {
  SubflowEngine(z.grid).apply_semigroup(z, axis, s, tau);
}

void sub_flow(StateZ& z, int stage_j, Scheme s, double tau,
              const NoiseSpec& spec, const ScalarField& w) {
  SubflowEngine(z.grid).sub_flow(z, stage_j, s, tau, spec, w);
}

}  // namespace splitmax
