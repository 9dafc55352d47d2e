#include "splitmax/grid.hpp"

#include <cmath>
#include <numbers>

namespace splitmax {

GridSpec::GridSpec(const Cuboid& b, int n1, int n2, int n3)
    : box(b), n{n1, n2, n3} {
  for (int a = 0; a < 3; ++a) {
    if (box.length(a) <= 0.0)
      throw std::invalid_argument("GridSpec: cuboid has non-positive extent");
    if (n[a] < 4)
      throw std::invalid_argument(
          "GridSpec: need at least 4 cells per axis for the stencil closures");
  }
}

double node_weight(const GridSpec& g, int i, int j, int k) {
  double w = g.h(0) * g.h(1) * g.h(2);
  if (i == 0 || i == g.n[0]) w *= 0.5;
  if (j == 0 || j == g.n[1]) w *= 0.5;
  if (k == 0 || k == g.n[2]) w *= 0.5;
  return w;
}

static void check_same_grid(const GridSpec& a, const GridSpec& b,
                            const char* who) {
  if (!(a == b))
    throw std::invalid_argument(std::string(who) + ": grid mismatch");
}

double inner_l2_scalar(const ScalarField& a, const ScalarField& b) {
  check_same_grid(a.grid, b.grid, "inner_l2_scalar");
  const GridSpec& g = a.grid;
  const double hv = g.h(0) * g.h(1) * g.h(2);
  double acc = 0.0;
  std::size_t p = 0;
  for (int k = 0; k <= g.n[2]; ++k) {
    const double wk = (k == 0 || k == g.n[2]) ? 0.5 : 1.0;
    for (int j = 0; j <= g.n[1]; ++j) {
      const double wjk = wk * ((j == 0 || j == g.n[1]) ? 0.5 : 1.0);
      for (int i = 0; i <= g.n[0]; ++i, ++p) {
        const double w = wjk * ((i == 0 || i == g.n[0]) ? 0.5 : 1.0);
        acc += w * a.v[p] * b.v[p];
      }
    }
  }
  return hv * acc;
}

double norm_l2_scalar(const ScalarField& a) {
  return std::sqrt(inner_l2_scalar(a, a));
}

double inner_l2(const StateZ& a, const StateZ& b) {
  check_same_grid(a.grid, b.grid, "inner_l2");
  double acc = 0.0;
  for (int c = 0; c < 6; ++c) acc += inner_l2_scalar(a.f[c], b.f[c]);
  return acc;
}

double norm_l2(const StateZ& a) { return std::sqrt(inner_l2(a, a)); }

void axis_derivative(const ScalarField& in, ScalarField& out, int axis,
                     EdgeRule rule) {
  const GridSpec& g = in.grid;
  if (!(out.grid == g)) out = ScalarField(g);
  if (&in == &out)
    throw std::invalid_argument("axis_derivative: in and out alias");

  const int n = g.n[axis];
  const std::size_t st = g.stride(axis);
  const double invh = 1.0 / g.h(axis);
  const double inv2h = 0.5 * invh;
  const int b1 = (axis + 1) % 3, b2 = (axis + 2) % 3;
  const std::size_t st1 = g.stride(b1), st2 = g.stride(b2);

  for (int q = 0; q < g.nodes(b2); ++q) {
    for (int p = 0; p < g.nodes(b1); ++p) {
      const double* x = in.v.data() + q * st2 + p * st1;
      double* y = out.v.data() + q * st2 + p * st1;
      if (rule == EdgeRule::DirichletMasked) {
        // wall values of the input are read as zero
        y[0] = x[st] * invh;
        y[st] = x[2 * st] * inv2h;
        for (int i = 2; i <= n - 2; ++i)
          y[i * st] = (x[(i + 1) * st] - x[(i - 1) * st]) * inv2h;
        y[(n - 1) * st] = -x[(n - 2) * st] * inv2h;
        y[n * st] = -x[(n - 1) * st] * invh;
      } else {
        y[0] = (-3.0 * x[0] + 4.0 * x[st] - x[2 * st]) * inv2h;
        for (int i = 1; i <= n - 1; ++i)
          y[i * st] = (x[(i + 1) * st] - x[(i - 1) * st]) * inv2h;
        y[n * st] =
            (3.0 * x[n * st] - 4.0 * x[(n - 1) * st] + x[(n - 2) * st]) * inv2h;
      }
    }
  }
}

const std::array<std::array<AxisPair, 2>, 3>& axis_pairs() {
  // du/dt = sign * d v / d axis,  dv/dt = sign * d u / d axis
  static const std::array<std::array<AxisPair, 2>, 3> table = {{
      {{{E2, H3, -1}, {E3, H2, +1}}},
      {{{E1, H3, +1}, {E3, H1, -1}}},
      {{{E1, H2, -1}, {E2, H1, +1}}},
  }};
  return table;
}

/// Zero f on the two walls normal to `axis`.
static void zero_on_axis_walls(ScalarField& f, int axis) {
  const GridSpec& g = f.grid;
  const int n = g.n[axis];
  const std::size_t st = g.stride(axis);
  const int b1 = (axis + 1) % 3, b2 = (axis + 2) % 3;
  const std::size_t st1 = g.stride(b1), st2 = g.stride(b2);
  for (int q = 0; q < g.nodes(b2); ++q)
    for (int p = 0; p < g.nodes(b1); ++p) {
      double* y = f.v.data() + q * st2 + p * st1;
      y[0] = 0.0;
      y[n * st] = 0.0;
    }
}

StateZ discrete_curl_axis(const StateZ& z, int axis) {
  if (axis < 0 || axis > 2)
    throw std::out_of_range("discrete_curl_axis: axis");
  StateZ out(z.grid);
  ScalarField tmp(z.grid);
  for (const AxisPair& pr : axis_pairs()[axis]) {
    axis_derivative(z.f[pr.v], tmp, axis, EdgeRule::OneSidedSecondOrder);
    // constrained output rows (E on its walls) are projected out
    zero_on_axis_walls(tmp, axis);
    double* u_out = out.f[pr.u].v.data();
    for (std::size_t m = 0; m < tmp.v.size(); ++m)
      u_out[m] = pr.sign * tmp.v[m];

    axis_derivative(z.f[pr.u], tmp, axis, EdgeRule::DirichletMasked);
    double* v_out = out.f[pr.v].v.data();
    for (std::size_t m = 0; m < tmp.v.size(); ++m)
      v_out[m] = pr.sign * tmp.v[m];
  }
  return out;
}

StateZ discrete_curl(const StateZ& z) {
  StateZ out = discrete_curl_axis(z, 0);
  for (int axis = 1; axis < 3; ++axis) {
    StateZ part = discrete_curl_axis(z, axis);
    for (int c = 0; c < 6; ++c)
      for (std::size_t m = 0; m < out.f[c].v.size(); ++m)
        out.f[c].v[m] += part.f[c].v[m];
  }
  return out;
}

ScalarField discrete_div(const ScalarField& f1, const ScalarField& f2,
                         const ScalarField& f3) {
  check_same_grid(f1.grid, f2.grid, "discrete_div");
  check_same_grid(f1.grid, f3.grid, "discrete_div");
  ScalarField out(f1.grid), tmp(f1.grid);
  axis_derivative(f1, out, 0, EdgeRule::OneSidedSecondOrder);
  axis_derivative(f2, tmp, 1, EdgeRule::OneSidedSecondOrder);
  for (std::size_t m = 0; m < out.v.size(); ++m) out.v[m] += tmp.v[m];
  axis_derivative(f3, tmp, 2, EdgeRule::OneSidedSecondOrder);
  for (std::size_t m = 0; m < out.v.size(); ++m) out.v[m] += tmp.v[m];
  return out;
}

// Components clamped to zero on the wall normal to axis a: the two tangential
// E components and the normal H component.
static void constrained_comps(int axis, int out[3]) {
  int c = 0;
  for (int e = 0; e < 3; ++e)
    if (e != axis) out[c++] = e;
  out[c] = 3 + axis;
}

void apply_pec_mask(StateZ& z) {
  for (int axis = 0; axis < 3; ++axis) {
    int comps[3];
    constrained_comps(axis, comps);
    for (int c : comps) zero_on_axis_walls(z.f[c], axis);
  }
}

double pec_defect(const StateZ& z) {
  const GridSpec& g = z.grid;
  double worst = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    int comps[3];
    constrained_comps(axis, comps);
    const int n = g.n[axis];
    const std::size_t st = g.stride(axis);
    const int b1 = (axis + 1) % 3, b2 = (axis + 2) % 3;
    for (int c : comps)
      for (int q = 0; q < g.nodes(b2); ++q)
        for (int p = 0; p < g.nodes(b1); ++p) {
          const double* x =
              z.f[c].v.data() + q * g.stride(b2) + p * g.stride(b1);
          worst = std::max(worst, std::abs(x[0]));
          worst = std::max(worst, std::abs(x[n * st]));
        }
  }
  return worst;
}

StateZ make_preset_state(const GridSpec& g, const std::string& preset,
                         int mode_k) {
  using std::numbers::pi;
  StateZ z(g);
  if (preset == "zero") return z;

  if (preset == "smooth-bump") {
    static const double amp[6] = {0.9, -0.7, 0.4, 0.5, 0.8, -0.6};
    std::array<std::vector<double>, 3> bump;
    for (int a = 0; a < 3; ++a) {
      bump[a].resize(g.nodes(a));
      for (int i = 0; i < g.nodes(a); ++i) {
        const double s = std::sin(pi * double(i) / g.n[a]);
        bump[a][i] = s * s;
      }
    }
    for (int c = 0; c < 6; ++c) {
      std::size_t p = 0;
      for (int k = 0; k <= g.n[2]; ++k)
        for (int j = 0; j <= g.n[1]; ++j)
          for (int i = 0; i <= g.n[0]; ++i, ++p)
            z.f[c].v[p] = amp[c] * bump[0][i] * bump[1][j] * bump[2][k];
    }
    // sin(pi) evaluates to ~1e-16, not 0; mask so the walls are exactly clean
    apply_pec_mask(z);
    return z;
  }

  if (preset == "cavity-mode") {
    if (mode_k < 1)
      throw std::invalid_argument("make_preset_state: cavity mode index >= 1");
    const double kx = mode_k * pi / g.box.length(0);
    const double kz = mode_k * pi / g.box.length(2);
    const double omega = std::sqrt(kx * kx + kz * kz);
    std::size_t p = 0;
    for (int k = 0; k <= g.n[2]; ++k) {
      const double zt = k * g.h(2);
      for (int j = 0; j <= g.n[1]; ++j) {
        for (int i = 0; i <= g.n[0]; ++i, ++p) {
          const double xt = i * g.h(0);
          z.f[E2].v[p] = std::sin(kx * xt) * std::sin(kz * zt);
          z.f[H1].v[p] = -(kz / omega) * std::sin(kx * xt) * std::cos(kz * zt);
          z.f[H3].v[p] = (kx / omega) * std::cos(kx * xt) * std::sin(kz * zt);
        }
      }
    }
    apply_pec_mask(z);
    return z;
  }

  throw std::invalid_argument("make_preset_state: unknown preset '" + preset +
                              "'");
}

double cavity_mode_omega(const GridSpec& g, int mode_k) {
  using std::numbers::pi;
  const double kx = mode_k * pi / g.box.length(0);
  const double kz = mode_k * pi / g.box.length(2);
  return std::sqrt(kx * kx + kz * kz);
}

}  // namespace splitmax
