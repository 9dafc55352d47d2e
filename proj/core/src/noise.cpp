#include "splitmax/noise.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "splitmax/philox.hpp"

static_assert(std::endian::native == std::endian::little,
              "lattice dump assumes a little-endian host");

namespace splitmax {

double NoiseSpec::q_of(int k1, int k2, int k3) const {
  const double ksq = double(k1) * k1 + double(k2) * k2 + double(k3) * k3;
  return std::pow(ksq, -decay_r);
}

double lambda_sq_stage(const NoiseSpec& s, int j) {
  if (j < 1 || j > 3) throw std::out_of_range("lambda_sq_stage: j");
  return s.lambda1[j - 1] * s.lambda1[j - 1] +
         s.lambda2[j - 1] * s.lambda2[j - 1];
}

double lambda_sq_total(const NoiseSpec& s) {
  return lambda_sq_stage(s, 1) + lambda_sq_stage(s, 2) + lambda_sq_stage(s, 3);
}

double trace_q(const NoiseSpec& s) {
  double acc = 0.0;
  for (int k3 = 1; k3 <= s.K; ++k3)
    for (int k2 = 1; k2 <= s.K; ++k2)
      for (int k1 = 1; k1 <= s.K; ++k1) acc += s.q_of(k1, k2, k3);
  return acc;
}

ModeBasis::ModeBasis(const GridSpec& g, int K_) : grid(g), K(K_) {
  using std::numbers::pi;
  if (K < 1) throw std::invalid_argument("ModeBasis: K >= 1 required");
  for (int a = 0; a < 3; ++a) {
    if (K > g.n[a] - 1)
      throw std::invalid_argument(
          "ModeBasis: K exceeds the alias-free mode range of the grid");
  }
  const double vol =
      grid.box.length(0) * grid.box.length(1) * grid.box.length(2);
  norm = std::sqrt(8.0 / vol);
  for (int a = 0; a < 3; ++a) {
    const int nn = g.nodes(a);
    sin_t[a].resize(std::size_t(K) * nn);
    cos_t[a].resize(std::size_t(K) * nn);
    for (int k = 1; k <= K; ++k)
      for (int i = 0; i < nn; ++i) {
        // nodes are uniform, so k*pi*x_hat = k*pi*i/n exactly; the basis
        // functions vanish on the walls by construction, so pin the wall
        // entries to exact zero instead of sin(k*pi) rounding noise
        const double arg = pi * double(k) * double(i) / g.n[a];
        sin_t[a][std::size_t(k - 1) * nn + i] =
            (i == 0 || i == g.n[a]) ? 0.0 : std::sin(arg);
        cos_t[a][std::size_t(k - 1) * nn + i] = std::cos(arg);
      }
  }
}

BrownianLattice BrownianLattice::sample(const NoiseSpec& spec,
                                        std::uint64_t sample_id, double T,
                                        int n_fine) {
  if (T <= 0.0) throw std::invalid_argument("BrownianLattice: T > 0 required");
  if (n_fine < 1 || (n_fine & (n_fine - 1)) != 0)
    throw std::invalid_argument(
        "BrownianLattice: n_fine must be a power of two");
  BrownianLattice lat;
  lat.seed = spec.seed;
  lat.sample_id = sample_id;
  lat.K = spec.K;
  lat.n_fine = n_fine;
  lat.T = T;
  const int n_modes = spec.mode_count();
  lat.incr.resize(std::size_t(n_modes) * n_fine);
  const double root_dt = std::sqrt(T / n_fine);
  const auto s_lo = std::uint32_t(sample_id);
  const auto s_hi = std::uint32_t(sample_id >> 32);
  for (int m = 0; m < n_modes; ++m)
    for (int t = 0; t < n_fine; ++t)
      lat.incr[std::size_t(m) * n_fine + t] =
          root_dt * gaussian_at(spec.seed, std::uint32_t(t), std::uint32_t(m),
                                s_lo, s_hi);
  return lat;
}

static double dyadic_sum(const double* p, int len) {
  if (len == 1) return p[0];
  const int half = len / 2;
  return dyadic_sum(p, half) + dyadic_sum(p + half, half);
}

double BrownianLattice::aggregate(int m, int t0, int len) const {
  if (len < 1 || (len & (len - 1)) != 0 || t0 % len != 0 ||
      t0 + len > n_fine || m < 0 || m >= K * K * K)
    throw std::out_of_range("BrownianLattice::aggregate: bad dyadic range");
  return dyadic_sum(incr.data() + std::size_t(m) * n_fine + t0, len);
}

NoiseIncrement make_increment(const BrownianLattice& lat, const ModeBasis& basis,
                              const NoiseSpec& spec, int n_steps, int step) {
  if (lat.K != spec.K || basis.K != spec.K)
    throw std::invalid_argument("make_increment: K mismatch");
  if (n_steps < 1 || lat.n_fine % n_steps != 0)
    throw std::invalid_argument(
        "make_increment: step count does not divide the fine lattice");
  const int ratio = lat.n_fine / n_steps;
  if ((ratio & (ratio - 1)) != 0)
    throw std::invalid_argument("make_increment: non-dyadic level ratio");
  if (step < 0 || step >= n_steps)
    throw std::out_of_range("make_increment: step index");

  NoiseIncrement out;
  out.dt = lat.T / n_steps;
  const int n_modes = spec.mode_count();
  out.db.resize(n_modes);
  for (int m = 0; m < n_modes; ++m)
    out.db[m] = lat.aggregate(m, step * ratio, ratio);
  out.w = synthesize_field(basis, spec, out.db);
  return out;
}

ScalarField synthesize_field(const ModeBasis& basis, const NoiseSpec& spec,
                             const std::vector<double>& coeff) {
  if (int(coeff.size()) != spec.mode_count())
    throw std::invalid_argument("synthesize_field: coefficient count");
  const GridSpec& g = basis.grid;
  ScalarField out(g);
  const int n0 = g.nodes(0), n1 = g.nodes(1), n2 = g.nodes(2);
  for (int k3 = 1; k3 <= spec.K; ++k3)
    for (int k2 = 1; k2 <= spec.K; ++k2)
      for (int k1 = 1; k1 <= spec.K; ++k1) {
        const int m = spec.mode_index(k1, k2, k3);
        const double c =
            basis.norm * std::sqrt(spec.q_of(k1, k2, k3)) * coeff[m];
        if (c == 0.0) continue;
        const double* s1 = &basis.sin_t[0][std::size_t(k1 - 1) * n0];
        const double* s2 = &basis.sin_t[1][std::size_t(k2 - 1) * n1];
        const double* s3 = &basis.sin_t[2][std::size_t(k3 - 1) * n2];
        std::size_t p = 0;
        for (int kk = 0; kk < n2; ++kk) {
          const double c3 = c * s3[kk];
          for (int jj = 0; jj < n1; ++jj) {
            const double c23 = c3 * s2[jj];
            for (int ii = 0; ii < n0; ++ii, ++p) out.v[p] += c23 * s1[ii];
          }
        }
      }
  return out;
}

std::array<ScalarField, 3> synthesize_gradient(
    const ModeBasis& basis, const NoiseSpec& spec,
    const std::vector<double>& coeff) {
  using std::numbers::pi;
  if (int(coeff.size()) != spec.mode_count())
    throw std::invalid_argument("synthesize_gradient: coefficient count");
  const GridSpec& g = basis.grid;
  std::array<ScalarField, 3> out{ScalarField(g), ScalarField(g),
                                 ScalarField(g)};
  const int n0 = g.nodes(0), n1 = g.nodes(1), n2 = g.nodes(2);
  for (int k3 = 1; k3 <= spec.K; ++k3)
    for (int k2 = 1; k2 <= spec.K; ++k2)
      for (int k1 = 1; k1 <= spec.K; ++k1) {
        const int m = spec.mode_index(k1, k2, k3);
        const double c =
            basis.norm * std::sqrt(spec.q_of(k1, k2, k3)) * coeff[m];
        if (c == 0.0) continue;
        const int kk_ax[3] = {k1, k2, k3};
        const double* s[3] = {&basis.sin_t[0][std::size_t(k1 - 1) * n0],
                              &basis.sin_t[1][std::size_t(k2 - 1) * n1],
                              &basis.sin_t[2][std::size_t(k3 - 1) * n2]};
        const double* co[3] = {&basis.cos_t[0][std::size_t(k1 - 1) * n0],
                               &basis.cos_t[1][std::size_t(k2 - 1) * n1],
                               &basis.cos_t[2][std::size_t(k3 - 1) * n2]};
        for (int a = 0; a < 3; ++a) {
          const double ca = c * kk_ax[a] * pi / g.box.length(a);
          std::size_t p = 0;
          for (int z = 0; z < n2; ++z) {
            const double f3 = (a == 2) ? co[2][z] : s[2][z];
            for (int y = 0; y < n1; ++y) {
              const double f23 = f3 * ((a == 1) ? co[1][y] : s[1][y]);
              for (int x = 0; x < n0; ++x, ++p)
                out[a].v[p] += ca * f23 * ((a == 0) ? co[0][x] : s[0][x]);
            }
          }
        }
      }
  return out;
}

void dump_lattice(const BrownianLattice& lat, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw std::runtime_error("dump_lattice: cannot open " + path);
  const std::uint32_t k32 = std::uint32_t(lat.K);
  const std::uint32_t nf32 = std::uint32_t(lat.n_fine);
  bool ok = std::fwrite(&lat.seed, 8, 1, fp) == 1 &&
            std::fwrite(&lat.sample_id, 8, 1, fp) == 1 &&
            std::fwrite(&k32, 4, 1, fp) == 1 &&
            std::fwrite(&nf32, 4, 1, fp) == 1 &&
            std::fwrite(lat.incr.data(), 8, lat.incr.size(), fp) ==
                lat.incr.size();
  ok = std::fclose(fp) == 0 && ok;
  if (!ok) throw std::runtime_error("dump_lattice: short write to " + path);
}

BrownianLattice load_lattice(const std::string& path, double T) {
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw std::runtime_error("load_lattice: cannot open " + path);
  BrownianLattice lat;
  std::uint32_t k32 = 0, nf32 = 0;
  bool ok = std::fread(&lat.seed, 8, 1, fp) == 1 &&
            std::fread(&lat.sample_id, 8, 1, fp) == 1 &&
            std::fread(&k32, 4, 1, fp) == 1 && std::fread(&nf32, 4, 1, fp) == 1;
  if (ok) {
    lat.K = int(k32);
    lat.n_fine = int(nf32);
    lat.T = T;
    lat.incr.resize(std::size_t(lat.K) * lat.K * lat.K * lat.n_fine);
    ok = std::fread(lat.incr.data(), 8, lat.incr.size(), fp) ==
         lat.incr.size();
  }
  std::fclose(fp);
  if (!ok) throw std::runtime_error("load_lattice: truncated file " + path);
  return lat;
}

}  // namespace splitmax
