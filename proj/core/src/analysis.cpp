#include "splitmax/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace splitmax {

static double pairwise_sum(const double* p, std::size_t len) {
  if (len == 1) return p[0];
  if (len == 2) return p[0] + p[1];
  const std::size_t half = len / 2;
  return pairwise_sum(p, half) + pairwise_sum(p + half, len - half);
}

MeanStderr mc_aggregate(const std::vector<double>& xs) {
  const std::size_t m = xs.size();
  if (m < 2) throw std::invalid_argument("mc_aggregate: need M >= 2 samples");
  // Fold over a sorted copy so the pairing tree is canonical: the result is
  // bitwise identical no matter how the samples were ordered on arrival.
  std::vector<double> s(xs);
  std::sort(s.begin(), s.end());
  MeanStderr r;
  r.mean = pairwise_sum(s.data(), m) / double(m);
  std::vector<double> dev(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double d = s[i] - r.mean;
    dev[i] = d * d;
  }
  const double var = pairwise_sum(dev.data(), m) / double(m - 1);
  r.se = std::sqrt(var / double(m));
  return r;
}

std::pair<double, double> fit_order(
    const std::vector<std::pair<double, double>>& tau_ms) {
  if (tau_ms.size() < 3)
    throw std::invalid_argument("fit_order: need >= 3 ladder points");
  const std::size_t n = tau_ms.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [tau, ms] : tau_ms) {
    if (!(ms > 0.0) || !(tau > 0.0))
      throw std::invalid_argument("fit_order: nonpositive ladder value");
    const double x = std::log(tau);
    const double y = 0.5 * std::log(ms);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double det = double(n) * sxx - sx * sx;
  if (std::abs(det) < 1e-14)
    throw std::invalid_argument("fit_order: degenerate abscissae");
  const double p = (double(n) * sxy - sx * sy) / det;
  const double a = (sy - p * sx) / double(n);
  double resid = 0.0;
  for (const auto& [tau, ms] : tau_ms) {
    const double d = 0.5 * std::log(ms) - (a + p * std::log(tau));
    resid = std::max(resid, std::abs(d));
  }
  return {p, resid};
}

void parallel_samples(int M, int workers, const std::function<void(int)>& fn) {
  if (M <= 0) return;
  if (workers <= 0) workers = int(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = std::min(workers, M);
  if (workers == 1) {
    for (int s = 0; s < M; ++s) fn(s);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const int s = next.fetch_add(1);
        if (s >= M) return;
        try {
          fn(s);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

static void validate_setup(const StudySetup& s) {
  if (s.samples < 8)
    throw std::invalid_argument(
        "convergence study: insufficient samples (M < 8)");
  if (s.ladder.empty())
    throw std::invalid_argument("convergence study: empty tau ladder");
  for (std::size_t i = 0; i < s.ladder.size(); ++i) {
    if (s.ladder[i] < 0)
      throw std::invalid_argument("convergence study: negative exponent");
    if (i > 0 && s.ladder[i] <= s.ladder[i - 1])
      throw std::invalid_argument(
          "convergence study: ladder must be dyadically decreasing in tau");
  }
  if (s.ref_exp <= s.ladder.back())
    throw std::invalid_argument(
        "convergence study: reference tau must be finer than the ladder");
  if (!(s.T > 0.0)) throw std::invalid_argument("convergence study: T > 0");
}

std::vector<ConvergenceReport> convergence_study(
    const StudySetup& setup, const std::vector<Scheme>& schemes, int workers) {
  validate_setup(setup);
  if (schemes.empty())
    throw std::invalid_argument("convergence_study: no schemes");

  const int n_ref = 1 << setup.ref_exp;
  const int M = setup.samples;
  const StateZ z0 = make_preset_state(setup.grid, setup.preset, setup.mode_k);

  // diffs[sample][scheme][rung][local step]
  std::vector<std::vector<std::vector<std::vector<double>>>> diffs(M);

  // engines are shared, read-only
  std::vector<SplitStepper> steppers;
  for (Scheme s : schemes)
    steppers.emplace_back(setup.grid, setup.noise,
                          StepperConfig{s, setup.order});
  const SplitStepper ref_stepper(setup.grid, setup.noise,
                                 StepperConfig{Scheme::Exact, setup.order});

  parallel_samples(M, workers, [&](int sample) {
    const BrownianLattice lat = BrownianLattice::sample(
        setup.noise, std::uint64_t(sample), setup.T, n_ref);

    // advance the reference and every rung of every scheme in lockstep so no
    // reference snapshot needs to be stored
    auto& mine = diffs[sample];
    mine.resize(schemes.size());
    std::vector<std::vector<StateZ>> z(schemes.size());
    for (std::size_t si = 0; si < schemes.size(); ++si) {
      mine[si].resize(setup.ladder.size());
      z[si].assign(setup.ladder.size(), z0);
      for (std::size_t ri = 0; ri < setup.ladder.size(); ++ri)
        mine[si][ri].resize((1 << setup.ladder[ri]) + 1, 0.0);
    }
    StateZ zref = z0;
    StateZ d(setup.grid);

    for (int f = 0; f < n_ref; ++f) {
      const NoiseIncrement rinc =
          make_increment(lat, ref_stepper.basis(), setup.noise, n_ref, f);
      ref_stepper.one_step(zref, rinc);
      for (std::size_t ri = 0; ri < setup.ladder.size(); ++ri) {
        const int n_steps = 1 << setup.ladder[ri];
        const int stride = n_ref / n_steps;
        if ((f + 1) % stride != 0) continue;
        const int n = (f + 1) / stride - 1;
        const NoiseIncrement incr =
            make_increment(lat, ref_stepper.basis(), setup.noise, n_steps, n);
        for (std::size_t si = 0; si < schemes.size(); ++si) {
          steppers[si].one_step(z[si][ri], incr);
          for (int c = 0; c < 6; ++c)
            for (std::size_t pp = 0; pp < d.f[c].v.size(); ++pp)
              d.f[c].v[pp] = z[si][ri].f[c].v[pp] - zref.f[c].v[pp];
          mine[si][ri][n + 1] = inner_l2(d, d);
        }
      }
    }
  });

  std::vector<ConvergenceReport> reports(schemes.size());
  std::vector<double> buf(M);
  for (std::size_t si = 0; si < schemes.size(); ++si) {
    ConvergenceReport& rep = reports[si];
    rep.scheme = schemes[si];
    rep.samples = M;
    for (std::size_t ri = 0; ri < setup.ladder.size(); ++ri) {
      const int e = setup.ladder[ri];
      const int n_steps = 1 << e;
      ConvergencePoint pt;
      pt.tau = setup.T / double(n_steps);
      pt.ms = -1.0;
      pt.se = 0.0;
      for (int n = 1; n <= n_steps; ++n) {
        for (int s = 0; s < M; ++s) buf[s] = diffs[s][si][ri][n];
        const MeanStderr agg = mc_aggregate(buf);
        if (agg.mean > pt.ms) {
          pt.ms = agg.mean;
          pt.se = agg.se;
        }
      }
      rep.points.push_back(pt);
    }
    std::vector<std::pair<double, double>> tau_ms;
    for (const auto& pt : rep.points) tau_ms.emplace_back(pt.tau, pt.ms);
    if (tau_ms.size() >= 3) {
      const auto [p, resid] = fit_order(tau_ms);
      rep.p = p;
      rep.residual = resid;
    }
  }
  return reports;
}

std::pair<double, double> ms_error(const StudySetup& setup, Scheme scheme,
                                   int ladder_exp, int workers) {
  StudySetup s = setup;
  s.ladder = {ladder_exp};
  const auto reports = convergence_study(s, {scheme}, workers);
  return {reports[0].points[0].ms, reports[0].points[0].se};
}

EnergySeries energy_study(const GridSpec& grid, const NoiseSpec& noise,
                          const StepperConfig& cfg, const StateZ& z0, double T,
                          int n_steps, int M, int workers) {
  if (M < 2) throw std::invalid_argument("energy_study: M >= 2");
  int n_fine = 1;
  while (n_fine < n_steps) n_fine <<= 1;
  if (n_fine != n_steps)
    throw std::invalid_argument("energy_study: n_steps must be a power of two");

  const SplitStepper st(grid, noise, cfg);
  std::vector<std::vector<double>> energies(M);
  parallel_samples(M, workers, [&](int sample) {
    const BrownianLattice lat =
        BrownianLattice::sample(noise, std::uint64_t(sample), T, n_steps);
    TrajectoryOptions opt;
    opt.energy_stride = 1;
    energies[sample] = st.run_trajectory(z0, n_steps, lat, opt).energy;
  });

  EnergySeries out;
  const double e0 = inner_l2(z0, z0);
  const double rate = lambda_sq_total(noise) * trace_q(noise);
  std::vector<double> buf(M);
  for (int n = 0; n <= n_steps; ++n) {
    const double t = T * n / n_steps;
    for (int s = 0; s < M; ++s) buf[s] = energies[s][n];
    const MeanStderr agg = mc_aggregate(buf);
    out.t.push_back(t);
    out.mean.push_back(agg.mean);
    out.se.push_back(agg.se);
    out.predicted.push_back(e0 + t * rate);
  }
  return out;
}

SubflowEnergyPoint subflow_energy_trial(const GridSpec& grid,
                                        const NoiseSpec& noise,
                                        const StateZ& z0, double tau, int stage,
                                        int M, int workers) {
  if (stage < 1 || stage > 3)
    throw std::out_of_range("subflow_energy_trial: stage");
  const SubflowEngine engine(grid);
  const ModeBasis basis(grid, noise.K);
  std::vector<double> vals(M);
  parallel_samples(M, workers, [&](int sample) {
    const BrownianLattice lat =
        BrownianLattice::sample(noise, std::uint64_t(sample), tau, 1);
    const NoiseIncrement incr = make_increment(lat, basis, noise, 1, 0);
    StateZ z = z0;
    engine.sub_flow(z, stage, Scheme::Exact, tau, noise, incr.w);
    vals[sample] = inner_l2(z, z);
  });
  SubflowEnergyPoint pt;
  pt.stage = stage;
  pt.measured = mc_aggregate(vals);
  pt.predicted =
      inner_l2(z0, z0) + tau * lambda_sq_stage(noise, stage) * trace_q(noise);
  return pt;
}

DivergenceSeries divergence_residual(const SplitStepper& st, const StateZ& z0,
                                     const BrownianLattice& lat, int n_steps,
                                     int record_stride) {
  if (record_stride < 1)
    throw std::invalid_argument("divergence_residual: record_stride >= 1");
  if (n_steps < 1 || lat.n_fine % n_steps != 0)
    throw std::invalid_argument(
        "divergence_residual: steps do not replay the lattice");

  const NoiseSpec& spec = st.noise();
  const ModeBasis& basis = st.basis();
  DivergenceSeries out;
  const ScalarField div0 = discrete_div(z0.f[E1], z0.f[E2], z0.f[E3]);
  std::vector<double> bcoef(spec.mode_count(), 0.0);
  StateZ z = z0;

  out.t.push_back(0.0);
  out.resid.push_back(0.0);  // exact by construction at t=0

  for (int n = 0; n < n_steps; ++n) {
    const NoiseIncrement incr = make_increment(lat, basis, spec, n_steps, n);
    st.one_step(z, incr);
    for (int m = 0; m < spec.mode_count(); ++m) bcoef[m] += incr.db[m];
    if ((n + 1) % record_stride == 0 || n + 1 == n_steps) {
      const std::array<ScalarField, 3> grad =
          synthesize_gradient(basis, spec, bcoef);
      ScalarField resid = discrete_div(z.f[E1], z.f[E2], z.f[E3]);
      for (std::size_t p = 0; p < resid.v.size(); ++p)
        resid.v[p] -= div0.v[p] + spec.lambda1[0] * grad[0].v[p] +
                      spec.lambda1[1] * grad[1].v[p] +
                      spec.lambda1[2] * grad[2].v[p];
      out.t.push_back(lat.T * (n + 1) / n_steps);
      out.resid.push_back(norm_l2_scalar(resid));
    }
  }
  return out;
}

}  // namespace splitmax
