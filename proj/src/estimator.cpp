#include "bg2lab/estimator.hpp"

#include <cmath>
#include <numbers>

#include "bg2lab/stats.hpp"
#include "bg2lab/worker_pool.hpp"

namespace bg2lab {

double theoretical_bound(double t, int L, int n, double a, double norm_2n, double C) {
  if (t <= 0 || L < 1 || n < 1 || norm_2n < 0)
    throw ValidationError("theoretical_bound needs positive arguments");
  const double na1 = std::pow(static_cast<double>(n), a - 1);
  return C * t * (L / na1 + t * n / (static_cast<double>(L) * L)) * norm_2n;
}

int optimal_block(double t, int n, double a, BlockRule rule) {
  if (t <= 0 || n < 4 || a <= 0) throw ValidationError("optimal_block needs positive arguments");
  double raw;
  if (rule == BlockRule::VarianceMin) {
    raw = std::cbrt(2.0 * t * std::pow(static_cast<double>(n), a));
  } else {
    raw = std::pow(static_cast<double>(n), a / 2.0);
  }
  int L = static_cast<int>(std::llround(raw));
  L = std::max(1, std::min(L, n / 4));
  return L;
}

ScalingReport scaling_fit(std::vector<ScalingPoint> points) {
  if (points.size() < 3) throw ValidationError("scaling fit needs at least 3 points");
  std::vector<double> lx, ly;
  lx.reserve(points.size());
  ly.reserve(points.size());
  for (const auto& p : points) {
    if (!(p.estimate > 0)) throw ValidationError("scaling fit needs positive estimates");
    lx.push_back(std::log(p.x));
    ly.push_back(std::log(p.estimate));
  }
  const LineFit f = ols(lx, ly);
  ScalingReport r;
  r.grid = std::move(points);
  r.fitted_exponent = f.slope;
  r.fit_residual = f.residual_rms;
  return r;
}

namespace {

void require_supported_density(const ModelSpec& m) {
  if (std::holds_alternative<Wasep>(m.variant) || std::holds_alternative<Asep>(m.variant)) {
    if (std::abs(m.rho - 0.5) > 1e-12)
      throw ValidationError("block-replacement experiments for this model run at rho = 1/2");
  } else if (std::holds_alternative<SpeedChange>(m.variant)) {
    if (std::abs(m.rho - rho0_speedchange()) > 1e-12)
      throw ValidationError("block-replacement experiments for speedchange run at rho0");
  }
  // ExpChain runs at its own density.
}

struct ReplicaOut {
  double integral = 0;
  std::uint64_t events = 0;
};

}  // namespace

VarianceEstimate run_bg_variance(const BGExperiment& exp) {
  if (exp.replicas < 2) throw ValidationError("need at least 2 replicas");
  const ModelSpec& m = exp.model;
  require_supported_density(m);
  const int L = exp.L > 0 ? exp.L : optimal_block(exp.t, m.n, m.a);
  if (L > m.n / 4) throw ValidationError("block size L must be in [1, n/4]");
  if (exp.v.size() != m.n) throw ValidationError("weight vector size does not match n");
  const Moments mom = model_moments(m);

  SimOptions opts;
  opts.freeze_rates = exp.frozen;

  const std::function<ReplicaOut(std::size_t)> one = [&](std::size_t i) {
    Rng rng = make_rng(exp.base_seed, i);
    Configuration c = invariant_sample(m, rng);
    ReplicaOut out;
    if (m.is_exclusion()) {
      BgIntegrandObserver obs(c, exp.v, L, mom, exp.degree);
      Observer* list[] = {&obs};
      const SimResult r = simulate_exclusion(m, std::move(c), exp.t, rng, list, opts);
      out.integral = obs.integral();
      out.events = r.clock.event_count;
    } else {
      IntegralObserver obs([&](const Configuration& cc) {
        return bg_integrand(cc, exp.v, L, mom, exp.degree);
      });
      Observer* list[] = {&obs};
      const SimResult r = simulate_pdmp(m, std::move(c), exp.t, rng, list, opts);
      out.integral = obs.value();
      out.events = r.clock.event_count;
    }
    return out;
  };

  const auto outs = run_indexed<ReplicaOut>(static_cast<std::size_t>(exp.replicas), exp.workers, one);

  std::vector<double> squares(outs.size());
  std::uint64_t events = 0;
  for (std::size_t i = 0; i < outs.size(); ++i) {
    squares[i] = outs[i].integral * outs[i].integral;
    events += outs[i].events;
  }
  const MeanSE ms = mean_se(squares);

  VarianceEstimate est;
  est.mean_square = ms.mean;
  est.std_error = ms.se;
  est.replicas = exp.replicas;
  est.L = L;
  est.bound_value = theoretical_bound(exp.t, L, m.n, m.a, exp.v.norm_2n);
  est.events = events;
  return est;
}

TrivialLimitResult trivial_limit_experiment(double p, double a, const TestFunction& H,
                                            const std::vector<int>& n_grid, double t,
                                            int replicas, std::uint64_t base_seed, int workers) {
  if (!(a < 4.0 / 3.0)) throw ValidationError("trivial-limit experiment expects a < 4/3");
  std::vector<ScalingPoint> points;
  for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
    const int n = n_grid[gi];
    const ModelSpec m = ModelSpec::asep(n, a, 0.5, p);
    const WeightVector hv = discretize(H, n, DiscretizeMode::Values);
    const std::uint64_t point_seed = seed_stream(base_seed, 1000003ull + gi);
    const std::function<double(std::size_t)> one = [&](std::size_t i) {
      Rng rng = make_rng(point_seed, i);
      Configuration c = invariant_sample(m, rng);
      const double y0 = fluct_field(c, hv, m.rho);
      const SimResult r = simulate_exclusion(m, std::move(c), t, rng, {});
      const double yt = fluct_field(r.config, hv, m.rho);
      const double d = yt - y0;
      return d * d;
    };
    const auto sq = run_indexed<double>(static_cast<std::size_t>(replicas), workers, one);
    const MeanSE ms = mean_se(sq);
    points.push_back(ScalingPoint{static_cast<double>(n), ms.mean, ms.se});
  }
  TrivialLimitResult res;
  res.report = scaling_fit(std::move(points));
  return res;
}

double ou_covariance_analytic(const TestFunction& H, double t, double nu, double sigma2) {
  // Fourier coefficients by the trapezoid rule on a fine grid; for smooth
  // periodic H this is spectrally accurate.
  constexpr int M = 1 << 13;
  constexpr int K = 256;
  std::vector<double> samples(M);
  for (int j = 0; j < M; ++j) samples[static_cast<std::size_t>(j)] = H(j / static_cast<double>(M));
  const double two_pi = 2.0 * std::numbers::pi;
  double acc = 0;
  for (int k = 0; k <= K; ++k) {
    double re = 0, im = 0;
    for (int j = 0; j < M; ++j) {
      const double ang = two_pi * k * j / M;
      re += samples[static_cast<std::size_t>(j)] * std::cos(ang);
      im += samples[static_cast<std::size_t>(j)] * std::sin(ang);
    }
    re /= M;
    im /= M;
    const double mode_sq = re * re + im * im;
    const double mult = std::exp(-nu * t * two_pi * two_pi * k * k);
    const double term = (k == 0 ? 1.0 : 2.0) * mode_sq * mult;
    acc += term;
    if (k > 4 && term < 1e-18 * std::abs(acc)) break;
  }
  return sigma2 * acc;
}

std::vector<CovariancePoint> ou_covariance_experiment(double b, double gamma, int n,
                                                      const TestFunction& H,
                                                      const std::vector<double>& t_grid,
                                                      int replicas, std::uint64_t base_seed,
                                                      int workers) {
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (t_grid[i] <= t_grid[i - 1]) throw ValidationError("t grid must be strictly increasing");
  const ModelSpec m = ModelSpec::wasep(n, 2.0, 0.5, b, gamma);
  const WeightVector hv = discretize(H, n, DiscretizeMode::Values);
  const double chi = model_moments(m).chi;

  const std::function<std::vector<double>(std::size_t)> one = [&](std::size_t i) {
    Rng rng = make_rng(base_seed, i);
    Configuration c = invariant_sample(m, rng);
    const double y0 = fluct_field(c, hv, m.rho);
    std::vector<double> prods;
    prods.reserve(t_grid.size());
    double t_prev = 0;
    for (double t : t_grid) {
      SimResult r = simulate_exclusion(m, std::move(c), t - t_prev, rng, {});
      c = std::move(r.config);
      prods.push_back(y0 * fluct_field(c, hv, m.rho));
      t_prev = t;
    }
    return prods;
  };
  const auto rows = run_indexed<std::vector<double>>(static_cast<std::size_t>(replicas), workers, one);

  std::vector<CovariancePoint> out;
  for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
    std::vector<double> col(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) col[r] = rows[r][ti];
    const MeanSE ms = mean_se(col);
    CovariancePoint p;
    p.t = t_grid[ti];
    p.estimate = ms.mean;
    p.std_error = ms.se;
    p.analytic = ou_covariance_analytic(H, t_grid[ti], 0.5, chi);
    out.push_back(p);
  }
  return out;
}

EnergyEstimateResult energy_estimate_experiment(double b, int n, const TestFunction& H,
                                                const std::vector<double>& eps_grid,
                                                double t_len, int replicas,
                                                std::uint64_t base_seed, int workers) {
  if (eps_grid.empty()) throw ValidationError("need a nonempty eps grid");
  const ModelSpec m = ModelSpec::wasep(n, 2.0, 0.5, b, 0.5);
  const WeightVector grad = discretize(H, n, DiscretizeMode::Gradient);

  // every needed mollifier width: each eps and its half
  std::vector<double> widths;
  for (double e : eps_grid) {
    widths.push_back(e);
    widths.push_back(e / 2);
  }

  const std::function<std::vector<double>(std::size_t)> one = [&](std::size_t i) {
    Rng rng = make_rng(base_seed, i);
    Configuration c = invariant_sample(m, rng);
    std::vector<MollifiedSquareObserver> obs;
    obs.reserve(widths.size());
    for (double w : widths) obs.emplace_back(c, grad, m.rho, w);
    std::vector<Observer*> list;
    for (auto& o : obs) list.push_back(&o);
    simulate_exclusion(m, std::move(c), t_len, rng, list);
    std::vector<double> dsq(eps_grid.size());
    for (std::size_t k = 0; k < eps_grid.size(); ++k) {
      const double d = obs[2 * k].integral() - obs[2 * k + 1].integral();
      dsq[k] = d * d;
    }
    return dsq;
  };
  const auto rows = run_indexed<std::vector<double>>(static_cast<std::size_t>(replicas), workers, one);

  EnergyEstimateResult res;
  std::vector<ScalingPoint> pts;
  for (std::size_t k = 0; k < eps_grid.size(); ++k) {
    std::vector<double> col(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) col[r] = rows[r][k];
    const MeanSE ms = mean_se(col);
    res.points.push_back(EnergyEstimatePoint{eps_grid[k], ms.mean, ms.se});
    pts.push_back(ScalingPoint{eps_grid[k], ms.mean, ms.se});
  }
  res.report = scaling_fit(std::move(pts));
  return res;
}

QvResult quadratic_variation_diagnostic(double b, int n, const TestFunction& H, double eps,
                                        double t_len, const std::vector<int>& m_grid,
                                        int replicas, std::uint64_t base_seed, int workers,
                                        bool frozen) {
  if (m_grid.empty()) throw ValidationError("need a nonempty partition grid");
  int m_max = 0;
  for (int m : m_grid) {
    if (m < 2 || (m & (m - 1)) != 0)
      throw ValidationError("partition counts must be powers of two >= 2");
    m_max = std::max(m_max, m);
  }
  const ModelSpec model = ModelSpec::wasep(n, 2.0, 0.5, b, 0.5);
  const WeightVector grad = discretize(H, n, DiscretizeMode::Gradient);
  SimOptions opts;
  opts.freeze_rates = frozen;

  // one trajectory per replica; checkpoint B at the finest partition and
  // aggregate the coarser sums from it
  const std::function<std::vector<double>(std::size_t)> one = [&](std::size_t i) {
    Rng rng = make_rng(base_seed, i);
    Configuration c = invariant_sample(model, rng);
    MollifiedSquareObserver obs(c, grad, model.rho, eps);
    Observer* list[] = {&obs};
    std::vector<double> checkpoints(static_cast<std::size_t>(m_max) + 1, 0.0);
    for (int k = 1; k <= m_max; ++k) {
      SimResult r = simulate_exclusion(model, std::move(c), t_len / m_max, rng, list, opts);
      c = std::move(r.config);
      checkpoints[static_cast<std::size_t>(k)] = obs.integral();
    }
    std::vector<double> sums(m_grid.size(), 0.0);
    for (std::size_t g = 0; g < m_grid.size(); ++g) {
      const int stride = m_max / m_grid[g];
      for (int i2 = 0; i2 < m_grid[g]; ++i2) {
        const double d = checkpoints[static_cast<std::size_t>((i2 + 1) * stride)] -
                         checkpoints[static_cast<std::size_t>(i2 * stride)];
        sums[g] += d * d;
      }
    }
    return sums;
  };
  const auto rows = run_indexed<std::vector<double>>(static_cast<std::size_t>(replicas), workers, one);

  QvResult res;
  std::vector<ScalingPoint> pts;
  for (std::size_t g = 0; g < m_grid.size(); ++g) {
    std::vector<double> col(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) col[r] = rows[r][g];
    const MeanSE ms = mean_se(col);
    res.points.push_back(QvPoint{m_grid[g], ms.mean, ms.se});
    pts.push_back(ScalingPoint{static_cast<double>(m_grid[g]), ms.mean, ms.se});
  }
  res.report = scaling_fit(std::move(pts));
  return res;
}

}  // namespace bg2lab
