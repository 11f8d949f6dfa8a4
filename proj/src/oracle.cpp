#include "bg2lab/oracle.hpp"

#include <cmath>

namespace bg2lab {

namespace {

Configuration config_from_mask(int mask, int n) {
  Configuration c = Configuration::exclusion(n);
  for (int x = 0; x < n; ++x)
    if (mask & (1 << x)) c.set_occ(x, 1);
  return c;
}

int swap_mask(int mask, int z, int n) {
  const int z1 = (z + 1) % n;
  const int bz = (mask >> z) & 1, bz1 = (mask >> z1) & 1;
  if (bz == bz1) return mask;
  return mask ^ (1 << z) ^ (1 << z1);
}

}  // namespace

Configuration SmallSystem::state_config(int s) const { return config_from_mask(s, n); }

void SmallSystem::apply(const std::vector<double>& x, std::vector<double>& y,
                        bool transpose) const {
  y.assign(static_cast<std::size_t>(num_states), 0.0);
  for (int s = 0; s < num_states; ++s) {
    const auto su = static_cast<std::size_t>(s);
    y[su] += diag[su] * x[su];  // diagonal is symmetric either way
    for (std::uint32_t k = row_begin[su]; k < row_begin[su + 1]; ++k) {
      const std::size_t c = col[k];
      if (transpose)
        y[c] += rate[k] * x[su];
      else
        y[su] += rate[k] * x[c];
    }
  }
}

SmallSystem build_generator(const ModelSpec& m) {
  if (!m.is_exclusion()) throw ValidationError("the oracle covers the exclusion models only");
  if (m.n > 12) throw ValidationError("oracle state space too large: n must be <= 12");
  SmallSystem sys;
  sys.model = m;
  sys.n = m.n;
  sys.num_states = 1 << m.n;
  sys.row_begin.assign(static_cast<std::size_t>(sys.num_states) + 1, 0);
  sys.diag.assign(static_cast<std::size_t>(sys.num_states), 0.0);
  sys.pi.assign(static_cast<std::size_t>(sys.num_states), 0.0);

  // G[s, s'] = rate of the unique exchange mapping s to s'; both directed
  // moves across a bond realize the same swap, so their rates add.
  std::vector<std::uint32_t> cols;
  std::vector<double> rates;
  for (int s = 0; s < sys.num_states; ++s) {
    const Configuration c = config_from_mask(s, m.n);
    double out_rate = 0;
    for (int z = 0; z < m.n; ++z) {
      const int s2 = swap_mask(s, z, m.n);
      if (s2 == s) continue;
      const BondRates r = bond_rates(m, c, z);
      const double w = r.right + r.left;
      if (w == 0) continue;
      cols.push_back(static_cast<std::uint32_t>(s2));
      rates.push_back(w);
      out_rate += w;
    }
    sys.diag[static_cast<std::size_t>(s)] = -out_rate;
    sys.row_begin[static_cast<std::size_t>(s) + 1] = static_cast<std::uint32_t>(cols.size());

    const int particles = __builtin_popcount(static_cast<unsigned>(s));
    sys.pi[static_cast<std::size_t>(s)] =
        std::exp(particles * std::log(m.rho) + (m.n - particles) * std::log(1 - m.rho));
  }
  sys.col = std::move(cols);
  sys.rate = std::move(rates);
  return sys;
}

double stationarity_check(const SmallSystem& sys) {
  std::vector<double> r;
  sys.apply(sys.pi, r, /*transpose=*/true);
  double worst = 0;
  for (double x : r) worst = std::max(worst, std::abs(x));
  return worst;
}

double row_sum_max(const SmallSystem& sys) {
  double worst = 0;
  for (int s = 0; s < sys.num_states; ++s) {
    const auto su = static_cast<std::size_t>(s);
    double sum = sys.diag[su];
    for (std::uint32_t k = sys.row_begin[su]; k < sys.row_begin[su + 1]; ++k) sum += sys.rate[k];
    worst = std::max(worst, std::abs(sum));
  }
  return worst;
}

std::vector<double> state_vector(const SmallSystem& sys,
                                 const std::function<double(const Configuration&)>& f) {
  std::vector<double> v(static_cast<std::size_t>(sys.num_states));
  for (int s = 0; s < sys.num_states; ++s) v[static_cast<std::size_t>(s)] = f(sys.state_config(s));
  return v;
}

double exact_correlation(const SmallSystem& sys, std::vector<double> f, double s_micro,
                         bool* centered_flag) {
  const std::size_t N = static_cast<std::size_t>(sys.num_states);
  if (f.size() != N) throw ValidationError("state functional has the wrong size");
  if (s_micro < 0) throw ValidationError("time must be nonnegative");

  double mean = 0, fmax = 0;
  for (std::size_t s = 0; s < N; ++s) {
    mean += sys.pi[s] * f[s];
    fmax = std::max(fmax, std::abs(f[s]));
  }
  const bool needs_centering = std::abs(mean) > 1e-13 * std::max(1.0, fmax);
  if (centered_flag) *centered_flag = needs_centering;
  for (double& x : f) x -= mean;

  double lambda = 0;  // uniformization rate
  for (double d : sys.diag) lambda = std::max(lambda, -d);
  auto dot_pi_f = [&](const std::vector<double>& u) {
    double acc = 0;
    for (std::size_t s = 0; s < N; ++s) acc += sys.pi[s] * f[s] * u[s];
    return acc;
  };
  if (lambda == 0 || s_micro == 0) return dot_pi_f(f);

  // e^{sG} f = sum_k Pois(k; lambda s) P^k f with P = I + G/lambda
  const double mu = lambda * s_micro;
  std::vector<double> v = f, gv(N), u(N, 0.0);
  double logw = -mu;  // log Poisson weight, k = 0
  double tail = 1.0;  // remaining Poisson mass
  const int k_max = static_cast<int>(mu + 12 * std::sqrt(mu + 1) + 60);
  for (int k = 0;; ++k) {
    const double w = std::exp(logw);
    for (std::size_t s = 0; s < N; ++s) u[s] += w * v[s];
    tail -= w;
    if ((tail < 1e-14 && k >= mu) || k >= k_max) break;
    sys.apply(v, gv, /*transpose=*/false);
    for (std::size_t s = 0; s < N; ++s) v[s] += gv[s] / lambda;
    logw += std::log(mu) - std::log1p(k);  // advance to k+1
  }
  return dot_pi_f(u);
}

namespace {

struct SimpsonContext {
  const std::function<double(double)>& f;
  int evals = 0;
  int max_evals = 200000;
};

double adaptive_simpson(SimpsonContext& ctx, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = ctx.f(lm), frm = ctx.f(rm);
  ctx.evals += 2;
  if (ctx.evals > ctx.max_evals)
    throw AccuracyError("adaptive quadrature did not converge within the evaluation budget");
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15 * tol) return left + right + delta / 15;
  return adaptive_simpson(ctx, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         adaptive_simpson(ctx, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  SimpsonContext ctx{f};
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  ctx.evals = 3;
  const double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  const double scale = std::max({std::abs(whole), std::abs(fa) * (b - a), 1e-300});
  return adaptive_simpson(ctx, a, b, fa, fm, fb, whole, rel_tol * scale, 40);
}

}  // namespace

double exact_time_variance(const SmallSystem& sys, std::vector<double> f, double t_macro,
                           double a) {
  if (t_macro < 0) throw ValidationError("time must be nonnegative");
  if (t_macro == 0) return 0;
  const double na = std::pow(static_cast<double>(sys.n), a);
  const auto corr = [&](double s) { return exact_correlation(sys, f, s * na); };
  const auto integrand = [&](double s) { return (t_macro - s) * corr(s); };
  return 2.0 * integrate(integrand, 0.0, t_macro, 1e-8);
}

double dirichlet_form(const SmallSystem& sys, const std::vector<double>& f) {
  std::vector<double> gf;
  sys.apply(f, gf, /*transpose=*/false);
  double acc = 0;
  for (int s = 0; s < sys.num_states; ++s) {
    const auto su = static_cast<std::size_t>(s);
    acc -= sys.pi[su] * f[su] * gf[su];
  }
  return acc;
}

double bond_energy(const SmallSystem& sys, const std::vector<double>& f, int z) {
  double acc = 0;
  for (int s = 0; s < sys.num_states; ++s) {
    const int s2 = swap_mask(s, z, sys.n);
    if (s2 == s) continue;
    const Configuration c = sys.state_config(s);
    const Configuration c2 = sys.state_config(s2);
    const double r1 = bond_intensity(sys.model, c, z);
    const double r2 = bond_intensity(sys.model, c2, z);
    const double grad = f[static_cast<std::size_t>(s2)] - f[static_cast<std::size_t>(s)];
    acc += sys.pi[static_cast<std::size_t>(s)] * 0.25 * (r1 + r2) * grad * grad;
  }
  return acc;
}

}  // namespace bg2lab
