#include "bg2lab/kernel.hpp"

#include <cmath>
#include <cstdlib>

#include "bg2lab/fenwick.hpp"

namespace bg2lab {

namespace {

// Flattened rate parameters so the hot loop avoids the variant dispatch.
struct RateParams {
  enum Kind { kWasep, kAsep, kSpeedChange } kind;
  double p_right, p_left;  // per-direction base rates
  int update_radius;       // bonds within this distance of a swap change rate
};

RateParams flatten(const ModelSpec& m) {
  if (const auto* w = std::get_if<Wasep>(&m.variant)) {
    const double d = 0.5 * w->b / std::pow(m.n, w->gamma);
    return RateParams{RateParams::kWasep, 0.5 + d, 0.5 - d, 1};
  }
  if (const auto* a = std::get_if<Asep>(&m.variant)) {
    return RateParams{RateParams::kAsep, a->p, 1 - a->p, 1};
  }
  const auto& s = std::get<SpeedChange>(m.variant);
  const double d = 0.5 * s.b / std::pow(m.n, s.gamma);
  return RateParams{RateParams::kSpeedChange, 0.5 + d, 0.5 - d, 2};
}

inline void local_rates(const RateParams& rp, const Configuration& c, int n, int z,
                        double& right, double& left) {
  const int z1 = z + 1 == n ? 0 : z + 1;
  const int o0 = c.occ(z), o1 = c.occ(z1);
  if (o0 == o1) {
    right = left = 0;
    return;
  }
  double factor = 1;
  if (rp.kind == RateParams::kSpeedChange) {
    const int zm1 = z == 0 ? n - 1 : z - 1;
    const int z2 = z1 + 1 == n ? 0 : z1 + 1;
    factor = c.occ(zm1) + c.occ(z2) + 1;
  }
  right = o0 ? factor * rp.p_right : 0.0;
  left = o1 ? factor * rp.p_left : 0.0;
}

}  // namespace

SimResult simulate_exclusion(const ModelSpec& m, Configuration config, double horizon,
                             Rng& rng, std::span<Observer* const> observers,
                             const SimOptions& opts) {
  if (!m.is_exclusion() || config.kind() != LatticeKind::Exclusion)
    throw ValidationError("simulate_exclusion needs an exclusion model and configuration");
  if (config.size() != m.n) throw ValidationError("configuration size does not match model n");
  if (horizon < 0) throw ValidationError("horizon must be nonnegative");

  const int n = m.n;
  const RateParams rp = flatten(m);
  const double n_a = std::pow(static_cast<double>(n), m.a);
  const double inv_na = 1.0 / n_a;
  const double horizon_micro = horizon * n_a;

  FenwickTree rates;
  rates.init(2 * n);
  if (!opts.freeze_rates) {
    for (int z = 0; z < n; ++z) {
      double r, l;
      local_rates(rp, config, n, z, r, l);
      rates.set(2 * z, r);
      rates.set(2 * z + 1, l);
    }
  }

  SimResult res;
  res.clock = SimClock{};
  double t_micro = 0;
  bool absorbed = false;

  while (true) {
    const double total = rates.total();
    if (total <= 0.0) {
      absorbed = !opts.freeze_rates;
      break;
    }
    const double dt_micro = exponential(rng, total);
    if (t_micro + dt_micro >= horizon_micro) break;
    t_micro += dt_micro;
    for (Observer* o : observers) o->on_dwell(config, dt_micro * inv_na);

    const int leaf = rates.sample(uniform_double(rng) * total);
    const int bond = leaf >> 1;
    for (Observer* o : observers) o->on_exchange(config, bond);
    config.swap_sites(bond);
    ++res.clock.event_count;

    for (int dz = -rp.update_radius; dz <= rp.update_radius; ++dz) {
      const int w = config.site(bond + dz);
      double r, l;
      local_rates(rp, config, n, w, r, l);
      rates.set(2 * w, r);
      rates.set(2 * w + 1, l);
    }
    if (opts.max_events && res.clock.event_count >= opts.max_events) {
      res.clock.macro_time = t_micro * inv_na;
      res.clock.micro_time = t_micro;
      res.config = std::move(config);
      for (Observer* o : observers) o->on_finish(res.clock.macro_time);
      return res;
    }
  }

  // remaining dwell up to the horizon (for an absorbing state this is exact:
  // the state can never change again)
  const double rest = horizon_micro - t_micro;
  if (rest > 0)
    for (Observer* o : observers) o->on_dwell(config, rest * inv_na);

  res.clock.macro_time = horizon;
  res.clock.micro_time = horizon_micro;
  res.config = std::move(config);
  res.absorbed = absorbed;
  for (Observer* o : observers) o->on_finish(horizon);
  return res;
}

namespace {

// One RK4 step of the drift ODE d eta_x/dt = eta_x (eta_{x+1} - eta_{x-1}).
// Mass is a linear invariant, so any Runge-Kutta step conserves it up to
// rounding; positivity is the quantity to watch.
class DriftStepper {
 public:
  explicit DriftStepper(int n) : n_(n), k1_(st(n)), k2_(st(n)), k3_(st(n)), k4_(st(n)), tmp_(st(n)) {}

  void rhs(const std::vector<double>& v, std::vector<double>& out) const {
    const int n = n_;
    for (int x = 0; x < n; ++x) {
      const double left = v[static_cast<std::size_t>(x == 0 ? n - 1 : x - 1)];
      const double right = v[static_cast<std::size_t>(x + 1 == n ? 0 : x + 1)];
      out[static_cast<std::size_t>(x)] = v[static_cast<std::size_t>(x)] * (right - left);
    }
  }

  void step(std::vector<double>& v, double h) {
    const std::size_t n = v.size();
    rhs(v, k1_);
    axpy(v, k1_, 0.5 * h);
    rhs(tmp_, k2_);
    axpy(v, k2_, 0.5 * h);
    rhs(tmp_, k3_);
    axpy(v, k3_, h);
    rhs(tmp_, k4_);
    for (std::size_t i = 0; i < n; ++i)
      v[i] += h / 6.0 * (k1_[i] + 2 * k2_[i] + 2 * k3_[i] + k4_[i]);
  }

 private:
  static std::size_t st(int n) { return static_cast<std::size_t>(n); }
  void axpy(const std::vector<double>& v, const std::vector<double>& k, double c) {
    for (std::size_t i = 0; i < v.size(); ++i) tmp_[i] = v[i] + c * k[i];
  }
  int n_;
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace

SimResult simulate_pdmp(const ModelSpec& m, Configuration config, double horizon, Rng& rng,
                        std::span<Observer* const> observers, const SimOptions& opts) {
  const auto* chain = std::get_if<ExpChain>(&m.variant);
  if (!chain || config.kind() != LatticeKind::Energy)
    throw ValidationError("simulate_pdmp needs the exponential chain and an energy configuration");
  if (config.size() != m.n) throw ValidationError("configuration size does not match model n");

  const int n = m.n;
  const double n_a = std::pow(static_cast<double>(n), m.a);
  const double inv_na = 1.0 / n_a;
  const double horizon_micro = horizon * n_a;
  const double event_rate = chain->gamma * n;

  DriftStepper stepper(n);
  std::vector<double>& vals = config.raw_energies();
  const double mass0 = config.total_mass();

  SimResult res;
  double t_micro = 0;

  auto flow_segment = [&](double span) {
    if (span <= 0) return;
    if (opts.disable_drift) {
      for (Observer* o : observers) o->on_dwell(config, span * inv_na);
      return;
    }
    // even number of RK4 substeps so the Simpson weights 1,4,2,...,4,1 close
    int steps = static_cast<int>(std::ceil(span / opts.h_max));
    steps += steps & 1;
    if (steps < 2) steps = 2;
    const double h = span / steps;
    const double w_end = h / 3.0 * inv_na;
    for (int j = 0; j <= steps; ++j) {
      double w = (j == 0 || j == steps) ? w_end : (j & 1 ? 4 * w_end : 2 * w_end);
      for (Observer* o : observers) o->on_dwell(config, w);
      if (j < steps) {
        stepper.step(vals, h);
        for (double v : vals)
          if (!(v > 0))
            throw AccuracyError("drift integrator lost positivity; reduce h_max");
      }
    }
    const double drift = std::abs(config.total_mass() - mass0) / mass0;
    if (drift > opts.mass_tol * std::max(1.0, t_micro + span))
      throw AccuracyError("energy drift beyond tolerance; reduce h_max");
  };

  while (true) {
    const double tau = opts.freeze_rates ? horizon_micro + 1 : exponential(rng, event_rate);
    if (t_micro + tau >= horizon_micro) {
      flow_segment(horizon_micro - t_micro);
      break;
    }
    flow_segment(tau);
    t_micro += tau;
    const int bond = static_cast<int>(uniform_double(rng) * n);
    for (Observer* o : observers) o->on_exchange(config, bond < n ? bond : n - 1);
    config.swap_sites(bond < n ? bond : n - 1);
    ++res.clock.event_count;
    if (opts.max_events && res.clock.event_count >= opts.max_events) {
      res.clock.macro_time = t_micro * inv_na;
      res.clock.micro_time = t_micro;
      res.config = std::move(config);
      for (Observer* o : observers) o->on_finish(res.clock.macro_time);
      return res;
    }
  }

  res.clock.macro_time = horizon;
  res.clock.micro_time = horizon_micro;
  res.config = std::move(config);
  for (Observer* o : observers) o->on_finish(horizon);
  return res;
}

SimResult simulate(const ModelSpec& m, Configuration config, double horizon, Rng& rng,
                   std::span<Observer* const> observers, const SimOptions& opts) {
  return m.is_exclusion() ? simulate_exclusion(m, std::move(config), horizon, rng, observers, opts)
                          : simulate_pdmp(m, std::move(config), horizon, rng, observers, opts);
}

}  // namespace bg2lab
