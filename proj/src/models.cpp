#include "bg2lab/models.hpp"

#include <cmath>

namespace bg2lab {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

// b/(2 n^gamma), the weak-asymmetry amplitude
double half_drift(double b, double gamma, int n) { return 0.5 * b / std::pow(n, gamma); }

}  // namespace

std::string ModelSpec::variant_name() const {
  if (std::holds_alternative<Wasep>(variant)) return "wasep";
  if (std::holds_alternative<Asep>(variant)) return "asep";
  if (std::holds_alternative<SpeedChange>(variant)) return "speedchange";
  return "expchain";
}

ModelSpec ModelSpec::wasep(int n, double a, double rho, double b, double gamma) {
  require(n >= 4, "n must be >= 4");
  require(a > 0, "a must be positive");
  require(rho > 0 && rho < 1, "exclusion density must be in (0,1)");
  require(b >= 0 && gamma > 0, "need b >= 0 and gamma > 0");
  require(half_drift(b, gamma, n) < 0.5, "b/(2 n^gamma) must be < 1/2 so all rates stay positive");
  return ModelSpec{Wasep{b, gamma}, rho, a, n};
}

ModelSpec ModelSpec::asep(int n, double a, double rho, double p) {
  require(n >= 4, "n must be >= 4");
  require(a > 0, "a must be positive");
  require(rho > 0 && rho < 1, "exclusion density must be in (0,1)");
  require(p > 0 && p < 1, "p must be in (0,1)");
  return ModelSpec{Asep{p}, rho, a, n};
}

ModelSpec ModelSpec::speed_change(int n, double a, double rho, double b, double gamma) {
  require(n >= 4, "n must be >= 4");
  require(a > 0, "a must be positive");
  require(rho > 0 && rho < 1, "exclusion density must be in (0,1)");
  require(b >= 0 && gamma > 0, "need b >= 0 and gamma > 0");
  require(half_drift(b, gamma, n) < 0.5, "b/(2 n^gamma) must be < 1/2 so all rates stay positive");
  return ModelSpec{SpeedChange{b, gamma}, rho, a, n};
}

ModelSpec ModelSpec::exp_chain(int n, double a, double gamma, double beta, double lambda) {
  require(n >= 3, "n must be >= 3");
  require(a > 0, "a must be positive");
  require(gamma > 0, "gamma must be positive");
  require(beta > 0, "beta must be positive");
  require(lambda > -1, "lambda must be > -1");
  return ModelSpec{ExpChain{gamma, beta, lambda}, (lambda + 1) / beta, a, n};
}

Moments model_moments(const ModelSpec& m) {
  if (const auto* e = std::get_if<ExpChain>(&m.variant)) {
    const double k = e->lambda + 1;
    return Moments{k / e->beta, k / (e->beta * e->beta), 2 * k / std::pow(e->beta, 3)};
  }
  const double rho = m.rho;
  return Moments{rho, rho * (1 - rho), rho * (1 - rho) * (1 - 2 * rho)};
}

BondRates bond_rates(const ModelSpec& m, const Configuration& c, int z) {
  z = c.site(z);
  const int z1 = c.site(z + 1);
  if (const auto* w = std::get_if<Wasep>(&m.variant)) {
    const double d = half_drift(w->b, w->gamma, m.n);
    return BondRates{(0.5 + d) * c.occ(z) * (1 - c.occ(z1)),
                     (0.5 - d) * c.occ(z1) * (1 - c.occ(z))};
  }
  if (const auto* a = std::get_if<Asep>(&m.variant)) {
    return BondRates{a->p * c.occ(z) * (1 - c.occ(z1)),
                     (1 - a->p) * c.occ(z1) * (1 - c.occ(z))};
  }
  if (const auto* s = std::get_if<SpeedChange>(&m.variant)) {
    const double d = half_drift(s->b, s->gamma, m.n);
    const double factor = c.occ(c.site(z - 1)) + c.occ(c.site(z + 2)) + 1;
    return BondRates{factor * (0.5 + d) * c.occ(z) * (1 - c.occ(z1)),
                     factor * (0.5 - d) * c.occ(z1) * (1 - c.occ(z))};
  }
  const auto& e = std::get<ExpChain>(m.variant);
  return BondRates{e.gamma, 0.0};
}

double bond_intensity(const ModelSpec& m, const Configuration& c, int z) {
  const BondRates r = bond_rates(m, c, z);
  return r.right + r.left;
}

double current(const ModelSpec& m, const Configuration& c, int x) {
  x = c.site(x);
  const int x1 = c.site(x + 1);
  const double rho = m.rho;
  const double chi = model_moments(m).chi;
  if (const auto* w = std::get_if<Wasep>(&m.variant)) {
    const double amp = half_drift(w->b, w->gamma, m.n);
    const int o0 = c.occ(x), o1 = c.occ(x1);
    const double diff = o0 - o1;
    return 0.5 * diff + amp * (diff * diff - 2 * chi);
  }
  if (const auto* a = std::get_if<Asep>(&m.variant)) {
    const int o0 = c.occ(x), o1 = c.occ(x1);
    return a->p * o0 * (1 - o1) - (1 - a->p) * o1 * (1 - o0) - (2 * a->p - 1) * chi;
  }
  if (const auto* s = std::get_if<SpeedChange>(&m.variant)) {
    const double amp = half_drift(s->b, s->gamma, m.n);
    const double factor = c.occ(c.site(x - 1)) + c.occ(c.site(x + 2)) + 1;
    const double diff = c.occ(x) - c.occ(x1);
    return factor * (0.5 * diff + amp * diff * diff) - 2 * amp * chi * (2 * rho + 1);
  }
  const auto& e = std::get<ExpChain>(m.variant);
  const double e0 = c.value(x) - rho, e1 = c.value(x1) - rho;
  return -e0 * e1 - e.gamma * (e1 - e0) - rho * (e0 + e1);
}

CurrentDecomposition current_decomposition(const ModelSpec& m, double rho,
                                           const Configuration& c, int x) {
  x = c.site(x);
  const int x1 = c.site(x + 1);
  const double e0 = c.value(x) - rho, e1 = c.value(x1) - rho;

  if (const auto* w = std::get_if<Wasep>(&m.variant)) {
    if (std::abs(rho - m.rho) > 1e-12)
      throw ValidationError("wasep decomposition: rho must match the model density");
    const double amp = half_drift(w->b, w->gamma, m.n);
    CurrentDecomposition d;
    d.grad_h = 0.5 * (e0 - e1);  // h = eta(0)/2
    d.quad_coeff = -2 * amp;     // C = -b/n^gamma
    d.quad_term = d.quad_coeff * e0 * e1;
    d.g_term = amp * (1 - 2 * rho) * (e0 + e1);
    return d;
  }
  if (const auto* a = std::get_if<Asep>(&m.variant)) {
    if (std::abs(rho - m.rho) > 1e-12)
      throw ValidationError("asep decomposition: rho must match the model density");
    const double p = a->p;
    CurrentDecomposition d;
    d.grad_h = ((1 - p) * (1 - rho) + p * rho) * (e0 - e1);
    d.quad_coeff = -(2 * p - 1);
    d.quad_term = d.quad_coeff * e0 * e1;
    d.g_term = (2 * p - 1) * (1 - 2 * rho) * e0;
    return d;
  }
  if (const auto* s = std::get_if<SpeedChange>(&m.variant)) {
    if (std::abs(rho - rho0_speedchange()) > 1e-12)
      throw ValidationError(
          "speedchange decomposition is only supported at rho0 = (1+sqrt 7)/6; "
          "the linear leftover is a gradient only there");
    if (std::abs(rho - m.rho) > 1e-12)
      throw ValidationError("speedchange decomposition: model density must be rho0");
    const double amp = half_drift(s->b, s->gamma, m.n);
    const int om1 = c.occ(c.site(x - 1)), o0 = c.occ(x), o1 = c.occ(x1),
              o2 = c.occ(c.site(x + 2));
    const double em1 = om1 - rho, e2 = o2 - rho;
    // symmetric part: gradient of h = (eta(-1)eta(0)+eta(0)eta(1)-eta(-1)eta(1)+eta(0))/2
    auto h_sym = [](int a_, int b_, int c_) {
      return 0.5 * (a_ * b_ + b_ * c_ - a_ * c_) + 0.5 * b_;
    };
    const double grad_sym = h_sym(om1, o0, o1) - h_sym(o0, o1, o2);
    // linear leftover at rho0: gradient of phi = -amp*(4 rho^2 - 1)(eta_bar(1)-eta_bar(-1))
    const double alpha = 4 * rho * rho - 1;
    const double grad_lin = -amp * alpha * ((e1 - em1) - (e2 - e0));
    CurrentDecomposition d;
    d.grad_h = grad_sym + grad_lin;
    d.quad_coeff = -2 * amp * (1 + 2 * rho);
    d.quad_term = d.quad_coeff * e0 * e1;
    d.g_term = -amp * (2 * (em1 * e0 * e1 + e0 * e1 * e2) + (2 * rho - 1) * (em1 * e0 + e1 * e2) +
                       (2 * rho - 1) * (em1 * e1 + e0 * e2));
    return d;
  }
  const auto& e = std::get<ExpChain>(m.variant);
  if (std::abs(rho - m.rho) > 1e-12)
    throw ValidationError("expchain decomposition: rho must match the model density");
  CurrentDecomposition d;
  d.grad_h = e.gamma * (e0 - e1);  // h = gamma * eta(0)
  d.quad_coeff = -1.0;
  d.quad_term = -e0 * e1;
  d.g_term = -rho * (e0 + e1);
  return d;
}

std::array<double, 5> speedchange_antisym_terms(const ModelSpec& m, const Configuration& c,
                                                int x, double rho) {
  const auto* s = std::get_if<SpeedChange>(&m.variant);
  if (!s) throw ValidationError("speedchange terms requested for a different variant");
  x = c.site(x);
  const double amp = half_drift(s->b, s->gamma, m.n);
  const double u = c.occ(c.site(x - 1)) - rho;
  const double v = c.occ(x) - rho;
  const double w = c.occ(c.site(x + 1)) - rho;
  const double z = c.occ(c.site(x + 2)) - rho;
  return {
      -amp * 2 * (u * v * w + v * w * z),
      -amp * (2 + 4 * rho) * v * w,
      -amp * (2 * rho - 1) * (u * v + w * z),
      -amp * (2 * rho - 1) * (u * w + v * z),
      -amp * ((4 * rho * rho - 1) * (v + w) + 2 * rho * (rho - 1) * (u + z)),
  };
}

double speedchange_antisym_current(const ModelSpec& m, const Configuration& c, int x,
                                   double rho) {
  const auto* s = std::get_if<SpeedChange>(&m.variant);
  if (!s) throw ValidationError("speedchange current requested for a different variant");
  x = c.site(x);
  const double amp = half_drift(s->b, s->gamma, m.n);
  const double chi = rho * (1 - rho);
  const int diff = c.occ(x) - c.occ(c.site(x + 1));
  const double factor = c.occ(c.site(x - 1)) + c.occ(c.site(x + 2)) + 1;
  return amp * (diff * diff * factor - 2 * chi * (2 * rho + 1));
}

double rho0_speedchange() {
  // positive root of 6 rho^2 - 2 rho - 1; the other root (1 - sqrt 7)/6 < 0
  return (1.0 + std::sqrt(7.0)) / 6.0;
}

std::vector<double> drift_field(const ModelSpec& m, const Configuration& c) {
  if (!std::holds_alternative<ExpChain>(m.variant) || c.kind() != LatticeKind::Energy)
    throw ValidationError("drift_field needs an energy configuration of the exponential chain");
  const int n = c.size();
  std::vector<double> f(static_cast<std::size_t>(n));
  for (int x = 0; x < n; ++x) {
    const double left = c.energy_at(x == 0 ? n - 1 : x - 1);
    const double right = c.energy_at(x + 1 == n ? 0 : x + 1);
    f[static_cast<std::size_t>(x)] = c.energy_at(x) * (right - left);
  }
  return f;
}

Configuration invariant_sample(const ModelSpec& m, Rng& rng) {
  if (const auto* e = std::get_if<ExpChain>(&m.variant)) {
    std::gamma_distribution<double> gamma_law(e->lambda + 1, 1.0 / e->beta);
    std::vector<double> vals(static_cast<std::size_t>(m.n));
    for (auto& v : vals) v = gamma_law(rng);
    return Configuration::energy(std::move(vals));
  }
  Configuration c = Configuration::exclusion(m.n);
  for (int x = 0; x < m.n; ++x)
    if (uniform_double(rng) < m.rho) c.set_occ(x, 1);
  return c;
}

}  // namespace bg2lab
