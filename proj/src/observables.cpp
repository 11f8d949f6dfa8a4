#include "bg2lab/observables.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace bg2lab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap01(double u) {
  double w = u - std::floor(u);
  return w >= 1.0 ? 0.0 : w;
}

int mod(int x, int n) {
  int m = x % n;
  return m < 0 ? m + n : m;
}

}  // namespace

TestFunction TestFunction::constant(double c) {
  return TestFunction("const", [c](double) { return c; });
}

TestFunction TestFunction::sine(int k) {
  return TestFunction("sin:" + std::to_string(k),
                      [k](double u) { return std::sin(kTwoPi * k * u); });
}

TestFunction TestFunction::cosine(int k) {
  return TestFunction("cos:" + std::to_string(k),
                      [k](double u) { return std::cos(kTwoPi * k * u); });
}

namespace {
std::string param_tag(double v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}
}  // namespace

TestFunction TestFunction::gaussian_bump(double c, double w) {
  // sum over images; |m| <= 8 puts the truncation error far below double eps
  // for w <= 0.2
  return TestFunction("gauss:" + param_tag(c) + ":" + param_tag(w), [c, w](double u) {
    double s = 0;
    const double d = wrap01(u) - c;
    for (int m = -8; m <= 8; ++m) s += std::exp(-(d + m) * (d + m) / (2 * w * w));
    return s;
  });
}

TestFunction TestFunction::hat(double c, double w) {
  return TestFunction("hat:" + param_tag(c) + ":" + param_tag(w), [c, w](double u) {
    double d = std::abs(wrap01(u) - c);
    d = std::min(d, 1.0 - d);
    return std::max(0.0, 1.0 - d / w);
  });
}

TestFunction TestFunction::by_name(const std::string& name, double k, double c, double w) {
  if (name == "const") return constant(k);
  if (name == "sin") return sine(static_cast<int>(k));
  if (name == "cos") return cosine(static_cast<int>(k));
  if (name == "gauss") return gaussian_bump(c, w);
  if (name == "hat") return hat(c, w);
  throw ValidationError("unknown test function '" + name +
                        "' (expected const, sin, cos, gauss or hat)");
}

WeightVector WeightVector::from(std::vector<double> values) {
  WeightVector v;
  v.w = std::move(values);
  double s = 0;
  for (double x : v.w) s += x * x;
  v.norm_2n = s / static_cast<double>(v.w.size());
  return v;
}

WeightVector WeightVector::all_ones(int n) {
  return from(std::vector<double>(static_cast<std::size_t>(n), 1.0));
}

WeightVector WeightVector::single_site(int n, int x) {
  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  w[static_cast<std::size_t>(mod(x, n))] = 1.0;
  return from(std::move(w));
}

WeightVector discretize(const TestFunction& H, int n, DiscretizeMode mode) {
  if (n < 4) throw ValidationError("discretize needs n >= 4");
  std::vector<double> w(static_cast<std::size_t>(n));
  const double nn = n;
  for (int x = 0; x < n; ++x) {
    const double u = x / nn;
    switch (mode) {
      case DiscretizeMode::Values:
        w[static_cast<std::size_t>(x)] = H(u);
        break;
      case DiscretizeMode::Gradient:
        w[static_cast<std::size_t>(x)] = nn * (H(wrap01((x + 1) / nn)) - H(u));
        break;
      case DiscretizeMode::Laplacian:
        w[static_cast<std::size_t>(x)] =
            nn * nn * (H(wrap01((x + 1) / nn)) - 2 * H(u) + H(wrap01((x - 1.0) / nn)));
        break;
    }
  }
  return WeightVector::from(std::move(w));
}

double fluct_field(const Configuration& c, const TestFunction& H, double rho) {
  const int n = c.size();
  double s = 0;
  for (int x = 0; x < n; ++x) s += H(x / static_cast<double>(n)) * (c.value(x) - rho);
  return s / std::sqrt(static_cast<double>(n));
}

double fluct_field(const Configuration& c, const WeightVector& H_values, double rho) {
  const int n = c.size();
  double s = 0;
  for (int x = 0; x < n; ++x) s += H_values[x] * (c.value(x) - rho);
  return s / std::sqrt(static_cast<double>(n));
}

double bg_integrand(const Configuration& c, const WeightVector& v, int L, const Moments& mom,
                    int degree) {
  const int n = c.size();
  if (v.size() != n) throw ValidationError("weight vector size does not match configuration");
  if (L < 1 || L > n / 4) throw ValidationError("block size L must be in [1, n/4]");
  if (degree != 2 && degree != 3) throw ValidationError("degree must be 2 or 3");
  const double rho = mom.rho;
  const double corr = degree == 2 ? mom.chi / L : mom.xi / (static_cast<double>(L) * L);

  // centered block sum over x+1..x+L, advanced by sliding
  double wsum = 0;
  for (int j = 1; j <= L; ++j) wsum += c.value(mod(j, n)) - rho;

  double total = 0;
  for (int x = 0; x < n; ++x) {
    const double avg = wsum / L;
    double local;
    if (degree == 2) {
      local = (c.value(x) - rho) * (c.value(mod(x + 1, n)) - rho) - avg * avg + corr;
    } else {
      local = (c.value(mod(x - 1, n)) - rho) * (c.value(x) - rho) *
                  (c.value(mod(x + 1, n)) - rho) -
              avg * avg * avg + corr;
    }
    total += v[x] * local;
    wsum += (c.value(mod(x + 1 + L, n)) - rho) - (c.value(mod(x + 1, n)) - rho);
  }
  return total;
}

std::vector<double> multiscale_terms(const Configuration& c, int x, int L, int ell0,
                                     const Moments& mom, int degree) {
  const int n = c.size();
  if (ell0 < 1 || ell0 > L) throw ValidationError("scales must satisfy 1 <= ell0 <= L");
  if (L > n / 4) throw ValidationError("block size L must be in [1, n/4]");
  x = mod(x, n);
  const double rho = mom.rho;
  auto e = [&](int y) { return c.value(mod(y, n)) - rho; };
  auto right = [&](int y, int l) {
    return block_avg(c, rho, BlockSpec{y, l, BlockSpec::Side::Right});
  };
  auto left = [&](int y, int l) {
    return block_avg(c, rho, BlockSpec{y, l, BlockSpec::Side::Left});
  };

  if (degree == 2) {
    const double chi = mom.chi;
    const double vr0 = right(x, ell0), vl0 = left(x, ell0), vrL = right(x, L);
    const double dsq = (e(x) - e(x + 1)) * (e(x) - e(x + 1));
    return {
        e(x) * (e(x + 1) - vr0),
        vr0 * (e(x) - vl0),
        vl0 * (vr0 - vrL),
        vrL * (vl0 - e(x)),
        vrL * e(x) - vrL * vrL + dsq / (2 * L),
        -dsq / (2 * L) + chi / L,
    };
  }
  if (degree != 3) throw ValidationError("degree must be 2 or 3");
  const double chi = mom.chi, xi = mom.xi;
  const double Ld = L;
  const double vrL = right(x, L), vrLm = right(x - 1, L);
  const double d = e(x + 1) - e(x);
  const double frac = (Ld - 1) / Ld;
  return {
      e(x - 1) * (e(x) * e(x + 1) - vrL * vrL + chi / L),
      vrL * vrL * (e(x - 1) - vrLm),
      frac * (d * d * d / (2 * Ld * Ld) + vrL * d * d / Ld),
      -frac * (d * d * d / (2 * Ld * Ld)),
      -frac * (vrL * d * d / Ld - xi / (Ld * Ld)),
      -e(x - 1) * chi / L - xi / (Ld * Ld) * (frac - 1),
      vrL * vrL * (vrLm - vrL),
  };
}

double mollified_square_spatial(const Configuration& c, const WeightVector& grad, double rho,
                                double eps) {
  const int n = c.size();
  if (grad.size() != n) throw ValidationError("gradient weights size does not match configuration");
  if (!(eps > 1.0 / n)) throw ValidationError("mollifier width must exceed the lattice spacing");
  if (!(eps <= 0.5)) throw ValidationError("mollifier width must be <= 1/2");
  const int m = static_cast<int>(std::ceil(eps * n - 1e-12));
  double wsum = 0;
  for (int j = 0; j < m; ++j) wsum += c.value(j) - rho;
  const double scale = 1.0 / (static_cast<double>(n) * n * eps * eps);
  double total = 0;
  for (int x = 0; x < n; ++x) {
    total += wsum * wsum * grad[x];
    wsum += (c.value(mod(x + m, n)) - rho) - (c.value(x) - rho);
  }
  return scale * total;
}

// ---------------------------------------------------------------------------

BgIntegrandObserver::BgIntegrandObserver(const Configuration& initial, const WeightVector& v,
                                         int L, const Moments& mom, int degree)
    : v_(v), L_(L), degree_(degree), n_(initial.size()), rho_(mom.rho) {
  if (initial.kind() != LatticeKind::Exclusion)
    throw ValidationError("incremental integrand observer supports exclusion configurations");
  if (v.size() != n_) throw ValidationError("weight vector size does not match configuration");
  if (L < 1 || L > n_ / 4) throw ValidationError("block size L must be in [1, n/4]");
  if (degree != 2 && degree != 3) throw ValidationError("degree must be 2 or 3");
  correction_ = degree == 2 ? mom.chi / L : mom.xi / (static_cast<double>(L) * L);
  block_cnt_.assign(static_cast<std::size_t>(n_), 0);
  rebuild(initial);
}

double BgIntegrandObserver::block_sq(int x) const {
  const double avg = (block_cnt_[static_cast<std::size_t>(x)] - L_ * rho_) / L_;
  return degree_ == 2 ? avg * avg : avg * avg * avg;
}

double BgIntegrandObserver::site_term(const Configuration& c, int x) const {
  const double e0 = c.occ(x) - rho_;
  const double e1 = c.occ(mod(x + 1, n_)) - rho_;
  if (degree_ == 2) return e0 * e1;
  return (c.occ(mod(x - 1, n_)) - rho_) * e0 * e1;
}

void BgIntegrandObserver::rebuild(const Configuration& c) {
  int cnt = 0;
  for (int j = 1; j <= L_; ++j) cnt += c.occ(mod(j, n_));
  double val = 0, wv = 0;
  for (int x = 0; x < n_; ++x) {
    block_cnt_[static_cast<std::size_t>(x)] = cnt;
    val += v_[x] * (site_term(c, x) - block_sq(x));
    wv += v_[x];
    cnt += c.occ(mod(x + 1 + L_, n_)) - c.occ(mod(x + 1, n_));
  }
  value_ = val + wv * correction_;
  events_since_rebuild_ = 0;
}

void BgIntegrandObserver::on_dwell(const Configuration& c, double w) {
  if (events_since_rebuild_ >= (1u << 22)) rebuild(c);  // bounds float drift on long runs
  const double y = value_ * w - comp_;
  const double t = acc_ + y;
  comp_ = (t - acc_) - y;
  acc_ = t;
}

void BgIntegrandObserver::on_exchange(const Configuration& pre, int bond) {
  const int z = bond, z1 = mod(bond + 1, n_);
  const int dz = pre.occ(z1) - pre.occ(z);
  if (dz == 0) return;
  ++events_since_rebuild_;

  // occupancy after the swap, evaluated on the pre-swap configuration
  auto occ_after = [&](int y) {
    y = mod(y, n_);
    if (y == z) return pre.occ(z1);
    if (y == z1) return pre.occ(z);
    return pre.occ(y);
  };
  auto term_after = [&](int x) {
    const double e0 = occ_after(x) - rho_;
    const double e1 = occ_after(x + 1) - rho_;
    if (degree_ == 2) return e0 * e1;
    return (occ_after(x - 1) - rho_) * e0 * e1;
  };

  const int hi = degree_ == 2 ? 1 : 2;
  for (int d = -1; d <= hi; ++d) {
    const int x = mod(z + d, n_);
    value_ += v_[x] * (term_after(x) - site_term(pre, x));
  }

  const int xa = mod(z - L_, n_);
  const int xb = z;
  value_ += v_[xa] * block_sq(xa) + v_[xb] * block_sq(xb);
  block_cnt_[static_cast<std::size_t>(xa)] += dz;
  block_cnt_[static_cast<std::size_t>(xb)] -= dz;
  value_ -= v_[xa] * block_sq(xa) + v_[xb] * block_sq(xb);
}

// ---------------------------------------------------------------------------

MollifiedSquareObserver::MollifiedSquareObserver(const Configuration& initial,
                                                 const WeightVector& grad, double rho,
                                                 double eps)
    : grad_(grad), n_(initial.size()), rho_(rho) {
  if (initial.kind() != LatticeKind::Exclusion)
    throw ValidationError("mollified-square observer supports exclusion configurations");
  if (grad.size() != n_) throw ValidationError("gradient weights size does not match configuration");
  if (!(eps > 1.0 / n_)) throw ValidationError("mollifier width must exceed the lattice spacing");
  if (!(eps <= 0.5)) throw ValidationError("mollifier width must be <= 1/2");
  m_ = static_cast<int>(std::ceil(eps * n_ - 1e-12));
  scale_ = 1.0 / (static_cast<double>(n_) * n_ * eps * eps);
  win_cnt_.assign(static_cast<std::size_t>(n_), 0);
  rebuild(initial);
}

void MollifiedSquareObserver::rebuild(const Configuration& c) {
  int cnt = 0;
  for (int j = 0; j < m_; ++j) cnt += c.occ(mod(j, n_));
  double total = 0;
  for (int x = 0; x < n_; ++x) {
    win_cnt_[static_cast<std::size_t>(x)] = cnt;
    const double zc = cnt - m_ * rho_;
    total += zc * zc * grad_[x];
    cnt += c.occ(mod(x + m_, n_)) - c.occ(x);
  }
  value_ = scale_ * total;
}

void MollifiedSquareObserver::on_dwell(const Configuration&, double w) {
  const double y = value_ * w - comp_;
  const double t = acc_ + y;
  comp_ = (t - acc_) - y;
  acc_ = t;
}

void MollifiedSquareObserver::on_exchange(const Configuration& pre, int bond) {
  const int z = bond, z1 = mod(bond + 1, n_);
  const int dz = pre.occ(z1) - pre.occ(z);
  if (dz == 0) return;
  const int xa = mod(z - m_ + 1, n_);  // window keeps z, loses nothing else
  const int xb = z1;                   // window keeps z+1
  auto bump = [&](int x, int delta) {
    auto& cnt = win_cnt_[static_cast<std::size_t>(x)];
    double zc = cnt - m_ * rho_;
    value_ -= scale_ * zc * zc * grad_[x];
    cnt += delta;
    zc = cnt - m_ * rho_;
    value_ += scale_ * zc * zc * grad_[x];
  };
  bump(xa, dz);
  bump(xb, -dz);
}

}  // namespace bg2lab
