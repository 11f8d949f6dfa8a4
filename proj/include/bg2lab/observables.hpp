#ifndef BG2LAB_OBSERVABLES_HPP
#define BG2LAB_OBSERVABLES_HPP

#include <functional>
#include <string>
#include <vector>

#include "bg2lab/configuration.hpp"
#include "bg2lab/kernel.hpp"
#include "bg2lab/models.hpp"

namespace bg2lab {

/// Smooth periodic test function on the unit torus [0,1).
class TestFunction {
 public:
  TestFunction() = default;
  TestFunction(std::string name, std::function<double(double)> f)
      : name_(std::move(name)), f_(std::move(f)) {}

  double operator()(double u) const { return f_(u); }
  const std::string& name() const { return name_; }

  static TestFunction constant(double c);
  static TestFunction sine(int k = 1);
  static TestFunction cosine(int k = 1);
  /// Periodized Gaussian bump centered at c with width w.
  static TestFunction gaussian_bump(double c = 0.5, double w = 0.1);
  /// Triangular hat (C^0 only; robustness experiments).
  static TestFunction hat(double c = 0.5, double w = 0.25);
  /// Parses "sin", "cos", "gauss", "hat", "const" with parameters.
  static TestFunction by_name(const std::string& name, double k = 1, double c = 0.5,
                              double w = 0.1);

 private:
  std::string name_;
  std::function<double(double)> f_;
};

/// Test weights v(x) with the norm n^{-1} sum v^2.
struct WeightVector {
  std::vector<double> w;
  double norm_2n = 0;

  static WeightVector from(std::vector<double> values);
  static WeightVector all_ones(int n);
  static WeightVector single_site(int n, int x);
  int size() const { return static_cast<int>(w.size()); }
  double operator[](int x) const { return w[static_cast<std::size_t>(x)]; }
};

enum class DiscretizeMode { Values, Gradient, Laplacian };

/// Samples H on the lattice: H(x/n), the forward difference
/// n[H((x+1)/n) - H(x/n)], or the centered second difference.
WeightVector discretize(const TestFunction& H, int n, DiscretizeMode mode);

/// Density fluctuation field paired with H: n^{-1/2} sum_x H(x/n)(eta(x)-rho).
double fluct_field(const Configuration& c, const TestFunction& H, double rho);
/// Same with the lattice values of H precomputed.
double fluct_field(const Configuration& c, const WeightVector& H_values, double rho);

/// Instantaneous replacement integrand of the block-average experiments:
///   degree 2: sum_x v(x){ eta_c(x) eta_c(x+1) - (avg_L(x))^2 + chi/L }
///   degree 3: sum_x v(x){ eta_c(x-1) eta_c(x) eta_c(x+1) - (avg_L(x))^3 + xi/L^2 }
/// where avg_L(x) is the centered average over x+1..x+L.
double bg_integrand(const Configuration& c, const WeightVector& v, int L, const Moments& mom,
                    int degree);

/// Terms of the multiscale decomposition of the degree-2 (6 terms) and
/// degree-3 (7 terms) replacement integrands at one site; the terms sum to
/// the corresponding braced expression in bg_integrand exactly.
std::vector<double> multiscale_terms(const Configuration& c, int x, int L, int ell0,
                                     const Moments& mom, int degree);

/// Spatial part of the mollified-square process: with the one-sided box
/// kernel of width eps, n^{-1} sum_x (Y(eps^{-1} 1_[x/n, x/n+eps)))^2 grad(x),
/// where grad is the discretized gradient of the test function.
double mollified_square_spatial(const Configuration& c, const WeightVector& grad, double rho,
                                double eps);

// ---------------------------------------------------------------------------
// Incremental observers for the exclusion kernels.  Each keeps O(n) state and
// folds an exchange at bond z in O(1).

/// Path integral of the bg_integrand along an exclusion trajectory.
class BgIntegrandObserver : public Observer {
 public:
  BgIntegrandObserver(const Configuration& initial, const WeightVector& v, int L,
                      const Moments& mom, int degree);
  void on_dwell(const Configuration& c, double w) override;
  void on_exchange(const Configuration& pre, int bond) override;
  double integral() const { return acc_; }
  double current_value() const { return value_; }

 private:
  void rebuild(const Configuration& c);
  double site_term(const Configuration& c, int x) const;
  double block_sq(int x) const;

  WeightVector v_;
  int L_, degree_, n_;
  double rho_, correction_;  // chi/L or xi/L^2
  std::vector<int> block_cnt_;
  double value_ = 0, acc_ = 0, comp_ = 0;
  std::uint64_t events_since_rebuild_ = 0;
};

/// Path integral of the mollified-square spatial term for one eps.
class MollifiedSquareObserver : public Observer {
 public:
  MollifiedSquareObserver(const Configuration& initial, const WeightVector& grad, double rho,
                          double eps);
  void on_dwell(const Configuration& c, double w) override;
  void on_exchange(const Configuration& pre, int bond) override;
  double integral() const { return acc_; }
  double current_value() const { return value_; }

 private:
  void rebuild(const Configuration& c);
  WeightVector grad_;
  int n_, m_;  // m_: window site count
  double rho_, scale_;
  std::vector<int> win_cnt_;
  double value_ = 0, acc_ = 0, comp_ = 0;
};

}  // namespace bg2lab

#endif
