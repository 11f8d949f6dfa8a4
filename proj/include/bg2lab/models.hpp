#ifndef BG2LAB_MODELS_HPP
#define BG2LAB_MODELS_HPP

#include <array>
#include <string>
#include <variant>
#include <vector>

#include "bg2lab/configuration.hpp"
#include "bg2lab/rng.hpp"

namespace bg2lab {

// The four model catalogs.  Exclusion kinds hop particles across bonds with
// the listed rates; the exponential chain is a deterministic drift plus
// Poisson exchanges at rate gamma per bond.

struct Wasep {
  double b = 1.0;      // asymmetry amplitude, rates 1/2 +- b/(2 n^gamma)
  double gamma = 0.5;  // asymmetry decay exponent
};

struct Asep {
  double p = 0.7;  // right-jump probability, rates p / (1-p)
};

struct SpeedChange {
  double b = 1.0;  // weak asymmetry as in Wasep, times the local factor
  double gamma = 0.5;
  // bond factor c_{z,z+1}(eta) = eta(z-1) + eta(z+2) + 1
};

struct ExpChain {
  double gamma = 1.0;   // exchange rate per bond
  double beta = 1.0;    // Gamma rate parameter of the site marginal
  double lambda = 0.0;  // Gamma shape is lambda + 1
};

struct ModelSpec {
  std::variant<Wasep, Asep, SpeedChange, ExpChain> variant;
  double rho = 0.5;  // target density (ExpChain: (lambda+1)/beta, derived)
  double a = 1.0;    // time-scale exponent: generator runs as n^a L_n
  int n = 0;         // ring size

  bool is_exclusion() const { return !std::holds_alternative<ExpChain>(variant); }
  std::string variant_name() const;

  static ModelSpec wasep(int n, double a, double rho, double b, double gamma);
  static ModelSpec asep(int n, double a, double rho, double p);
  static ModelSpec speed_change(int n, double a, double rho, double b, double gamma);
  static ModelSpec exp_chain(int n, double a, double gamma, double beta, double lambda);
};

/// First three centered moments of the single-site marginal under the
/// invariant measure: rho, chi = E[(eta-rho)^2], xi = E[(eta-rho)^3].
struct Moments {
  double rho, chi, xi;
};
Moments model_moments(const ModelSpec& m);

struct BondRates {
  double right;  // rate of the move across (z, z+1) in the + direction
  double left;   // reverse direction
};

/// Jump/exchange rates at bond (z, z+1) in micro time units (before the n^a
/// acceleration).  For the exponential chain the bond swap rate gamma is
/// carried in `right` and `left` is zero (a swap has no direction).
BondRates bond_rates(const ModelSpec& m, const Configuration& c, int z);

/// Total swap intensity of bond (z, z+1): right + left.
double bond_intensity(const ModelSpec& m, const Configuration& c, int z);

/// Centered instantaneous current over bond (x, x+1).
double current(const ModelSpec& m, const Configuration& c, int x);

/// Splitting of the centered current into gradient part, quadratic part and
/// remainder: grad_h + quad_term + g_term == current(m, c, x) exactly.
struct CurrentDecomposition {
  double grad_h;      // tau_x h - tau_{x+1} h, evaluated
  double quad_coeff;  // C
  double quad_term;   // C * centered(x) * centered(x+1)
  double g_term;      // tau_x g, evaluated
  double sum() const { return grad_h + quad_term + g_term; }
};

/// Wasep/Asep support every rho in (0,1) (the remainder g is explicit);
/// SpeedChange is only decomposable at rho0 (the linear leftover is a
/// gradient exactly there); ExpChain requires rho equal to the model density.
CurrentDecomposition current_decomposition(const ModelSpec& m, double rho,
                                           const Configuration& c, int x);

/// The five grouped terms of the SpeedChange antisymmetric current: cubic,
/// quadratic at the bond, quadratic at distance one, quadratic at distance
/// two, and linear.  They sum to speedchange_antisym_current at any rho.
std::array<double, 5> speedchange_antisym_terms(const ModelSpec& m, const Configuration& c,
                                                int x, double rho);
double speedchange_antisym_current(const ModelSpec& m, const Configuration& c, int x,
                                   double rho);

/// The density at which the SpeedChange linear leftover becomes a gradient:
/// the positive root of 6 rho^2 - 2 rho - 1 = 0, i.e. (1 + sqrt 7)/6.
double rho0_speedchange();

/// Drift field of the exponential chain: component x is
/// eta(x) * (eta(x+1) - eta(x-1)); components sum to zero on the ring.
std::vector<double> drift_field(const ModelSpec& m, const Configuration& c);

/// Draws a configuration from the invariant product measure: Bernoulli(rho)
/// occupancies for exclusion kinds, Gamma(lambda+1, rate beta) energies for
/// the exponential chain.
Configuration invariant_sample(const ModelSpec& m, Rng& rng);

}  // namespace bg2lab

#endif
