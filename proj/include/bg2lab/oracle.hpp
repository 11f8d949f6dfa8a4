#ifndef BG2LAB_ORACLE_HPP
#define BG2LAB_ORACLE_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "bg2lab/models.hpp"

namespace bg2lab {

/// Exact generator of an exclusion model on a tiny ring (n <= 12, 2^n
/// states).  Rows are stored sparsely: each state has at most n off-diagonal
/// transitions (one per active bond).  Rates are in micro time units, before
/// the n^a acceleration.
struct SmallSystem {
  ModelSpec model;
  int n = 0;
  int num_states = 0;
  // CSR layout: row_begin[s]..row_begin[s+1] index into (col, rate)
  std::vector<std::uint32_t> row_begin;
  std::vector<std::uint32_t> col;
  std::vector<double> rate;
  std::vector<double> diag;  // negative row sums
  std::vector<double> pi;    // Bernoulli(rho) product weights per state

  Configuration state_config(int s) const;

  /// y = G^T x (used for stationarity) or y = G x (used for the semigroup).
  void apply(const std::vector<double>& x, std::vector<double>& y, bool transpose) const;
};

SmallSystem build_generator(const ModelSpec& m);

/// max_s' | sum_s pi(s) G(s, s') |, the invariance residual of the product
/// measure.
double stationarity_check(const SmallSystem& sys);

/// Largest absolute row sum of G (exact zero up to rounding by construction).
double row_sum_max(const SmallSystem& sys);

/// Evaluates a configuration functional on every state.
std::vector<double> state_vector(const SmallSystem& sys,
                                 const std::function<double(const Configuration&)>& f);

/// Stationary two-point function <f, e^{sG} f>_pi at micro time s, computed
/// by uniformization with certified truncation error.  A non-centered f is
/// centered automatically; `centered_flag`, when given, reports whether that
/// happened.
double exact_correlation(const SmallSystem& sys, std::vector<double> f, double s_micro,
                         bool* centered_flag = nullptr);

/// Exact second moment of the additive path functional:
///   E[( integral_0^t f(eta_{s n^a}) ds )^2] = 2 int_0^t (t-s) <f, e^{s n^a G} f>_pi ds,
/// by adaptive Simpson quadrature to relative tolerance 1e-8.
double exact_time_variance(const SmallSystem& sys, std::vector<double> f, double t_macro,
                           double a);

/// Dirichlet form -<f, G f>_pi.
double dirichlet_form(const SmallSystem& sys, const std::vector<double>& f);

/// Bond energy with the symmetrized swap intensity:
///   sum_eta pi(eta) * (R_z(eta) + R_z(eta^z))/4 * (f(eta^z) - f(eta))^2.
/// Summed over bonds this equals dirichlet_form exactly.
double bond_energy(const SmallSystem& sys, const std::vector<double>& f, int z);

}  // namespace bg2lab

#endif
