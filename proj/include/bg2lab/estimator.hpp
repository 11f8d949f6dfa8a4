#ifndef BG2LAB_ESTIMATOR_HPP
#define BG2LAB_ESTIMATOR_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "bg2lab/models.hpp"
#include "bg2lab/observables.hpp"

namespace bg2lab {

/// One replicated variance experiment for the block-replacement integrand.
struct BGExperiment {
  ModelSpec model;
  int L = 0;  // <= 0 selects optimal_block(t, n, a)
  double t = 0.1;
  WeightVector v;
  int replicas = 100;
  std::uint64_t base_seed = 1;
  int degree = 2;
  int workers = 1;
  bool frozen = false;  // test hook: rates forced to zero
};

struct VarianceEstimate {
  double mean_square = 0;  // replica average of the squared time integral
  double std_error = 0;
  int replicas = 0;
  int L = 0;
  double bound_value = 0;  // t (L/n^{a-1} + t n/L^2) |v|^2 with unit constant
  std::optional<double> bound_constant_fitted;
  std::uint64_t events = 0;
};

/// Right-hand side of the variance bound: C t (L/n^{a-1} + t n / L^2) norm2n.
double theoretical_bound(double t, int L, int n, double a, double norm_2n, double C = 1.0);

enum class BlockRule {
  VarianceMin,  // round((2 t n^a)^{1/3}), the minimizer of L/n^{a-1} + t n/L^2
  PaperScale,   // round(n^{a/2}), the n^{(alpha+1)/2} rule for a = 1 + alpha
};

int optimal_block(double t, int n, double a, BlockRule rule = BlockRule::VarianceMin);

struct ScalingPoint {
  double x = 0;  // abscissa (n, or eps)
  double estimate = 0;
  double std_error = 0;
};

struct ScalingReport {
  std::vector<ScalingPoint> grid;
  double fitted_exponent = 0;
  double fit_residual = 0;
};

/// Log-log least squares over (x, estimate) pairs; estimates must be positive.
ScalingReport scaling_fit(std::vector<ScalingPoint> points);

/// Runs the replicated experiment: sample the invariant measure, simulate to
/// the macro horizon, integrate the replacement integrand along the path,
/// average the squared integrals.
VarianceEstimate run_bg_variance(const BGExperiment& exp);

// --- consequence experiments ------------------------------------------------

struct TrivialLimitResult {
  ScalingReport report;  // Var(Y_t(H) - Y_0(H)) against n
};

TrivialLimitResult trivial_limit_experiment(double p, double a, const TestFunction& H,
                                            const std::vector<int>& n_grid, double t,
                                            int replicas, std::uint64_t base_seed, int workers);

struct CovariancePoint {
  double t = 0;
  double estimate = 0;  // E[Y_t(H) Y_0(H)] over replicas
  double std_error = 0;
  double analytic = 0;  // sigma^2 <H, exp(nu t Lap) H>, Fourier evaluated
};

/// Stationary autocovariance of the fluctuation field for the weakly
/// asymmetric model at diffusive scale, against the Ornstein-Uhlenbeck
/// prediction with nu = 1/2 and sigma^2 = chi(rho).
std::vector<CovariancePoint> ou_covariance_experiment(double b, double gamma, int n,
                                                      const TestFunction& H,
                                                      const std::vector<double>& t_grid,
                                                      int replicas, std::uint64_t base_seed,
                                                      int workers);

/// sigma^2 <H, e^{nu t Laplacian} H> on the unit torus via Fourier
/// multipliers exp(-nu t (2 pi k)^2).
double ou_covariance_analytic(const TestFunction& H, double t, double nu, double sigma2);

struct EnergyEstimatePoint {
  double eps = 0;
  double estimate = 0;  // E[(B^eps - B^{eps/2})^2]
  double std_error = 0;
};

struct EnergyEstimateResult {
  std::vector<EnergyEstimatePoint> points;
  ScalingReport report;  // slope of log estimate vs log eps
};

/// Mollified-square Cauchy increments for the gamma = 1/2 weak asymmetry:
/// E[(B^eps_{0,t} - B^{eps/2}_{0,t})^2] over a dyadic eps grid, one
/// trajectory per replica feeding every eps.
EnergyEstimateResult energy_estimate_experiment(double b, int n, const TestFunction& H,
                                                const std::vector<double>& eps_grid,
                                                double t_len, int replicas,
                                                std::uint64_t base_seed, int workers);

struct QvPoint {
  int partitions = 0;   // m
  double estimate = 0;  // E[ sum_i (B_{(i+1)t/m} - B_{i t/m})^2 ]
  double std_error = 0;
};

/// Zero-quadratic-variation diagnostic for the mollified-square process:
/// partition-sum statistic over dyadic refinements m in m_grid (each a power
/// of two up to m_max), with the slope of log estimate vs log m fitted.
/// frozen is a test hook that freezes the dynamics.
struct QvResult {
  std::vector<QvPoint> points;
  ScalingReport report;
};

QvResult quadratic_variation_diagnostic(double b, int n, const TestFunction& H, double eps,
                                        double t_len, const std::vector<int>& m_grid,
                                        int replicas, std::uint64_t base_seed, int workers,
                                        bool frozen = false);

}  // namespace bg2lab

#endif
