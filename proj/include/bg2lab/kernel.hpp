#ifndef BG2LAB_KERNEL_HPP
#define BG2LAB_KERNEL_HPP

#include <cstdint>
#include <functional>
#include <span>

#include "bg2lab/configuration.hpp"
#include "bg2lab/models.hpp"
#include "bg2lab/rng.hpp"

namespace bg2lab {

/// Wall clock of one run.  micro_time == macro_time * n^a.
struct SimClock {
  double macro_time = 0;
  double micro_time = 0;
  std::uint64_t event_count = 0;
};

/// Trajectory hook.  The kernel reports each visited state together with its
/// exact dwell time (CTMC) or quadrature weight (PDMP), both in macro units;
/// weights of one run sum to the macro horizon.  on_exchange fires just
/// before the swap at bond z is applied, so implementations can update
/// incremental state in O(1).
class Observer {
 public:
  virtual ~Observer() = default;
  virtual void on_dwell(const Configuration& c, double macro_weight) = 0;
  virtual void on_exchange(const Configuration& /*pre*/, int /*bond*/) {}
  virtual void on_finish(double /*macro_horizon*/) {}
};

struct SimOptions {
  bool freeze_rates = false;     // test hook: all rates forced to zero
  bool disable_drift = false;    // PDMP test hook: exchanges only
  double h_max = 1e-3;           // PDMP micro step bound
  double mass_tol = 1e-8;        // PDMP relative mass drift per micro unit
  std::uint64_t max_events = 0;  // 0 = unlimited
};

struct SimResult {
  Configuration config;
  SimClock clock;
  bool absorbed = false;  // all rates vanished before the horizon
};

/// Event-driven CTMC sampler of the generator n^a L_n for the exclusion
/// models, exact in law: total rate kept in a Fenwick tree over the 2n
/// directed bond rates, exponential waiting times, O(1) local rate updates
/// after each jump.
SimResult simulate_exclusion(const ModelSpec& m, Configuration config, double horizon,
                             Rng& rng, std::span<Observer* const> observers,
                             const SimOptions& opts = {});

/// Piecewise-deterministic sampler for the exponential chain: classical RK4
/// for the drift flow between Poisson exchange events (rate gamma per bond),
/// composite-Simpson observer weights along the flow.
SimResult simulate_pdmp(const ModelSpec& m, Configuration config, double horizon, Rng& rng,
                        std::span<Observer* const> observers, const SimOptions& opts = {});

SimResult simulate(const ModelSpec& m, Configuration config, double horizon, Rng& rng,
                   std::span<Observer* const> observers, const SimOptions& opts = {});

/// Accumulates the exact path integral of f along the trajectory.
class IntegralObserver : public Observer {
 public:
  explicit IntegralObserver(std::function<double(const Configuration&)> f)
      : f_(std::move(f)) {}
  void on_dwell(const Configuration& c, double w) override {
    // compensated accumulation; runs can span 1e7 dwells
    const double y = f_(c) * w - comp_;
    const double t = acc_ + y;
    comp_ = (t - acc_) - y;
    acc_ = t;
  }
  double value() const { return acc_; }

 private:
  std::function<double(const Configuration&)> f_;
  double acc_ = 0;
  double comp_ = 0;
};

/// Sums the reported weights; used to check that dwell times add up to the
/// horizon.
class WeightSumObserver : public Observer {
 public:
  void on_dwell(const Configuration&, double w) override { sum_ += w; }
  double sum() const { return sum_; }

 private:
  double sum_ = 0;
};

}  // namespace bg2lab

#endif
