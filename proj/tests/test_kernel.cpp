#include <doctest.h>

#include <cmath>
#include <map>

#include "bg2lab/estimator.hpp"
#include "bg2lab/kernel.hpp"
#include "bg2lab/observables.hpp"
#include "bg2lab/oracle.hpp"

using namespace bg2lab;

namespace {

Configuration half_filled(int n) {
  Configuration c = Configuration::exclusion(n);
  for (int x = 0; x < n / 2; ++x) c.set_occ(x, 1);
  return c;
}

Configuration alternating(int n) {
  Configuration c = Configuration::exclusion(n);
  for (int x = 0; x < n; x += 2) c.set_occ(x, 1);
  return c;
}

// distribution at micro time s started from a point mass, by uniformization
std::vector<double> push_forward(const SmallSystem& sys, int start, double s_micro) {
  std::vector<double> p(static_cast<std::size_t>(sys.num_states), 0.0);
  p[static_cast<std::size_t>(start)] = 1.0;
  double lambda = 0;
  for (double d : sys.diag) lambda = std::max(lambda, -d);
  if (lambda == 0 || s_micro == 0) return p;
  const double mu = lambda * s_micro;
  std::vector<double> v = p, gv;
  std::vector<double> acc(p.size(), 0.0);
  double logw = -mu, tail = 1.0;
  const int k_max = static_cast<int>(mu + 12 * std::sqrt(mu + 1) + 60);
  for (int k = 0;; ++k) {
    const double w = std::exp(logw);
    for (std::size_t i = 0; i < v.size(); ++i) acc[i] += w * v[i];
    tail -= w;
    if ((tail < 1e-14 && k >= mu) || k >= k_max) break;
    sys.apply(v, gv, /*transpose=*/true);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += gv[i] / lambda;
    logw += std::log(mu) - std::log1p(k);
  }
  return acc;
}

int config_mask(const Configuration& c) {
  int mask = 0;
  for (int x = 0; x < c.size(); ++x) mask |= c.occ(x) << x;
  return mask;
}

}  // namespace

TEST_CASE("exclusion kernel conserves mass exactly") {
  const ModelSpec m = ModelSpec::asep(256, 1.25, 0.5, 0.7);
  Rng rng(1);
  Configuration c = invariant_sample(m, rng);
  const double mass = c.total_mass();
  SimOptions opts;
  opts.max_events = 100000;
  const SimResult r = simulate_exclusion(m, std::move(c), 1e9, rng, {}, opts);
  CHECK(r.clock.event_count == 100000);
  CHECK(r.config.total_mass() == mass);
}

TEST_CASE("identical seeds give identical trajectories and integrals") {
  const ModelSpec m = ModelSpec::wasep(128, 2.0, 0.5, 1.0, 0.5);
  const Moments mom = model_moments(m);
  const WeightVector v = discretize(TestFunction::gaussian_bump(), m.n, DiscretizeMode::Gradient);
  auto run = [&]() {
    Rng rng(2024);
    Configuration c = invariant_sample(m, rng);
    BgIntegrandObserver obs(c, v, 8, mom, 2);
    Observer* list[] = {&obs};
    const SimResult r = simulate_exclusion(m, std::move(c), 0.05, rng, list);
    return std::pair<double, std::uint64_t>{obs.integral(), r.clock.event_count};
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.first == b.first);  // bit identical
  CHECK(a.second == b.second);
}

TEST_CASE("dwell weights sum to the macro horizon") {
  const ModelSpec m = ModelSpec::asep(64, 1.25, 0.5, 0.7);
  Rng rng(5);
  Configuration c = invariant_sample(m, rng);
  WeightSumObserver ws;
  Observer* list[] = {&ws};
  const double horizon = 0.7;
  simulate_exclusion(m, std::move(c), horizon, rng, list);
  CHECK(std::abs(ws.sum() - horizon) <= 1e-12 * horizon);
}

TEST_CASE("path integrals of simple observables") {
  const ModelSpec m = ModelSpec::asep(32, 1.25, 0.5, 0.7);
  const double horizon = 0.35;

  SUBCASE("constant observable integrates to the horizon") {
    Rng rng(7);
    Configuration c = invariant_sample(m, rng);
    IntegralObserver one([](const Configuration&) { return 1.0; });
    Observer* list[] = {&one};
    simulate_exclusion(m, std::move(c), horizon, rng, list);
    CHECK(one.value() == doctest::Approx(horizon).epsilon(1e-12));
  }

  SUBCASE("conserved mass integrates to t * mass") {
    Rng rng(8);
    Configuration c = invariant_sample(m, rng);
    const double mass = c.total_mass();
    IntegralObserver obs([](const Configuration& cc) { return cc.total_mass(); });
    Observer* list[] = {&obs};
    simulate_exclusion(m, std::move(c), horizon, rng, list);
    CHECK(obs.value() == doctest::Approx(horizon * mass).epsilon(1e-12));
  }

  SUBCASE("frozen dynamics holds the integrand constant") {
    Rng rng(9);
    Configuration c = invariant_sample(m, rng);
    const Moments mom = model_moments(m);
    const WeightVector v = WeightVector::all_ones(m.n);
    const double f0 = bg_integrand(c, v, 4, mom, 2);
    BgIntegrandObserver obs(c, v, 4, mom, 2);
    Observer* list[] = {&obs};
    SimOptions opts;
    opts.freeze_rates = true;
    const SimResult r = simulate_exclusion(m, std::move(c), horizon, rng, list, opts);
    CHECK(r.clock.event_count == 0);
    CHECK(obs.integral() == doctest::Approx(horizon * f0).epsilon(1e-12));
  }
}

TEST_CASE("absorbing states end the run with the dwell reported") {
  const ModelSpec m = ModelSpec::asep(16, 1.0, 0.5, 0.7);
  Configuration c = Configuration::exclusion(16);  // empty ring: no moves
  Rng rng(10);
  WeightSumObserver ws;
  Observer* list[] = {&ws};
  const SimResult r = simulate_exclusion(m, std::move(c), 2.0, rng, list);
  CHECK(r.absorbed);
  CHECK(r.clock.event_count == 0);
  CHECK(ws.sum() == doctest::Approx(2.0));
}

TEST_CASE("incremental observers track the from-scratch evaluation") {
  SUBCASE("bg integrand along asep and speedchange paths") {
    struct Case {
      ModelSpec m;
      int degree;
    };
    const double rho0 = rho0_speedchange();
    for (const Case& tc : {Case{ModelSpec::asep(64, 1.25, 0.5, 0.7), 2},
                           Case{ModelSpec::asep(64, 1.25, 0.5, 0.7), 3},
                           Case{ModelSpec::speed_change(64, 2.0, rho0, 1.0, 0.5), 2},
                           Case{ModelSpec::speed_change(64, 2.0, rho0, 1.0, 0.5), 3}}) {
      Rng rng(11);
      Configuration c = invariant_sample(tc.m, rng);
      const Moments mom = model_moments(tc.m);
      const WeightVector v =
          discretize(TestFunction::gaussian_bump(), tc.m.n, DiscretizeMode::Gradient);
      BgIntegrandObserver fast(c, v, 8, mom, tc.degree);
      IntegralObserver slow(
          [&](const Configuration& cc) { return bg_integrand(cc, v, 8, mom, tc.degree); });
      Observer* list[] = {&fast, &slow};
      simulate_exclusion(tc.m, std::move(c), 0.02, rng, list);
      CHECK(std::abs(fast.integral() - slow.value()) <= 1e-10 * std::max(1.0, std::abs(slow.value())));
    }
  }

  SUBCASE("mollified square along a wasep path") {
    const ModelSpec m = ModelSpec::wasep(128, 2.0, 0.5, 1.0, 0.5);
    Rng rng(13);
    Configuration c = invariant_sample(m, rng);
    const WeightVector g = discretize(TestFunction::gaussian_bump(), m.n, DiscretizeMode::Gradient);
    for (double eps : {0.4, 0.1}) {
      Rng r2 = rng;
      Configuration cc = c;
      MollifiedSquareObserver fast(cc, g, m.rho, eps);
      IntegralObserver slow(
          [&](const Configuration& s) { return mollified_square_spatial(s, g, m.rho, eps); });
      Observer* list[] = {&fast, &slow};
      simulate_exclusion(m, std::move(cc), 0.01, r2, list);
      CHECK(std::abs(fast.integral() - slow.value()) <= 1e-10 * std::max(1.0, std::abs(slow.value())));
    }
  }
}

TEST_CASE("relaxation from a clustered start reaches the flat profile") {
  const ModelSpec m = ModelSpec::asep(32, 1.25, 0.5, 0.7);
  const int replicas = 400;
  double mean = 0;
  for (int i = 0; i < replicas; ++i) {
    Rng rng(seed_stream(99, static_cast<std::uint64_t>(i)));
    const SimResult r = simulate_exclusion(m, half_filled(m.n), 2.0, rng, {});
    mean += r.config.occ(3 * m.n / 4);  // site far from the initial cluster
  }
  mean /= replicas;
  const double se = 0.5 / std::sqrt(static_cast<double>(replicas));
  CHECK(std::abs(mean - 0.5) <= 4 * se);
}

TEST_CASE("marginal law matches the oracle push-forward") {
  // run many replicas from a fixed state and compare the empirical
  // distribution with exp(t n^a G) applied to the point mass
  struct Case {
    ModelSpec m;
    int replicas;
    double tv_tol;
  };
  for (const Case& tc :
       {Case{ModelSpec::asep(8, 1.25, 0.5, 0.7), 200000, 0.01},
        Case{ModelSpec::speed_change(6, 2.0, rho0_speedchange(), 1.0, 0.5), 100000, 0.02}}) {
    const ModelSpec& m = tc.m;
    const double t = m.n == 8 ? 1.0 : 0.5;
    const Configuration start = alternating(m.n);
    const int start_mask = config_mask(start);

    const SmallSystem sys = build_generator(m);
    const auto exact = push_forward(sys, start_mask, t * std::pow(m.n, m.a));

    std::map<int, int> hits;
    for (int i = 0; i < tc.replicas; ++i) {
      Rng rng(seed_stream(4242, static_cast<std::uint64_t>(i)));
      const SimResult r = simulate_exclusion(m, start, t, rng, {});
      hits[config_mask(r.config)]++;
    }
    double tv = 0;
    for (int s = 0; s < sys.num_states; ++s) {
      const auto it = hits.find(s);
      const double emp = it == hits.end() ? 0.0 : it->second / static_cast<double>(tc.replicas);
      tv += std::abs(emp - exact[static_cast<std::size_t>(s)]);
    }
    tv /= 2;
    CHECK(tv <= tc.tv_tol);
  }
}

TEST_CASE("pdmp kernel") {
  SUBCASE("mass drift stays at rounding level") {
    const ModelSpec m = ModelSpec::exp_chain(32, 1.0, 1.0, 1.0, 0.0);
    Rng rng(15);
    Configuration c = invariant_sample(m, rng);
    const double mass = c.total_mass();
    const SimResult r = simulate_pdmp(m, std::move(c), 1.0, rng, {});
    CHECK(std::abs(r.config.total_mass() - mass) / mass <= 1e-6);
  }

  SUBCASE("dwell weights sum to the horizon") {
    const ModelSpec m = ModelSpec::exp_chain(16, 1.0, 2.0, 1.0, 0.0);
    Rng rng(16);
    Configuration c = invariant_sample(m, rng);
    WeightSumObserver ws;
    Observer* list[] = {&ws};
    simulate_pdmp(m, std::move(c), 0.8, rng, list);
    CHECK(std::abs(ws.sum() - 0.8) <= 1e-12 * 0.8);
  }

  SUBCASE("pure drift is reversible under reflection") {
    // integrate forward, reflect the ring, integrate the same span again,
    // reflect back: recovers the start up to integrator error
    const ModelSpec m = ModelSpec::exp_chain(3, 1.0, 1e-9, 1.0, 0.0);
    SimOptions opts;
    opts.freeze_rates = true;  // drift only
    Rng rng(17);
    Configuration c = Configuration::energy({1.0, 2.0, 3.0});
    const SimResult fwd = simulate_pdmp(m, c, 0.3, rng, {}, opts);
    std::vector<double> flipped = fwd.config.raw_energies();
    std::reverse(flipped.begin(), flipped.end());
    const SimResult back = simulate_pdmp(m, Configuration::energy(flipped), 0.3, rng, {}, opts);
    std::vector<double> recovered = back.config.raw_energies();
    std::reverse(recovered.begin(), recovered.end());
    for (int x = 0; x < 3; ++x)
      CHECK(std::abs(recovered[static_cast<std::size_t>(x)] - c.energy_at(x)) <= 1e-8);
  }

  SUBCASE("exchange-only dynamics preserves the product marginals") {
    const ModelSpec m = ModelSpec::exp_chain(4096, 1.0, 1.0, 2.0, 1.0);
    SimOptions opts;
    opts.disable_drift = true;
    Rng rng(18);
    Configuration c = invariant_sample(m, rng);
    const SimResult r = simulate_pdmp(m, std::move(c), 0.5, rng, {}, opts);
    double mean = 0;
    for (double v : r.config.raw_energies()) mean += v;
    mean /= m.n;
    const double se = std::sqrt(0.5 / m.n);
    CHECK(std::abs(mean - 1.0) <= 4 * se);
  }

  SUBCASE("positivity loss raises an accuracy error") {
    const ModelSpec m = ModelSpec::exp_chain(3, 1.0, 1e-9, 1.0, 0.0);
    SimOptions opts;
    opts.freeze_rates = true;
    opts.h_max = 50.0;  // absurd step so the flow overshoots
    Rng rng(19);
    // site 0 has drift 0.5 * (1 - 20) per unit time; one huge step goes negative
    Configuration c = Configuration::energy({0.5, 1.0, 20.0});
    CHECK_THROWS_AS(simulate_pdmp(m, std::move(c), 10.0, rng, {}, opts), AccuracyError);
  }
}
