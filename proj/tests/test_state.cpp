#include <doctest.h>

#include "bg2lab/configuration.hpp"
#include "bg2lab/models.hpp"
#include "bg2lab/rng.hpp"

using namespace bg2lab;

namespace {

Configuration random_exclusion(int n, double rho, Rng& rng) {
  Configuration c = Configuration::exclusion(n);
  for (int x = 0; x < n; ++x)
    if (uniform_double(rng) < rho) c.set_occ(x, 1);
  return c;
}

}  // namespace

TEST_CASE("centered values and periodic wrap") {
  const Configuration c = Configuration::exclusion_from({1, 0, 1, 0});
  CHECK(centered(c, 0.5, 0) == doctest::Approx(0.5));
  CHECK(centered(c, 0.5, 5) == doctest::Approx(-0.5));  // wraps to x = 1
  const Configuration e = Configuration::energy({2.0, 1.0, 1.5});
  CHECK(centered(e, 1.5, 0) == doctest::Approx(0.5));
}

TEST_CASE("block averages") {
  const Configuration c = Configuration::exclusion_from({1, 0, 1, 0, 1, 0, 1, 0});
  // all sites equal rho: centered values vanish for any block
  const Configuration flat = Configuration::energy(std::vector<double>(8, 0.37));
  for (int l = 1; l <= 2; ++l)
    CHECK(block_avg(flat, 0.37, {3, l, BlockSpec::Side::Right}) == doctest::Approx(0.0));

  // l = 1 right reduces to centered(x+1)
  CHECK(block_avg(c, 0.5, {0, 1, BlockSpec::Side::Right}) == doctest::Approx(centered(c, 0.5, 1)));

  const Configuration c4 = Configuration::exclusion_from({1, 0, 1, 0});
  CHECK(block_avg(c4, 0.5, {0, 1, BlockSpec::Side::Right}) == doctest::Approx(-0.5));
  // n=8 exclusion, l=2: (-0.5 + 0.5)/2 = 0
  CHECK(block_avg(c, 0.5, {0, 2, BlockSpec::Side::Right}) == doctest::Approx(0.0));

  CHECK_THROWS_AS(block_avg(c, 0.5, {0, 3, BlockSpec::Side::Right}), ValidationError);
}

TEST_CASE("exchange is an involution and conserves mass") {
  SUBCASE("examples") {
    const Configuration c = Configuration::exclusion_from({1, 0, 0, 0});
    const Configuration s = exchange(c, 0);
    CHECK(s.occ(0) == 0);
    CHECK(s.occ(1) == 1);
    CHECK(s.occ(2) == 0);

    // z = n-1 swaps last and first entries
    const Configuration t = exchange(c, 3);
    CHECK(t.occ(3) == 1);
    CHECK(t.occ(0) == 0);
  }

  SUBCASE("exhaustive on n <= 6") {
    for (int n = 2; n <= 6; ++n) {
      for (int mask = 0; mask < (1 << n); ++mask) {
        std::vector<int> occ(n);
        for (int x = 0; x < n; ++x) occ[static_cast<std::size_t>(x)] = (mask >> x) & 1;
        const Configuration c = Configuration::exclusion_from(occ);
        for (int z = 0; z < n; ++z) {
          const Configuration back = exchange(exchange(c, z), z);
          for (int x = 0; x < n; ++x) CHECK(back.occ(x) == c.occ(x));
          CHECK(exchange(c, z).total_mass() == doctest::Approx(c.total_mass()));
        }
      }
    }
  }

  SUBCASE("randomized larger rings") {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 18;
      Configuration c = random_exclusion(n, 0.4, rng);
      const int z = static_cast<int>(uniform_double(rng) * n);
      const Configuration back = exchange(exchange(c, z), z);
      for (int x = 0; x < n; ++x) CHECK(back.occ(x) == c.occ(x));
    }
  }
}

TEST_CASE("total mass") {
  CHECK(Configuration::exclusion_from({1, 0, 1, 0}).total_mass() == doctest::Approx(2.0));

  // sampled energies at beta=1, lambda=0: mean per site near 1
  Rng rng(42);
  const ModelSpec m = ModelSpec::exp_chain(10000, 1.0, 1.0, 1.0, 0.0);
  const Configuration e = invariant_sample(m, rng);
  const double mean = e.total_mass() / e.size();
  const double se = 1.0 / std::sqrt(10000.0);  // Gamma(1,1) has unit variance
  CHECK(std::abs(mean - 1.0) <= 4 * se);
}

TEST_CASE("telescoping and doubling identities for block averages") {
  Rng rng(11);
  const int n = 64;
  for (int trial = 0; trial < 50; ++trial) {
    Configuration c = random_exclusion(n, 0.3, rng);
    const double rho = 0.3;
    const int x = static_cast<int>(uniform_double(rng) * n);

    // eta_c(x+1) - avg_l(x) telescopes into nearest-neighbour differences
    const int l = 2 + static_cast<int>(uniform_double(rng) * 10);
    double telescoped = 0;
    for (int y = x + 2; y <= x + l; ++y)
      for (int z = x + 1; z <= y - 1; ++z)
        telescoped += centered(c, rho, z) - centered(c, rho, z + 1);
    telescoped /= l;
    const double direct =
        centered(c, rho, x + 1) - block_avg(c, rho, {x, l, BlockSpec::Side::Right});
    CHECK(std::abs(telescoped - direct) <= 1e-12);

    // avg_l(x) - avg_{2l}(x) = (1/2l) sum_{y=x+1}^{x+l} (eta_c(y) - eta_c(y+l))
    const int l2 = 2 * l;
    if (l2 <= n / 4) {
      double rhs = 0;
      for (int y = x + 1; y <= x + l; ++y) rhs += centered(c, rho, y) - centered(c, rho, y + l);
      rhs /= l2;
      const double lhs = block_avg(c, rho, {x, l, BlockSpec::Side::Right}) -
                         block_avg(c, rho, {x, l2, BlockSpec::Side::Right});
      CHECK(std::abs(lhs - rhs) <= 1e-12);
    }
  }
}
