#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cpa/photon_stats.hpp"
#include "support/click_oracle.hpp"

using namespace cpa;
using namespace cpa::stats;
using Catch::Matchers::WithinAbs;

TEST_CASE("click probability anchors", "[stats]") {
  CHECK_THAT(click_probability(2, 2, 10, 1.0), WithinAbs(0.9, 1e-12));
  CHECK_THAT(click_probability(3, 3, 10, 1.0), WithinAbs(0.72, 1e-12));
  CHECK_THAT(click_probability(2, 2, 10, 0.17), WithinAbs(0.0260, 5e-4));
  CHECK_THAT(click_probability(3, 3, 10, 0.17), WithinAbs(0.0034, 5e-4));

  // single detector recovers the on-off probabilities
  for (double eta : {0.0, 0.3, 1.0}) {
    CHECK_THAT(click_probability(0, 1, 1, eta), WithinAbs(1.0 - eta, 1e-15));
    CHECK_THAT(click_probability(1, 1, 1, eta), WithinAbs(eta, 1e-15));
  }

  // no dark counts: never more clicks than photons
  CHECK(click_probability(3, 2, 10, 1.0) == 0.0);
  CHECK(click_probability(1, 0, 5, 0.5) == 0.0);

  CHECK_THROWS_AS(click_probability(11, 2, 10, 1.0), Error);
  CHECK_THROWS_AS(click_probability(-1, 2, 10, 1.0), Error);
  CHECK_THROWS_AS(click_probability(2, 2, 10, 1.5), Error);
  CHECK_THROWS_AS(click_probability(2, 2, 0, 1.0), Error);
}

TEST_CASE("series form at unit efficiency", "[stats]") {
  // inner sum is 1 at (k=2, n=2), prefactor 90/100
  CHECK_THAT(click_probability_series(2, 2, 10), WithinAbs(0.9, 1e-12));
  CHECK_THAT(click_probability_series(3, 3, 10), WithinAbs(0.72, 1e-12));
  CHECK(click_probability_series(0, 0, 7) == 1.0);
  CHECK(click_probability_series(0, 3, 7) == 0.0);
}

TEST_CASE("series and direct forms agree at eta = 1", "[stats]") {
  for (int n_det = 1; n_det <= 20; ++n_det)
    for (int n = 0; n <= 12; ++n)
      for (int k = 0; k <= n_det; ++k) {
        double a = click_probability(k, n, n_det, 1.0);
        double b = click_probability_series(k, n, n_det);
        CHECK_THAT(a - b, WithinAbs(0.0, 1e-10));
      }
}

TEST_CASE("click probability matches the enumeration oracle", "[stats]") {
  CHECK_THAT(cpa::test::oracle_click_prob(2, 2, 2, 1.0), WithinAbs(0.5, 1e-15));
  CHECK_THAT(cpa::test::oracle_click_prob(1, 2, 10, 1.0), WithinAbs(0.1, 1e-15));
  CHECK_THAT(cpa::test::oracle_click_prob(0, 3, 5, 0.0), WithinAbs(1.0, 1e-15));

  for (int n_det = 1; n_det <= 6; ++n_det)
    for (int m = 0; m <= 5; ++m)
      for (int k = 0; k <= n_det; ++k)
        for (double eta : {0.3, 0.7, 1.0}) {
          double impl = click_probability(k, m, n_det, eta);
          double oracle = cpa::test::oracle_click_prob(k, m, n_det, eta);
          CHECK_THAT(impl - oracle, WithinAbs(0.0, 1e-12));
        }

  CHECK_THROWS_AS(cpa::test::oracle_click_prob(2, 10, 8, 1.0), Error);
}

TEST_CASE("click distributions normalize over the full grid", "[stats]") {
  // all m <= 50, N <= 100; the alternating-sum corner cases route through
  // the stable recurrence, so the budget holds everywhere
  double worst = 0.0;
  for (int m = 0; m <= 50; ++m)
    for (int n_det = 1; n_det <= 100; ++n_det)
      for (double eta : {0.0, 0.17, 0.5, 0.9, 0.95, 1.0}) {
        double sum = 0.0;
        for (int k = 0; k <= std::min(m, n_det); ++k)
          sum += click_probability(k, m, n_det, eta);
        worst = std::max(worst, std::abs(sum - 1.0));
      }
  CHECK(worst < 1e-9);

  auto row = click_distribution(34, 100, 0.9);
  double row_sum = 0.0;
  for (double p : row) row_sum += p;
  CHECK_THAT(row_sum, WithinAbs(1.0, 1e-12));
}

TEST_CASE("resolution probability is monotone and saturates", "[stats]") {
  for (int m : {1, 2, 3})
    for (double eta : {0.5, 0.9, 1.0}) {
      double prev = -1.0;
      for (int n_det = m; n_det <= 60; n_det += 3) {
        double p = resolution_probability(m, n_det, eta);
        CHECK(p >= prev - 1e-12);
        prev = p;
      }
    }
  for (int n_det : {5, 10, 40}) {
    double prev = -1.0;
    for (double eta = 0.0; eta <= 1.0001; eta += 0.1) {
      double p = resolution_probability(2, n_det, std::min(eta, 1.0));
      CHECK(p >= prev - 1e-12);
      prev = p;
    }
  }

  CHECK_THAT(resolution_probability(1, 17, 0.42), WithinAbs(0.42, 1e-14));
  CHECK(resolution_probability(3, 10000, 1.0) >= 0.999);

  // loose cross-check of the quoted medium-efficiency values
  CHECK_THAT(resolution_probability(2, 10, 0.95), WithinAbs(0.81, 0.04));
  CHECK_THAT(resolution_probability(3, 10, 0.95), WithinAbs(0.64, 0.04));
  CHECK_THAT(resolution_probability(2, 10, 0.90), WithinAbs(0.69, 0.04));
  CHECK_THAT(resolution_probability(3, 10, 0.90), WithinAbs(0.54, 0.04));
}

TEST_CASE("squeezed vacuum photon-number distribution", "[stats]") {
  auto src = squeezed_vacuum_pn(1.0, 100);
  CHECK_THAT(src.pn[0], WithinAbs(1.0 / std::cosh(1.0), 1e-15));
  for (int n = 1; n < 100; n += 2) CHECK(src.pn[static_cast<std::size_t>(n)] == 0.0);
  CHECK_THAT(src.pn[2], WithinAbs(0.1880, 5e-4));
  CHECK_THAT(src.pn[2], WithinAbs(0.18794405, 1e-7));
  double sum = 0.0;
  for (double p : src.pn) sum += p;
  CHECK(sum <= 1.0 + 1e-12);
  CHECK(sum >= 1.0 - 1e-9);

  // n_max = 60 leaves a ~7e-9 tail at xi = 1, beyond the 1e-9 budget
  try {
    squeezed_vacuum_pn(1.0, 60);
    FAIL("expected truncation error");
  } catch (const Error& e) {
    CHECK(e.code() == "truncation");
  }
  CHECK_THROWS_AS(squeezed_vacuum_pn(1.0, 99), Error);
  CHECK_THROWS_AS(squeezed_vacuum_pn(-0.5, 100), Error);

  // xi = 0 is vacuum
  auto vac = squeezed_vacuum_pn(0.0, 0);
  CHECK(vac.pn.size() == 1);
  CHECK(vac.pn[0] == 1.0);
}

TEST_CASE("measured squeezed-vacuum statistics with ten detectors", "[stats]") {
  DetectorArraySpec array{10, 1.0, DetectorArraySpec::Mode::incoherent_multiplexed};
  auto dist = source_click_distribution(squeezed_vacuum_pn(1.0, 100), array);
  REQUIRE(dist.p.size() == 11);
  CHECK_THAT(dist.p[1], WithinAbs(0.019, 0.002));
  CHECK_THAT(dist.p[2], WithinAbs(0.174, 0.002));
  CHECK_THAT(dist.p[3], WithinAbs(0.038, 0.002));
  CHECK_THAT(dist.p[4], WithinAbs(0.056, 0.002));

  // parity signature: odd-count probabilities sit below their even neighbors
  CHECK(dist.p[1] < dist.p[2]);
  CHECK(dist.p[3] < dist.p[2]);
  CHECK(dist.p[3] < dist.p[4]);
  CHECK(dist.p[5] < dist.p[4]);

  double sum = 0.0;
  for (double p : dist.p) sum += p;
  CHECK_THAT(sum, WithinAbs(1.0, 1e-9));
}

TEST_CASE("fock sources and array modes", "[stats]") {
  DetectorArraySpec array{10, 1.0, DetectorArraySpec::Mode::incoherent_multiplexed};
  auto two = source_click_distribution(PhotonSource::fock(2), array);
  CHECK_THAT(two.p[2], WithinAbs(0.9, 1e-12));
  CHECK_THAT(two.p[1], WithinAbs(0.1, 1e-12));  // both photons on the same detector
  CHECK_THAT(two.p[0], WithinAbs(0.0, 1e-15));

  auto vacuum = source_click_distribution(PhotonSource::fock(0), array);
  CHECK(vacuum.p[0] == 1.0);

  // the distributed mode absorbs deterministically: eta is forced to 1
  DetectorArraySpec lossy{10, 0.17, DetectorArraySpec::Mode::incoherent_multiplexed};
  DetectorArraySpec distributed{10, 0.17, DetectorArraySpec::Mode::coherent_distributed};
  auto blurred = source_click_distribution(PhotonSource::fock(2), lossy);
  auto coherent = source_click_distribution(PhotonSource::fock(2), distributed);
  CHECK_THAT(coherent.p[2], WithinAbs(0.9, 1e-12));
  CHECK(blurred.p[2] < 0.03);
}
