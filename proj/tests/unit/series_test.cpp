#include <doctest.h>

#include "formcalc/errors.hpp"
#include "formcalc/series.hpp"
#include "oracles.hpp"

using namespace formcalc;

TEST_CASE("rule arithmetic") {
  const SeqRule a = SeqRule::power(2.0), b = SeqRule::power(4.0);
  const SeqRule s = a + b;
  CHECK(s(3).real() == doctest::Approx(9.0 + 81.0));
  const SeqRule p = a * SeqRule::geometric(0.5, 2.0);
  CHECK(p(3).real() == doctest::Approx(9.0 * 2.0 * 0.125));
  CHECK((a + a.scaled(-1.0)).is_zero());
  CHECK(SeqRule::exponential(std::log(0.5)).approx_equal(SeqRule::geometric(0.5)));
}

TEST_CASE("infimum and supremum certificates") {
  CHECK(SeqRule::power(2.0).certified_infimum() == doctest::Approx(1.0));
  CHECK((SeqRule::power(2.0) + SeqRule::constant(3.0)).certified_infimum() >= 4.0 - 1e-12);
  CHECK(SeqRule::geometric(0.5).certified_supremum() >= 0.5);
  CHECK(std::isinf(SeqRule::power(1.0).certified_supremum()));
  CHECK_THROWS_AS(SeqRule::constant(-1.0).certified_infimum(), Error);
}

TEST_CASE("convergent series against closed forms") {
  const SeriesCertificate z2 = certify_series(SeqRule::power(-2.0), 1);
  REQUIRE(z2.verdict == SeriesVerdict::Converges);
  CHECK(std::abs(z2.value() - M_PI * M_PI / 6.0) <= z2.tail_bound + 1e-11);
  CHECK(z2.tail_bound <= 1e-12);

  const SeriesCertificate g = certify_series(SeqRule::geometric(0.25), 1);
  CHECK(g.value() == doctest::Approx(1.0 / 3.0).epsilon(1e-13));

  // sum n^2 4^{-n} = 4 (1 + 1/4) / (4 (1 - 1/4)^3) = 20/27
  const SeriesCertificate w = certify_series(SeqRule::power(2.0) * SeqRule::geometric(0.25), 1);
  CHECK(w.value() == doctest::Approx(20.0 / 27.0).epsilon(1e-12));

  const SeriesCertificate z3 = certify_series(SeqRule::power(-3.0), 1);
  CHECK(z3.value() == doctest::Approx(oracle::zeta(3.0)).epsilon(1e-11));
}

TEST_CASE("divergent series are certified as such") {
  for (const SeqRule& r : {SeqRule::power(-1.0), SeqRule::constant(1.0), SeqRule::exponential(0.5),
                           SeqRule::power(2.0)}) {
    const SeriesCertificate c = certify_series(r, 1);
    CHECK(c.verdict == SeriesVerdict::Diverges);
    CHECK(std::isinf(c.tail_bound));
    REQUIRE(c.growth.size() >= 2);
    CHECK(c.growth.back().second > c.growth.front().second);
  }
}

TEST_CASE("tail bounds dominate the true tails") {
  for (long last : {5L, 20L, 100L}) {
    const SeqTerm t{1.0, -2.0, 1.0};
    const double true_tail = oracle::zeta(2.0) - oracle::partial_sum([](long n) { return 1.0 / (n * 1.0 * n); }, 1, last);
    CHECK(term_tail_bound(t, last) >= true_tail * (1 - 1e-9));
    const SeqTerm g{1.0, 3.0, 0.5};
    const double gt = oracle::partial_sum([](long n) { return std::pow(n, 3.0) * std::pow(0.5, n); }, last + 1, 2000);
    CHECK(term_tail_bound(g, last) >= gt * (1 - 1e-12));
  }
}
