#include <doctest.h>

#include "formcalc/covariance.hpp"
#include "formcalc/random.hpp"
#include "oracles.hpp"

using namespace formcalc;
using cd = std::complex<double>;

namespace {

const double kR = std::exp(-1.5);

DiscreteProbabilitySpace example_space() { return DiscreteProbabilitySpace::exponential(1.5); }

// E of (sum_k a_k xi_k) conj(sum_k b_k xi_k) for xi_k = n^k / k! by plain summation.
double example_moment(int j, int k) {
  const double c = (1.0 - kR) / kR;
  return oracle::partial_sum(
      [&](long n) {
        const double nd = static_cast<double>(n);
        return c * std::pow(kR, nd) * std::pow(nd, j + k) / (std::tgamma(j + 1.0) * std::tgamma(k + 1.0));
      },
      1, 400);
}

CMatrix table(std::initializer_list<std::initializer_list<double>> cols) {
  const Index d = static_cast<Index>(cols.begin()->size());
  CMatrix m(d, static_cast<Index>(cols.size()));
  Index j = 0;
  for (const auto& col : cols) {
    Index i = 0;
    for (double v : col) m(i++, j) = v;
    ++j;
  }
  return m;
}

std::vector<Functional> coordinates(Index d) {
  std::vector<Functional> out;
  for (Index k = 0; k < d; ++k) out.push_back(Functional::dense(CVector::Unit(d, k)));
  return out;
}

std::vector<Functional> finite_coordinates(Index d) {
  std::vector<Functional> out;
  for (Index k = 0; k < d; ++k) out.push_back(Functional::finite(CVector::Unit(d, k)));
  return out;
}

}  // namespace

TEST_CASE("probability spaces") {
  const DiscreteProbabilitySpace mu = example_space();
  CHECK(mu.normalization() == doctest::Approx(std::exp(1.5) - 1.0).epsilon(1e-14));
  CHECK(oracle::partial_sum([&](long n) { return mu.weight(n); }, 1, 200) == doctest::Approx(1.0).epsilon(1e-14));
  const DiscreteProbabilitySpace g = DiscreteProbabilitySpace::generated(SeqRule::power(-3.0));
  CHECK(g.normalization() == doctest::Approx(1.0 / oracle::zeta(3.0)).epsilon(1e-12));
  CHECK(g.mass_error() <= 1e-12);
  CHECK_THROWS_AS(DiscreteProbabilitySpace::finite({0.5, 0.6}), Error);
  CHECK_THROWS_AS(DiscreteProbabilitySpace::finite({1.5, -0.5}), Error);
}

TEST_CASE("weak_expectation examples") {
  const CVector x0 = CVector::Random(3);
  const auto one = DiscreteProbabilitySpace::finite({1.0});
  CHECK((weak_expectation(one, RandomVariable::table(x0)).mean.coords() - x0).norm() < 1e-15);

  CMatrix pm(3, 2);
  pm << x0, -x0;
  const auto half = DiscreteProbabilitySpace::finite({0.5, 0.5});
  CHECK(weak_expectation(half, RandomVariable::table(pm)).mean.coords().norm() < 1e-15);

  // sum_n c r^n n = c r / (1 - r)^2 and sum_n c r^n n^2 / 2 = c r (1 + r) / (2 (1 - r)^3)
  const WeakExpectation e = weak_expectation(example_space(), RandomVariable::power_factorial(), 4);
  const double c = (1.0 - kR) / kR;
  CHECK(std::abs(e.mean.at(1) - c * kR / std::pow(1.0 - kR, 2)) < 1e-12);
  CHECK(std::abs(e.mean.at(2) - c * kR * (1.0 + kR) / (2.0 * std::pow(1.0 - kR, 3))) < 1e-12);
  CHECK(std::abs(e.mean.at(3) - example_moment(3, 0)) < 1e-12);
  CHECK(e.tail_bound <= 1e-12);
  CHECK(e.spot_check_residual <= 1e-12);

  // mu_n ~ n^-3 makes the second coordinate sum_n n^2 / (2 n^3) diverge
  const auto heavy = DiscreteProbabilitySpace::generated(SeqRule::power(-3.0));
  CHECK_THROWS_AS(weak_expectation(heavy, RandomVariable::power_factorial(), 2), Error);
}

TEST_CASE("centering gives zero mean") {
  random::Engine rng(5);
  const CMatrix v = random::gaussian_matrix(rng, 3, 5);
  const auto mu = DiscreteProbabilitySpace::finite({0.1, 0.2, 0.3, 0.25, 0.15});
  const RandomVariable c = centered(mu, RandomVariable::table(v));
  CHECK(weak_expectation(mu, c).mean.coords().norm() < 1e-12);

  const RandomVariable pc = centered(example_space(), RandomVariable::power_factorial(), 6);
  CHECK(weak_expectation(example_space(), pc, 6).mean.coords().norm() < 1e-12);
}

TEST_CASE("second-moment domain of the exponential example") {
  const auto mu = example_space();
  const auto xi = RandomVariable::power_factorial();
  random::Engine rng(3);
  for (Index K = 1; K <= 12; ++K) {
    const SecondMomentCertificate c = second_moment(mu, xi, Functional::finite(random::gaussian_vector(rng, K)));
    CHECK(c.verdict == Membership::In);
    REQUIRE(c.series.has_value());
    CHECK(c.series->verdict == SeriesVerdict::Converges);
  }
  CHECK(in_second_moment_domain(mu, xi, Functional::finite(CVector::Zero(4))));

  // f_k = 1/k: f(xi_n) ~ e^n / n and mu_n |f|^2 ~ e^{n / 2} / n^2
  const SecondMomentCertificate out = second_moment(mu, xi, Functional::generated(SeqRule::power(-1.0), 4));
  CHECK(out.verdict == Membership::Out);
  CHECK(!in_second_moment_domain(mu, xi, Functional::generated(SeqRule::power(-1.0), 4)));
  REQUIRE(out.growth.size() >= 4);
  for (std::size_t i = 1; i < out.growth.size(); ++i) CHECK(out.growth[i].second > 2.0 * out.growth[i - 1].second);
  // oracle: partial sums of mu_n (sum_k n^k / (k k!))^2 at n = 10
  const double c = (1.0 - kR) / kR;
  const double direct = oracle::partial_sum(
      [&](long n) {
        double s = 0.0;
        for (int k = 1; k < 120; ++k) s += std::exp(k * std::log(double(n)) - std::lgamma(k + 1.0)) / k;
        return c * std::pow(kR, double(n)) * s * s;
      },
      1, 10);
  CHECK(out.growth[0].first == 10);
  CHECK(out.growth[0].second == doctest::Approx(direct).epsilon(1e-10));

  // f_k = 2^{-k}: |f(xi_n)| <= e^{n/2}, mu_n e^{n} summable
  CHECK(in_second_moment_domain(mu, xi, Functional::generated(SeqRule::geometric(0.5), 4)));
  // f_k = 0.8^k / k: 2 s = 1.6 > 1.5
  CHECK(!in_second_moment_domain(mu, xi, Functional::generated(SeqRule({SeqTerm{1.0, -1.0, 0.8}}), 4)));
  // mixed head and generator tail is outside the supported forms
  CVector head(2);
  head << 5.0, 5.0;
  CHECK(second_moment(mu, xi, Functional::sequence(head, SeqRule::power(-1.0))).verdict == Membership::Uncertified);
}

TEST_CASE("covariance_form examples") {
  CVector x0(2);
  x0 << 1.0, cd(0.0, 2.0);
  const auto one = DiscreteProbabilitySpace::finite({1.0});
  const SesquilinearForm t1 = covariance_form(one, RandomVariable::table(x0), coordinates(2));
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j)
      CHECK(std::abs(t1.gram()(i, j) - std::conj(x0(i)) * x0(j)) < 1e-15);

  CMatrix pm(2, 2);
  pm << x0, -x0;
  const SesquilinearForm t2 =
      covariance_form(DiscreteProbabilitySpace::finite({0.5, 0.5}), RandomVariable::table(pm), coordinates(2));
  CHECK((t2.gram() - t1.gram()).norm() < 1e-15);

  const CMatrix v = table({{1.0, 2.0}, {-1.0, 0.5}, {0.0, -3.0}});
  const std::vector<double> w = {0.2, 0.5, 0.3};
  const SesquilinearForm t3 = covariance_form(DiscreteProbabilitySpace::finite(w), RandomVariable::table(v),
                                              coordinates(2));
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) {
      double s = 0.0;
      for (Index a = 0; a < 3; ++a) s += w[a] * v(i, a).real() * v(j, a).real();
      CHECK(std::abs(t3.gram()(i, j) - s) < 1e-15);
    }
  CHECK(t3.positive());
}

TEST_CASE("covariance form of the exponential example") {
  const auto mu = example_space();
  const auto xi = RandomVariable::power_factorial();
  const SesquilinearForm t = covariance_form(mu, xi, finite_coordinates(4));
  for (int j = 1; j <= 4; ++j)
    for (int k = 1; k <= 4; ++k)
      CHECK(std::abs(t.gram()(j - 1, k - 1) - example_moment(j, k)) <= 1e-11 * example_moment(j, k));
  CHECK(t.positive());
  CHECK(linalg::hermitian_residual(t.gram()) <= 1e-12);

  const SesquilinearForm tc = covariance_form(mu, xi, finite_coordinates(3), true);
  for (int j = 1; j <= 3; ++j)
    for (int k = 1; k <= 3; ++k) {
      const double cov = example_moment(j, k) - example_moment(j, 0) * example_moment(k, 0);
      CHECK(std::abs(tc.gram()(j - 1, k - 1) - cov) <= 1e-10 * std::abs(example_moment(j, k)));
    }
  // E|f(xi)|^2 for f_k = 2^{-k}: the closed form sum_n mu_n (e^{n/2} - 1)^2
  const Functional g = Functional::generated(SeqRule::geometric(0.5), 3);
  const double c = (1.0 - kR) / kR;
  const double ref = oracle::partial_sum(
      [&](long n) { return c * std::pow(kR, double(n)) * std::pow(std::exp(0.5 * n) - 1.0, 2); }, 1, 400);
  CHECK(second_moment_value(mu, xi, g, g).real() == doctest::Approx(ref).epsilon(1e-11));
  CHECK_THROWS_AS(covariance_form(mu, xi, {Functional::generated(SeqRule::power(-1.0), 3)}), Error);
}

TEST_CASE("covariance closedness runs") {
  const auto mu = example_space();
  const auto xi = RandomVariable::power_factorial();
  const ClosednessWitness w = covariance_closedness(
      mu, xi, {Functional::generated(SeqRule::geometric(0.5), 2),
               Functional::generated(SeqRule({SeqTerm{cd(0.0, 1.0), -2.0, 0.7}}), 2), Functional::finite(CVector::Ones(5))});
  REQUIRE(w.runs.size() == 3);
  for (const ClosednessRun& r : w.runs) {
    CHECK(r.tails.back() <= 1e-10 * r.limit_energy);
    for (std::size_t i = 1; i < r.tails.size(); ++i) CHECK(r.tails[i] <= r.tails[i - 1]);
  }
  CHECK(w.runs[2].tails.back() == 0.0);
  CHECK_THROWS_AS(covariance_closedness(mu, xi, {Functional::generated(SeqRule::power(-1.0), 2)}), Error);
}

TEST_CASE("covariance_operator examples") {
  const Index d = 4;
  const auto uniform = DiscreteProbabilitySpace::finite(std::vector<double>(d, 1.0 / d));
  const RepresentationResult r =
      covariance_operator(uniform, RandomVariable::table(CMatrix::Identity(d, d)), coordinates(d),
                          DualityPair::dense(d), false);
  CHECK((r.A.matrix() - CMatrix::Identity(d, d) / double(d)).norm() < 1e-12);
  CHECK(r.A.mapping() == Mapping::DualToPrimal);

  // independent +-sigma_k coordinates
  const double sig[3] = {1.0, 0.5, 2.0};
  CMatrix signs(3, 8);
  for (Index a = 0; a < 8; ++a)
    for (Index k = 0; k < 3; ++k) signs(k, a) = ((a >> k) & 1 ? -1.0 : 1.0) * sig[k];
  const auto eighth = DiscreteProbabilitySpace::finite(std::vector<double>(8, 0.125));
  const RepresentationResult rd =
      covariance_operator(eighth, RandomVariable::table(signs), coordinates(3), DualityPair::dense(3));
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j)
      CHECK(std::abs(rd.A.matrix()(i, j) - (i == j ? sig[i] * sig[i] : 0.0)) < 1e-12);

  // values only along e_1: the e_2 direction is degenerate
  CMatrix deg(2, 2);
  deg << 1.0, -1.0, 0.0, 0.0;
  const auto half = DiscreteProbabilitySpace::finite({0.5, 0.5});
  try {
    covariance_operator(half, RandomVariable::table(deg), coordinates(2), DualityPair::dense(2, 4.0));
    FAIL("expected NoLowerBound");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoLowerBound);
  }
}

TEST_CASE("independent_sum examples") {
  const auto half = DiscreteProbabilitySpace::finite({0.5, 0.5});
  const Report r = independent_sum(half, RandomVariable::table(table({{1, 0}, {-1, 0}})), half,
                                   RandomVariable::table(table({{0, 1}, {0, -1}})));
  CHECK(r.passed());
  CHECK(r.data()["atoms"][2] == 4);

  random::Engine rng(11);
  const RandomVariable xi = RandomVariable::table(random::gaussian_matrix(rng, 3, 5));
  const auto mu = DiscreteProbabilitySpace::finite({0.1, 0.2, 0.3, 0.25, 0.15});
  const Report zero = independent_sum(mu, xi, DiscreteProbabilitySpace::finite({1.0}),
                                      RandomVariable::table(CMatrix::Zero(3, 1)));
  CHECK(zero.passed());

  const Report diag = independent_sum_diagonal(SeqRule::geometric(0.5), SeqRule::geometric(1.0 / 3.0), 5);
  CHECK(diag.passed());
}

TEST_CASE("independent sums on random product spaces") {
  random::Engine rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const Index d = 1 + trial % 4;
    const Index na = d + 1 + trial % 3, nb = d + 1 + (trial * 7) % 4;
    auto weights = [&](Index n) {
      std::vector<double> w(n);
      double s = 0.0;
      for (double& x : w) s += (x = random::uniform(rng, 0.1, 1.0));
      for (double& x : w) x /= s;
      return DiscreteProbabilitySpace::finite(w);
    };
    const auto mu = weights(na), nu = weights(nb);
    const Report r = independent_sum(mu, RandomVariable::table(random::gaussian_matrix(rng, d, na)), nu,
                                     RandomVariable::table(random::gaussian_matrix(rng, d, nb)));
    CHECK_MESSAGE(r.passed(), "trial " << trial << ": " << r.to_json().dump());
  }
}
