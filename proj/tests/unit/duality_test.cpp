#include <doctest.h>

#include "formcalc/duality.hpp"
#include "formcalc/random.hpp"
#include "oracles.hpp"

using namespace formcalc;
using cd = std::complex<double>;

TEST_CASE("pairing examples") {
  const cd i(0, 1);
  CVector e1 = CVector::Zero(2);
  e1(0) = 1.0;
  CHECK(std::abs(pair(Functional::dense(e1), Vector::dense(e1)) - cd(1.0)) < 1e-15);
  CHECK(std::abs(pair(Functional::dense(e1), Vector::dense(i * e1)) - (-i)) < 1e-15);

  CVector v(2), x(2);
  v << 1.0, 2.0;
  x << 1.0, cd(1.0, 1.0);
  const cd expected = oracle::pairing(v, x);
  CHECK(std::abs(expected - cd(3.0, -2.0)) < 1e-15);
  CHECK(std::abs(pair(Functional::dense(v), Vector::dense(x)) - expected) < 1e-15);
}

TEST_CASE("norm examples") {
  CVector x(2);
  x << 3.0, 4.0;
  CHECK(norm(Vector::dense(x), 2.0) == doctest::Approx(5.0).epsilon(1e-14));
  CVector ones = CVector::Ones(3);
  CHECK(norm(Vector::dense(ones), 3.0) == doctest::Approx(std::cbrt(3.0)).epsilon(1e-14));
  CVector e = CVector::Zero(4);
  e(2) = 1.0;
  for (double p : {1.5, 2.0, 3.0, 7.0}) CHECK(norm(Vector::dense(e), p) == doctest::Approx(1.0));
}

TEST_CASE("pairing is linear in v and conjugate-linear in x") {
  random::Engine rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 1 + trial % 7;
    const CVector v = random::gaussian_vector(rng, n), x = random::gaussian_vector(rng, n),
                  y = random::gaussian_vector(rng, n);
    const cd alpha = random::gaussian_complex(rng);
    const Functional fv = Functional::dense(v);
    const cd lhs = pair(fv, Vector::dense(alpha * x + y));
    const cd rhs = std::conj(alpha) * pair(fv, Vector::dense(x)) + pair(fv, Vector::dense(y));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
    const Vector vx = Vector::dense(x);
    CHECK(pair(vx, fv) == std::conj(pair(fv, vx)));
  }
}

TEST_CASE("Hoelder inequality on random samples") {
  random::Engine rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const double p = random::uniform(rng, 1.1, 6.0);
    const double q = p / (p - 1.0);
    const CVector v = random::gaussian_vector(rng, 6), x = random::gaussian_vector(rng, 6);
    const double lhs = std::abs(pair(Functional::dense(v), Vector::dense(x)));
    CHECK(lhs <= norm(Functional::dense(v), q) * norm(Vector::dense(x), p) * (1 + 1e-10));
  }
}

TEST_CASE("duality pair validation") {
  CHECK_THROWS_AS(DualityPair::dense(2, 1.0), Error);
  CHECK_THROWS_AS(DualityPair::dense(0, 2.0), Error);
  const DualityPair dp = DualityPair::dense(3, 4.0);
  CHECK(dp.q() == doctest::Approx(4.0 / 3.0));
  CHECK(dp.dual().q() == doctest::Approx(4.0));
}

TEST_CASE("backend mismatch is rejected") {
  const Functional v = Functional::dense(CVector::Ones(2));
  CHECK_THROWS_AS(pair(v, Vector::finite(CVector::Ones(2))), Error);
  CHECK_THROWS_AS(pair(v, Vector::dense(CVector::Ones(3))), Error);
}

TEST_CASE("sequence pairing certifies the tail") {
  // v_n = 2^{-n}, x_n = 1/n: sum 2^{-n}/n = ln 2
  const Functional v = Functional::generated(SeqRule::geometric(0.5), 10);
  const Vector x = Vector::generated(SeqRule::power(-1.0), 10);
  const Pairing pr = pair_certified(v, x);
  CHECK(std::abs(pr.value - cd(std::log(2.0))) < 1e-12);
  CHECK(pr.tail_bound <= 1e-12);

  // ||(1/n)||_2 = pi / sqrt(6)
  CHECK(norm(x, 2.0) == doctest::Approx(M_PI / std::sqrt(6.0)).epsilon(1e-10));

  // harmonic pairing diverges: cannot certify
  const Functional h = Functional::generated(SeqRule::constant(1.0), 5);
  CHECK_THROWS_AS(pair_certified(h, x), Error);
}

TEST_CASE("finitely supported sequences pair exactly") {
  CVector a(3), b(2);
  a << 1.0, 2.0, 3.0;
  b << cd(0, 1), 1.0;
  CHECK(std::abs(pair(Functional::finite(a), Vector::finite(b)) - cd(2.0, -1.0)) < 1e-15);
}
