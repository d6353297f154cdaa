#include <doctest.h>

#include "formcalc/factorization.hpp"
#include "formcalc/friedrichs.hpp"
#include "formcalc/random.hpp"
#include "oracles.hpp"

using namespace formcalc;

namespace {
DenseOperator seq_diag(const SeqRule& r, DomainRule d = DomainRule::FinitelySupported) {
  return DenseOperator::diagonal(r, 12, d);
}
}  // namespace

TEST_CASE("friedrichs of the identity on finitely supported sequences") {
  const DualityPair pair = DualityPair::sequence(12);
  const FriedrichsResult fr = friedrichs(seq_diag(SeqRule::constant(1.0)), pair);
  CHECK(fr.A_F.diagonal()->domain == DomainRule::Maximal);
  CHECK(verify_friedrichs(seq_diag(SeqRule::constant(1.0)), fr).passed());
  CHECK(in_domain(fr.A_F, Vector::generated(SeqRule::power(-1.0), 4)));  // l2 sequence
  CHECK_FALSE(in_domain(fr.A_F, Vector::generated(SeqRule::power(-0.5), 4)));
}

TEST_CASE("friedrichs of diag(n^2)") {
  const DenseOperator a = seq_diag(SeqRule::power(2.0));
  const FriedrichsResult fr = friedrichs(a, DualityPair::sequence(12));
  CHECK(verify_friedrichs(a, fr).passed());
  CHECK(fr.gamma_input.gamma == doctest::Approx(1.0));
  CHECK(in_domain(fr.A_F, Vector::generated(SeqRule::power(-3.0), 5)));
  CHECK_FALSE(in_domain(fr.A_F, Vector::generated(SeqRule::power(-2.0), 5)));
  CHECK_FALSE(in_domain(a, Vector::generated(SeqRule::power(-3.0), 5)));
  // idempotence
  const FriedrichsResult again = friedrichs(fr.A_F, DualityPair::sequence(12));
  CHECK(again.A_F.diagonal()->coefficients.approx_equal(fr.A_F.diagonal()->coefficients));
  CHECK(again.A_F.diagonal()->domain == fr.A_F.diagonal()->domain);
}

TEST_CASE("friedrichs requires a positive lower bound and symmetry") {
  CHECK_THROWS_AS(friedrichs(seq_diag(SeqRule::power(-1.0)), DualityPair::sequence(12)), Error);
  CHECK_THROWS_AS(friedrichs(seq_diag(SeqRule::power(2.0, std::complex<double>(0, 1))), DualityPair::sequence(12)),
                  Error);
  CMatrix ns(2, 2);
  ns << 2, 1, 0, 2;
  CHECK_THROWS_AS(friedrichs(DenseOperator::from_matrix(ns), DualityPair::dense(2)), Error);
}

TEST_CASE("dense friedrichs of a self-adjoint operator is itself") {
  CMatrix m(2, 2);
  m << 2, 1, 1, 2;
  const DenseOperator a = DenseOperator::from_matrix(m);
  const FriedrichsResult fr = friedrichs(a, DualityPair::dense(2));
  CHECK((fr.A_F.matrix() - m).norm() < 1e-12);
  CHECK(verify_friedrichs(a, fr).passed());
  const FriedrichsResult again = friedrichs(fr.A_F, DualityPair::dense(2));
  CHECK((again.A_F.matrix() - fr.A_F.matrix()).norm() < 1e-10);
}

TEST_CASE("dense friedrichs on random restricted operators") {
  random::Engine rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 2 + trial % 5;
    const CMatrix h = random::hermitian_pd(rng, n);
    const CMatrix z = random::gaussian_matrix(rng, n, n);
    const DenseOperator a = DenseOperator::on_domain(z, h * z);
    const FriedrichsResult fr = friedrichs(a, DualityPair::dense(n));
    CHECK(verify_friedrichs(a, fr).passed());
    CHECK(fr.gamma_preserved.gamma >= fr.gamma_input.gamma - 1e-10);
    const CVector x = random::gaussian_vector(rng, n);
    CHECK(oracle::pairing(fr.A_F.matrix() * x, x).real() >= fr.gamma_input.gamma * x.squaredNorm() * (1 - 1e-10));
  }
}

TEST_CASE("core_check witnesses") {
  const DenseOperator a = seq_diag(SeqRule::power(2.0));
  const FriedrichsResult fr = friedrichs(a, DualityPair::sequence(12));
  CVector head(3);
  head << 1.0, 2.0, 3.0;
  const Report finite = core_check(a, fr, {Vector::finite(head)});
  CHECK(finite.passed());
  CHECK(finite.data()["witnesses"][0]["final_tail"] == 0.0);

  const Report geo = core_check(a, fr, {Vector::generated(SeqRule::geometric(0.5), 1)});
  CHECK(geo.passed());
  const auto& tr = geo.data()["witnesses"][0]["truncations"];
  const long last_n = tr.back()["N"];
  // oracle: sum_{n > N} n^2 4^{-n}
  const double oracle_tail =
      oracle::partial_sum([](long n) { return n * 1.0 * n * std::pow(0.25, n); }, last_n + 1, last_n + 200);
  CHECK(oracle_tail < 1e-8);
  CHECK(last_n <= 30);
  const double prev_tail = tr[tr.size() - 2]["tail"];
  CHECK(prev_tail >= 1e-8 * 0.999);

  const Report cubic = core_check(a, fr, {Vector::generated(SeqRule::power(-3.0), 1)});
  CHECK(cubic.passed());
  const long nc = cubic.data()["witnesses"][0]["truncations"].back()["N"];
  // integral-test oracle: N^{-3}/3 bounds the tail from above, (N+1)^{-3}/3 from below
  const double energy = cubic.data()["witnesses"][0]["energy"];
  CHECK(energy == doctest::Approx(oracle::zeta(4.0)).epsilon(1e-10));
  CHECK(std::pow(nc + 1.0, -3.0) / 3.0 < 1e-8 * energy);
  const long prev_n = cubic.data()["witnesses"][0]["truncations"][cubic.data()["witnesses"][0]["truncations"].size() - 2]["N"];
  CHECK(std::pow(prev_n, -3.0) / 3.0 > 1e-8 * energy * 0.5);

  CHECK_THROWS_AS(core_check(a, fr, {Vector::generated(SeqRule::power(-1.0), 1)}), Error);
}
