// Acceptance battery: one line per criterion, non-zero exit when any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

#include "formcalc/covariance.hpp"
#include "formcalc/elliptic.hpp"
#include "formcalc/factorization.hpp"
#include "formcalc/formsum.hpp"
#include "formcalc/friedrichs.hpp"
#include "formcalc/random.hpp"
#include "oracles.hpp"

using namespace formcalc;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) detail << "FIRST FAILURE: " << what << "; ";
    ok = ok && cond;
  }
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

double rel(const CMatrix& m, const CMatrix& ref) { return (m - ref).norm() / std::max(1.0, ref.norm()); }

DenseOperator op(const CMatrix& m) { return DenseOperator::from_matrix(m); }
DenseOperator endo(const CMatrix& m) { return DenseOperator::from_matrix(m, Mapping::PrimalToPrimal); }

// ---------------------------------------------------------------------------

void c1(Outcome& o) {
  random::Engine rng(1);
  double ab = 0, ba = 0, sa = 0, bn = 0, am = 0;
  for (int t = 0; t < 200; ++t) {
    const Index n = 1 + t % 12;
    const CMatrix g = random::hermitian_pd(rng, n, 0.3, 6.0);
    const RepresentationResult r =
        associated_operator(SesquilinearForm::on_standard_basis(g), DualityPair::dense(n));
    const CMatrix a = r.A.matrix(), b = r.B.matrix(), id = CMatrix::Identity(n, n);
    ab = std::max(ab, (a * b - id).norm());
    ba = std::max(ba, (b * a - id).norm());
    sa = std::max(sa, (a - a.adjoint()).norm() / a.norm());
    am = std::max(am, rel(a, g.transpose()));  // t(x, y) = (A x, y) fixes A = G^T
    // oracle: ||B||_2 = 1 / lambda_min(G), gamma = lambda_min(G)
    const double gamma = oracle::smallest_eigenvalue(g);
    const double norm_b = Eigen::JacobiSVD<CMatrix>(b).singularValues()(0);
    bn = std::max(bn, norm_b - 1.0 / gamma);
    o.expect(std::abs(r.gamma.gamma - gamma) <= 1e-10 * gamma, "gamma at trial " + std::to_string(t));
  }
  o.expect(ab <= 1e-10, "AB = I");
  o.expect(ba <= 1e-10, "BA = I");
  o.expect(sa <= 1e-12, "A self-adjoint");
  o.expect(bn <= 1e-8, "||B|| <= 1/gamma + 1e-8");
  o.expect(am <= 1e-10, "A = G^T");
  o.detail << "200 forms; |AB-I| " << sci(ab) << ", |BA-I| " << sci(ba) << ", |A-A*| " << sci(sa)
           << ", ||B||-1/gamma " << sci(bn);
}

void c2(Outcome& o) {
  struct Family {
    const char* name;
    SeqRule a;
    double inf;  // oracle: a_1 for increasing coefficients
    // probes y and the oracle verdict for sum |a_n y_n|^2 < inf
    std::vector<std::pair<SeqRule, bool>> probes;
  };
  std::vector<Family> families;
  {
    Family f{"n^2", SeqRule::power(2.0), 1.0, {}};
    // sum n^{4 - 2s}: converges iff s > 5/2
    for (double s : {0.0, 0.5, 1.0, 1.5, 2.0, 2.25, 2.4, 2.5, 2.51, 2.6, 2.75, 3.0, 3.5, 4.0, 5.0, 6.0, 1.25, 2.45, 2.55, 8.0})
      f.probes.push_back({SeqRule::power(-s), s > 2.5});
    families.push_back(std::move(f));
  }
  {
    Family f{"e^n", SeqRule::exponential(1.0), std::exp(1.0), {}};
    // sum e^{2(1 - t) n}: converges iff t > 1; polynomial probes never do
    for (double t : {0.0, 0.5, 0.9, 1.0, 1.01, 1.1, 1.5, 2.0, 3.0, 0.99, 1.25, 5.0})
      f.probes.push_back({SeqRule::exponential(-t), t > 1.0});
    for (double s : {1.0, 2.0, 4.0, 8.0}) f.probes.push_back({SeqRule::power(-s), false});
    for (double r : {0.3, 0.36, 0.37, 0.4}) f.probes.push_back({SeqRule::geometric(r), r * std::exp(1.0) < 1.0});
    families.push_back(std::move(f));
  }
  {
    Family f{"1.5^n", SeqRule::geometric(1.5), 1.5, {}};
    // ratio test: (1.5 r)^2 < 1 iff r < 2/3
    for (double r : {0.1, 0.3, 0.5, 0.6, 0.65, 0.66, 0.7, 0.8, 1.0, 0.2, 0.4, 0.55, 0.75, 0.9})
      f.probes.push_back({SeqRule::geometric(r), r < 2.0 / 3.0});
    f.probes.push_back({SeqRule::geometric(2.0 / 3.0), false});
    for (double s : {0.5, 2.0, 10.0}) f.probes.push_back({SeqRule::power(-s), false});
    f.probes.push_back({SeqRule::geometric(0.5, 3.0) + SeqRule::geometric(0.6), true});
    f.probes.push_back({SeqRule::geometric(0.5) + SeqRule::geometric(0.7), false});
    families.push_back(std::move(f));
  }
  int probes = 0;
  for (const auto& f : families) {
    const DenseOperator a = DenseOperator::diagonal(f.a, 12, DomainRule::FinitelySupported);
    const FriedrichsResult fr = friedrichs(a, DualityPair::sequence(12));
    const Report rep = verify_friedrichs(a, fr);
    o.expect(rep.passed(), std::string(f.name) + ": extension report");
    o.expect(fr.extension_residual <= 1e-10, std::string(f.name) + ": A_F extends a");
    o.expect(std::abs(fr.gamma_preserved.gamma - fr.gamma_input.gamma) <= 1e-10, std::string(f.name) + ": bound kept");
    o.expect(std::abs(fr.gamma_input.gamma - f.inf) <= 1e-10 * f.inf, std::string(f.name) + ": bound value");
    o.expect(f.probes.size() >= 20, std::string(f.name) + ": probe count");
    for (const auto& [y, in] : f.probes) {
      ++probes;
      o.expect(in_domain(fr.A_F, Vector::generated(y, 3)) == in, std::string(f.name) + " probe " + y.describe());
    }
  }
  o.detail << "3 generators, " << probes << " domain probes";
}

void c3(Outcome& o) {
  random::Engine rng(3);
  double worst = 0.0;
  int deficient = 0;
  for (int t = 0; t < 200; ++t) {
    const Index n = 2 + t % 9;
    const Index r = t % 3 == 0 ? n : 1 + t % n;
    deficient += r < n;
    const CMatrix a = r < n ? random::hermitian_psd_rank(rng, n, r) : random::hermitian_pd(rng, n);
    const FactorizationResult fr = factorize(op(a));
    worst = std::max(worst, rel(fr.J * fr.J.adjoint(), a));
    o.expect(fr.rank == r, "rank at trial " + std::to_string(t));
  }
  o.expect(worst <= 1e-10, "JJ* = A");
  double hc = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Index n = 2 + t % 7;
    const CMatrix a = random::hermitian_psd_rank(rng, n, 1 + t % n);
    const CVector y = random::gaussian_vector(rng, n);
    // oracle: ||A^{1/2} y||^2 from an independent eigendecomposition
    Eigen::SelfAdjointEigenSolver<CMatrix> es(a);
    const RVector lam = es.eigenvalues().cwiseMax(0.0);
    const CMatrix root = es.eigenvectors() * lam.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
    const double expected = (root * y).squaredNorm();
    const double got = form_on_X(op(a), Vector::dense(y)).value;
    hc = std::max(hc, std::abs(got - expected) / std::max(1.0, expected));
  }
  o.expect(hc <= 1e-8, "form value = ||A^{1/2} y||^2");
  o.detail << "200 instances (" << deficient << " rank-deficient), |JJ*-A| " << sci(worst) << "; 100 samples, "
           << sci(hc);
}

void c4(Outcome& o) {
  random::Engine rng(4);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Index n = 2 + t % 7;
    const CMatrix a = random::hermitian_pd(rng, n);
    const CVector y = random::gaussian_vector(rng, n);
    const Index k = t % 2 ? n : std::max<Index>(1, n - 1 - t % 3);
    const CMatrix z = k == n ? CMatrix::Identity(n, n) : random::gaussian_matrix(rng, n, k);
    const DenseOperator d = k == n ? op(a) : DenseOperator::on_domain(z, a * z);
    // oracle: sup |w^* c|^2 over c^* F c <= 1 with F = Z^* A Z and w = Z^* A y
    const double expected = oracle::constrained_sup(z.adjoint() * a * z, z.adjoint() * a * y);
    const double got = form_on_X(d, Vector::dense(y)).value;
    worst = std::max(worst, std::abs(got - expected) / std::max(1.0, expected));
  }
  o.expect(worst <= 1e-6, "dense form values");

  // diagonal a_n = n^alpha against y_n = n^{-s}: the value is sum n^{alpha - 2s},
  // finite iff 2s - alpha > 1 (p-series test)
  int pairs = 0;
  double value_err = 0.0;
  for (double alpha : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0}) {
    const DenseOperator a = DenseOperator::diagonal(SeqRule::power(alpha), 8, DomainRule::FinitelySupported);
    const double s_in = (alpha + 1.0) / 2.0 + 0.75, s_out = (alpha + 1.0) / 2.0;
    const FormValue in = form_on_X(a, Vector::generated(SeqRule::power(-s_in), 4));
    const FormValue out = form_on_X(a, Vector::generated(SeqRule::power(-s_out), 4));
    o.expect(in.finite(), "in-pair alpha " + std::to_string(alpha));
    o.expect(!out.finite(), "out-pair alpha " + std::to_string(alpha));
    o.expect(out.series.has_value() && out.series->verdict == SeriesVerdict::Diverges,
             "divergence certificate alpha " + std::to_string(alpha));
    if (in.finite()) value_err = std::max(value_err, std::abs(in.value - oracle::zeta(2.0 * s_in - alpha)) / in.value);
    ++pairs;
  }
  o.expect(value_err <= 1e-6, "series values against zeta");
  o.detail << "100 dense instances, worst rel " << sci(worst) << "; " << pairs << " in/out pairs, value err "
           << sci(value_err);
}

void c5(Outcome& o) {
  EllipticProblem pr;
  pr.b = Expression::constant(1.0);
  int probes = 0;
  for (int m : {16, 32, 64}) {
    const Mesh mesh = Mesh::uniform(1.0, m);
    const DirichletNeumannReport r = dirichlet_vs_neumann(pr, mesh, standard_probes(mesh, 8, m));
    o.expect(r.ordering.verdict == Order::AGeqB, "Dirichlet >= Neumann at m = " + std::to_string(m));
    for (const auto& p : r.probes) {
      ++probes;
      o.expect(p.dirichlet >= p.neumann * (1.0 - 1e-9) - 1e-12, "probe " + p.origin + " at m = " + std::to_string(m));
    }
  }
  const double lambda = discrete_poincare_constant(Mesh::uniform(1.0, 64));
  const double gap = std::abs(lambda / (kPi * kPi) - 1.0);
  o.expect(gap <= 0.02, "Poincare constant within 2%");
  o.detail << probes << " probes over h = 1/16, 1/32, 1/64; lambda_min(h = 1/64) = " << lambda << " (gap " << sci(gap)
           << ")";
}

void c6(Outcome& o) {
  random::Engine rng(6);
  double t4 = 0, ext = 0, col = 0, oracle_gap = 0;
  for (int t = 0; t < 100; ++t) {
    const Index n = 2 + t % 6;
    const CMatrix a = random::hermitian_pd(rng, n);
    const CMatrix b = t % 2 ? random::hermitian_psd_rank(rng, n, 1 + n / 2) : random::hermitian_pd(rng, n);
    if (t % 4 == 3) {
      const CMatrix z = random::gaussian_matrix(rng, n, std::max<Index>(1, n - 1));
      const FormSumResult r = form_sum(DenseOperator::on_domain(z, a * z), DenseOperator::on_domain(z, b * z));
      t4 = std::max(t4, r.joint_residual);
      ext = std::max(ext, r.extension_residual);
      continue;
    }
    const FormSumResult r = form_sum(op(a), op(b), {false, 16, static_cast<std::uint64_t>(t)});
    t4 = std::max(t4, r.joint_residual);
    ext = std::max(ext, r.extension_residual);
    col = std::max(col, r.collapse_residual);
    // oracle: [J^* y]^2 = ||J^* y||^2 against ((A + B) y, y)
    for (int k = 0; k < 4; ++k) {
      const CVector y = random::gaussian_vector(rng, n);
      const double lhs = (r.joint.adjoint() * y).squaredNorm();
      const double rhs = oracle::pairing((a + b) * y, y).real();
      oracle_gap = std::max(oracle_gap, std::abs(lhs - rhs) / std::max(1.0, rhs));
    }
  }
  // everywhere-defined collapse on a fixed pair
  CMatrix da = CMatrix::Zero(2, 2), db = CMatrix::Zero(2, 2);
  da.diagonal() << 1, 2;
  db.diagonal() << 3, 4;
  const double fixed = rel(form_sum(op(da), op(db)).AB.matrix(), da + db);
  o.expect(t4 <= 1e-9, "[J*y]^2 = ((A+B)y, y)");
  o.expect(oracle_gap <= 1e-9, "joint factor oracle");
  o.expect(ext <= 1e-9, "A + B inside the form sum");
  o.expect(col <= 1e-12 && fixed <= 1e-12, "collapse");
  o.detail << "100 pairs; identity " << sci(t4) << ", oracle " << sci(oracle_gap) << ", extension " << sci(ext)
           << ", collapse " << sci(std::max(col, fixed));
}

void c7(Outcome& o) {
  random::Engine rng(7);
  double l4 = 0, herm = 0, eig_gap = 0, eig_imag = 0, res = 0;
  int failures = 0;
  for (int t = 0; t < 50; ++t) {
    const Index n = 2 + t % 5;
    const CMatrix a = random::hermitian_pd(rng, n);
    CMatrix k = random::gaussian_matrix(rng, n, n);
    k = (k + k.adjoint()).eval();
    const CMatrix e = a.inverse() * k;  // E^* A = K = A E
    const CMatrix b = random::uniform(rng, 0.2, 4.0) * a;
    const CommutantLift l = lift_commutant(op(a), endo(e), t);
    l4 = std::max({l4, l.bound_ratio - 1.0, l.bound_exact - 1.0});
    herm = std::max(herm, (l.E_hat - l.E_hat.adjoint()).norm() / std::max(1.0, l.E_hat.norm()));
    failures += !commutation_formsum(op(a), op(b), endo(e)).passed();
    // oracle eigenvalues from a general complex eigensolver
    const Eigen::VectorXcd ev_hat = Eigen::ComplexEigenSolver<CMatrix>(l.E_hat).eigenvalues();
    const Eigen::VectorXcd ev_e = Eigen::ComplexEigenSolver<CMatrix>(e).eigenvalues();
    for (Index i = 0; i < ev_hat.size(); ++i) {
      eig_imag = std::max(eig_imag, std::abs(ev_hat(i).imag()));
      double d = INFINITY;
      for (Index j = 0; j < ev_e.size(); ++j) d = std::min(d, std::abs(ev_hat(i) - ev_e(j)));
      eig_gap = std::max(eig_gap, d);
    }
    const double rho = linalg::spectral_radius(e);
    for (double lambda : {rho + 1.0, -rho - 0.5, rho + 3.0}) res = std::max(res, resolvent_residual(op(a), l, lambda));
  }
  o.expect(l4 <= 1e-8, "lift bound");
  o.expect(herm <= 1e-10, "E^ Hermitian");
  o.expect(failures == 0, "E^*(A+B) inside (A+B)E");
  o.expect(eig_imag <= 1e-8 && eig_gap <= 1e-8, "spectrum of E^ real and inside sigma(E)");
  o.expect(res <= 1e-8, "resolvent identity");
  o.detail << "50 triples; bound excess " << sci(std::max(0.0, l4)) << ", Hermitian " << sci(herm) << ", eig gap "
           << sci(eig_gap) << ", resolvent " << sci(res);
}

void c8(Outcome& o) {
  const auto mu = DiscreteProbabilitySpace::exponential(1.5);
  const auto xi = RandomVariable::power_factorial();
  std::vector<Functional> basis;
  for (int k = 0; k < 4; ++k) basis.push_back(Functional::finite(CVector::Unit(4, k)));
  const SesquilinearForm t = covariance_form(mu, xi, basis);
  o.expect(t.min_gram_eigenvalue() >= -1e-12 * t.gram().norm(), "covariance Gram PSD");
  // oracle: E xi_1 conj(xi_2) = c sum n^3 e^{-1.5 n} / 2 with c = e^{1.5} - 1
  const double c = std::exp(1.5) - 1.0;
  const double m12 = c * oracle::partial_sum([](long n) { return std::pow(n, 3) * std::exp(-1.5 * n) / 2.0; }, 1, 200);
  o.expect(std::abs(t.gram()(0, 1).real() - m12) <= 1e-10 * m12, "Gram entry against the series oracle");

  const ClosednessWitness w = covariance_closedness(
      mu, xi, {Functional::generated(SeqRule::geometric(0.5), 2), Functional::generated(SeqRule::geometric(0.25), 2),
               Functional::finite(CVector::Ones(6))});
  for (const auto& run : w.runs) {
    for (std::size_t i = 1; i < run.tails.size(); ++i) o.expect(run.tails[i] <= run.tails[i - 1], "tails decrease");
    o.expect(run.tails.back() <= 1e-10 * std::max(1.0, run.limit_energy), "tails reach zero");
  }

  random::Engine rng(8);
  int in = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const Index len = 1 + trial % 15;
    in += in_second_moment_domain(mu, xi, Functional::finite(random::gaussian_vector(rng, len)));
  }
  o.expect(in == 30, "finitely supported functionals in D");
  const SecondMomentCertificate out = second_moment(mu, xi, Functional::generated(SeqRule::power(-1.0), 4));
  o.expect(out.verdict == Membership::Out, "f_k = 1/k outside D");
  o.expect(out.series && out.series->verdict == SeriesVerdict::Diverges, "divergence certificate");
  bool growing = out.growth.size() >= 2;
  for (std::size_t i = 1; i < out.growth.size(); ++i) growing = growing && out.growth[i].second > out.growth[i - 1].second;
  o.expect(growing, "partial sums grow");
  o.detail << "Gram PSD, " << w.runs.size() << " closedness runs, " << in << "/30 heads in D, 1/k out ("
           << out.series->reason << ")";
}

void c9(Outcome& o) {
  random::Engine rng(9);
  double worst = 0.0;
  int failed = 0;
  for (int t = 0; t < 50; ++t) {
    const Index d = 1 + t % 4;
    const Index na = d + 1 + t % 3, nb = d + 1 + (t * 5) % 4;
    const auto weights = [&](Index n) {
      std::vector<double> w(n);
      double s = 0.0;
      for (double& x : w) s += (x = random::uniform(rng, 0.1, 1.0));
      for (double& x : w) x /= s;
      return w;
    };
    const auto wa = weights(na), wb = weights(nb);
    const CMatrix xa = random::gaussian_matrix(rng, d, na), xb = random::gaussian_matrix(rng, d, nb);
    const Report r = independent_sum(DiscreteProbabilitySpace::finite(wa), RandomVariable::table(xa),
                                     DiscreteProbabilitySpace::finite(wb), RandomVariable::table(xb));
    failed += !r.passed();
    worst = std::max(worst, r.max_residual());

    // oracle: centered second moments by direct enumeration of the product space
    const auto cov = [](const std::vector<double>& w, const CMatrix& x) {
      CVector m = CVector::Zero(x.rows());
      for (Index i = 0; i < x.cols(); ++i) m += w[i] * x.col(i);
      CMatrix c = CMatrix::Zero(x.rows(), x.rows());
      for (Index i = 0; i < x.cols(); ++i) c += w[i] * (x.col(i) - m) * (x.col(i) - m).adjoint();
      return c;
    };
    std::vector<double> wp;
    CMatrix xp(d, na * nb);
    for (Index i = 0; i < na; ++i)
      for (Index j = 0; j < nb; ++j) {
        wp.push_back(wa[i] * wb[j]);
        xp.col(i * nb + j) = xa.col(i) + xb.col(j);
      }
    const CMatrix sum = cov(wp, xp), parts = cov(wa, xa) + cov(wb, xb);
    worst = std::max(worst, rel(sum, parts));
    const FormSumResult fs = form_sum(op(cov(wa, xa).transpose()), op(cov(wb, xb).transpose()), {true, 16, 1});
    worst = std::max(worst, rel(fs.AB.matrix(), sum.transpose()));
  }
  o.expect(failed == 0, "library reports");
  o.expect(worst <= 1e-10, "Cov(xi + eta) = form sum");
  o.detail << "50 product spaces, worst " << sci(worst);
}

void c10(Outcome& o) {
  EllipticProblem lap;
  const auto rows = convergence_study(
      lap, [](double x) { return kPi * kPi * std::sin(kPi * x); }, [](double x) { return std::sin(kPi * x); },
      {16, 32, 64, 128});
  std::ostringstream ratios;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    o.expect(rows[i].ratio >= 3.6 && rows[i].ratio <= 4.4, "ratio at m = " + std::to_string(rows[i].elements));
    ratios << (i > 1 ? "/" : "") << std::fixed << std::setprecision(3) << rows[i].ratio;
  }

  struct Case {
    const char* a;
    const char* b;
    std::function<double(double)> g;
    std::function<double(double)> exact;  // empty when no closed form is used
  };
  const std::vector<Case> cases{
      {"1", "0", [](double) { return 1.0; }, [](double x) { return x * (1 - x) / 2; }},
      {"1", "0", [](double x) { return 6 * x - 2; }, [](double x) { return x * x * (1 - x); }},
      {"1", "0", [](double x) { return 4 * kPi * kPi * std::sin(2 * kPi * x); },
       [](double x) { return std::sin(2 * kPi * x); }},
      {"1", "1", [](double x) { return (kPi * kPi + 1) * std::sin(kPi * x); }, [](double x) { return std::sin(kPi * x); }},
      {"1 + x", "0", [](double) { return 1.0; },
       [](double x) { return std::log1p(x) / std::log(2.0) - x; }},
      {"1", "0", [](double x) { return std::exp(x); }, {}},
      {"2 + sin(x)", "x", [](double x) { return std::cos(3 * x); }, {}},
      {"1", "0", [](double x) { return std::pow(x, -0.3); }, {}},
      {"1", "x^(-0.5)", [](double) { return 1.0; }, {}},
      {"1", "x^(-0.9)", [](double x) { return x; }, {}},
  };
  const Mesh mesh = Mesh::uniform(1.0, 128);
  double worst_res = 0.0, worst_err = 0.0;
  for (const auto& cs : cases) {
    EllipticProblem pr;
    pr.a = Expression::parse(cs.a);
    pr.b = Expression::parse(cs.b);
    const WeakSolution s = weak_solve(pr, mesh, cs.g);
    worst_res = std::max(worst_res, s.residual);
    o.expect(s.residual <= 1e-10 && s.nodal.allFinite(), std::string("solve with a = ") + cs.a + ", b = " + cs.b);
    if (cs.exact) worst_err = std::max(worst_err, l2_error(mesh, s.nodal, cs.exact));
  }
  o.expect(worst_err <= 1e-3, "manufactured L2 errors");
  o.detail << "ratios " << ratios.str() << "; " << cases.size() << " data rules, residual " << sci(worst_res)
           << ", L2 err " << sci(worst_err);
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void c11(Outcome& o) {
  const fs::path tmp = fs::temp_directory_path() / ("formcalc-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(tmp);
  const std::string cli = FORMCALC_CLI;
  const auto t0 = std::chrono::steady_clock::now();
  const int first = shell(cli + " suite all --seed 1 -q --out " + (tmp / "a").string() + " > /dev/null");
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const int second = shell(cli + " suite all --seed 1 -q -j 4 --out " + (tmp / "b").string() + " > /dev/null");
  o.expect(first == 0 && second == 0, "suite(all) matches every expectation");
  const std::string sa = slurp(tmp / "a" / "summary.json"), sb = slurp(tmp / "b" / "summary.json");
  o.expect(!sa.empty() && sa == sb, "byte-identical summaries");
  o.expect(wall < 60.0, "suite(all) under 60 s");

  const json s = json::parse(sa.empty() ? "{}" : sa);
  int missing = 0;
  for (const char* tag : {"Thm1", "Lem1", "Thm2", "Lem2", "Lem3", "Def-Order", "Thm3", "Thm4", "Eq7", "Lem4", "Lem5",
                          "Thm5", "Thm6", "Thm7", "Thm8", "Elliptic"})
    missing += !(s.contains("coverage") && s["coverage"].contains(tag) && !s["coverage"][tag].empty());
  o.expect(missing == 0, "coverage map complete");

  std::map<std::string, int> negatives;
  int controls = 0;
  for (const auto& e : s.value("scenarios", json::array()))
    if (e["expect"] == "fail") {
      ++controls;
      o.expect(e["verdict"] == "fail", "negative control " + e["id"].get<std::string>() + " fails");
      negatives[e["id"].get<std::string>().substr(0, e["id"].get<std::string>().find('/'))]++;
    }
  o.expect(negatives.size() == 6, "every suite holds a negative control");

  const std::string dir = SCENARIO_DIR;
  const int nc = shell(cli + " run " + dir + "/negative_controls.json -q --out " + (tmp / "nc").string() + " > /dev/null");
  const int eq7 = shell(cli + " run " + dir + "/broken_eq7.json -q --out " + (tmp / "eq7").string() + " > /dev/null");
  const int empty = shell(cli + " run " + dir + "/empty.json -q --out " + (tmp / "e").string() + " > /dev/null");
  const int t4 = shell(cli + " run " + dir + "/formsum_diagonal.json -q --out " + (tmp / "t4").string() + " > /dev/null");
  o.expect(nc == 2 && eq7 == 2, "negative controls exit 2");
  o.expect(empty == 0 && t4 == 0, "empty and diagonal form-sum files exit 0");
  fs::remove_all(tmp);
  o.detail << s.value("scenarios", json::array()).size() << " scenarios in " << std::fixed << std::setprecision(2)
           << wall << " s, " << 16 - missing << "/16 tags covered, " << controls
           << " negative controls; run exits: controls " << nc << ", broken commutant " << eq7 << ", empty " << empty;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    double limit;  // seconds, 0 when no runtime bound applies
    void (*fn)(Outcome&);
  };
  const std::vector<Criterion> criteria{
      {1, "representation of PD forms", 5.0, c1},
      {2, "Friedrichs extension of diagonal generators", 2.0, c2},
      {3, "factorization JJ* = A", 0.0, c3},
      {4, "form of A on X", 0.0, c4},
      {5, "Dirichlet vs Neumann ordering", 0.0, c5},
      {6, "form sums", 0.0, c6},
      {7, "commutant lifts and form sums", 10.0, c7},
      {8, "covariance example", 2.0, c8},
      {9, "covariance of independent sums", 0.0, c9},
      {10, "elliptic weak solutions", 10.0, c10},
      {11, "CLI suites", 60.0, c11},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.fn(o);
    } catch (const std::exception& e) {
      o.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit > 0.0) o.expect(secs < c.limit, "runtime");
    failed += !o.ok;
    std::printf("[%s] criterion %2d  %-44s %7.3f s  %s\n", o.ok ? "PASS" : "FAIL", c.id, c.title, secs,
                o.detail.str().c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
