#include "formcalc/formsum.hpp"

#include <algorithm>
#include <cmath>

#include "formcalc/random.hpp"

namespace formcalc {
namespace {

double rel(double num, double a, double b) {
  if (num == 0.0) return 0.0;
  return num / std::max({std::abs(a), std::abs(b), 1e-300});
}

double max_ext(const ExtensionResiduals& r) { return std::max(r.subspace, r.action); }

// Sequence rules y in dom AB used as samples of the joint-factor identity.
std::vector<Vector> sequence_samples(const DenseOperator& ab, Index n, std::uint64_t seed, int count) {
  std::vector<Vector> out;
  random::Engine rng(seed);
  const std::vector<SeqRule> candidates = {
      SeqRule::geometric(0.5), SeqRule::geometric(0.2, cplx(0.0, 1.0)), SeqRule::geometric(0.7, cplx(1.0, -1.0)),
      SeqRule::exponential(-2.0) + SeqRule::geometric(0.1, 3.0), SeqRule::power(-3.0), SeqRule::power(-5.0)};
  for (const auto& r : candidates) {
    const Vector y = Vector::generated(r, std::min<Index>(n, 4));
    try {
      if (in_dom_Jstar(ab, y)) out.push_back(y);
    } catch (const Error&) {
    }
  }
  for (int k = 0; k < count; ++k) out.push_back(Vector::finite(random::gaussian_vector(rng, n)));
  return out;
}

FormSumResult sequence_form_sum(const DenseOperator& a, const DenseOperator& b, const FormSumOptions& opts) {
  require(b.diagonal().has_value(), ErrorCode::Unsupported, "sequence-backend form sums need diagonal operands");
  const SeqRule& ra = a.diagonal()->coefficients;
  const SeqRule& rb = b.diagonal()->coefficients;
  const Index n = std::max(a.domain_dimension(), b.domain_dimension());
  FormSumResult out;
  out.gamma_a = lower_bound(SesquilinearForm::diagonal(ra, n), DualityPair::sequence(n));
  require(out.gamma_a.gamma > 0.0 || opts.allow_zero_lower_bound, ErrorCode::NoLowerBound,
          "A has no positive lower bound");
  require(rb.is_real() && rb.certified_infimum() >= 0.0, ErrorCode::Indefinite, "B is not certified positive");
  // H_{A,B} contains every finitely supported vector
  for (Index k = 0; k < n; ++k) {
    const Vector ek = Vector::finite(CMatrix::Identity(n, n).col(k));
    require(in_dom_Jstar(a, ek) && in_dom_Jstar(b, ek), ErrorCode::NotDense, "finitely supported vector outside H_AB");
  }
  out.AB = DenseOperator::diagonal(ra + rb, n, DomainRule::Maximal);
  for (const auto& y : sequence_samples(out.AB, n, opts.seed, opts.samples / 4)) {
    const double lhs = form_on_X(a, y).value + form_on_X(b, y).value;
    const double rhs = form_on_X(out.AB, y).value;
    out.joint_residual = std::max(out.joint_residual, rel(std::abs(lhs - rhs), lhs, rhs));
  }
  out.extension_residual =
      max_ext(extension_residuals(DenseOperator::diagonal(ra + rb, n, DomainRule::FinitelySupported), out.AB));
  return out;
}

}  // namespace

const char* to_string(ClosednessKind k) {
  return k == ClosednessKind::LowerBoundAutomatic ? "lower-bound-automatic" : "sequential";
}

ClosednessWitness is_closed(const SesquilinearForm& t, const std::vector<Vector>& limits) {
  require(t.positive(), ErrorCode::Indefinite, "closedness needs a positive form");
  ClosednessWitness w;
  if (t.backend() == Backend::Dense) {
    w.kind = ClosednessKind::LowerBoundAutomatic;
    w.note = "finite-dimensional domain is complete in the form norm";
    return w;
  }
  w.kind = ClosednessKind::Sequential;
  const SeqRule& weights = t.diagonal()->coefficients;
  for (const auto& x : limits) {
    require(x.backend() == Backend::Sequence, ErrorCode::BackendMismatch, "runs need sequence vectors");
    ClosednessRun run;
    run.limit = x;
    const bool finite = !x.tail_rule() || x.tail_rule()->is_zero();
    const SeqRule energy = finite ? SeqRule{} : weights * x.tail_rule()->squared_modulus();
    // form increments t(x_{k+1} - x_k) over doubling truncations
    std::vector<double> increments;
    long n = std::max<long>(1, x.size());
    for (int k = 0; k <= 10; ++k) {
      long double inc = 0.0L;
      for (long m = n + 1; m <= 2 * n; ++m) inc += weights(m).real() * std::norm(x.at(m));
      increments.push_back(static_cast<double>(inc));
      n *= 2;
    }
    const bool contracts = increments.front() == 0.0 || increments.back() < increments.front();
    require(contracts, ErrorCode::NotClosed, "form-Cauchy increments do not contract over 10 steps");
    const SeriesCertificate cert = certify_series(energy, x.size() + 1);
    require(cert.verdict == SeriesVerdict::Converges, ErrorCode::NotClosed, "limit is not in the form domain");
    long double head = 0.0L;
    for (long m = 1; m <= x.size(); ++m) head += weights(m).real() * std::norm(x.at(m));
    run.limit_energy = static_cast<double>(head) + cert.value();
    n = std::max<long>(1, x.size());
    double prev = INFINITY;
    for (int k = 0; k <= 40; ++k) {
      double tail = 0.0;
      for (long m = n + 1; m <= x.size(); ++m) tail += weights(m).real() * std::norm(x.at(m));
      if (!finite) tail += tail_estimate(energy, std::max<long>(n, x.size())).upper_bound();
      run.truncations.push_back(n);
      run.tails.push_back(tail);
      require(tail <= prev * (1 + 1e-12), ErrorCode::NotClosed, "form tails are not monotone");
      prev = tail;
      if (tail <= 1e-12 * std::max(1.0, run.limit_energy)) break;
      n *= 2;
    }
    require(run.tails.back() <= 1e-10 * std::max(1.0, run.limit_energy), ErrorCode::NotClosed,
            "form tails did not reach zero");
    w.runs.push_back(std::move(run));
  }
  return w;
}

FormSumResult form_sum(const DenseOperator& a, const DenseOperator& b, const FormSumOptions& opts) {
  require(a.backend() == b.backend(), ErrorCode::BackendMismatch, "operands live on different backends");
  if (a.diagonal()) return sequence_form_sum(a, b, opts);
  require(a.ambient_dimension() == b.ambient_dimension(), ErrorCode::BackendMismatch, "ambient dimensions differ");
  require(symmetry_residual(a) <= 1e-10, ErrorCode::NotSelfAdjoint, "A is not self-adjoint");
  const Index n = a.ambient_dimension();
  FormSumResult out;
  out.gamma_a = lower_bound(form_of(a), DualityPair::dense(n));
  require(out.gamma_a.gamma > 0.0 || opts.allow_zero_lower_bound, ErrorCode::NoLowerBound,
          "A has no positive lower bound");
  const FactorizationResult fa = factorize(a), fb = factorize(b);  // B closed positive (finite dimension)

  const CMatrix w = linalg::span_intersection(a.domain_basis(), b.domain_basis());
  out.dim_hab = w.cols();
  out.dim_effective = linalg::numerical_rank(a.domain_basis());
  require(out.dim_hab == out.dim_effective && out.dim_hab > 0, ErrorCode::NotDense,
          "dom J_A* ∩ dom t_B is not dense in the effective ambient space");

  out.rank_a = fa.rank;
  out.rank_b = fb.rank;
  out.joint.resize(n, fa.rank + fb.rank);
  out.joint << fa.J, fb.J;
  const CMatrix p = out.joint * out.joint.adjoint();
  const CMatrix gram = (w.adjoint() * p * w).transpose();  // (t_A + t_B)(w_i, w_j)
  const RepresentationResult rep = associated_operator(SesquilinearForm::dense(w, gram), DualityPair::dense(n));
  out.AB = rep.A;

  random::Engine rng(opts.seed);
  std::vector<CVector> ys;
  for (Index j = 0; j < w.cols(); ++j) ys.push_back(w.col(j));
  for (int k = 0; k < opts.samples; ++k) ys.push_back(w * random::gaussian_vector(rng, w.cols()));
  for (const auto& y : ys) {
    const double lhs = (out.joint.adjoint() * y).squaredNorm();  // [J^*y, J^*y]
    const double rhs = y.dot(out.AB.apply(y)).real();            // (AB y, y)
    out.joint_residual = std::max(out.joint_residual, rel(std::abs(lhs - rhs), lhs, rhs));
  }

  CMatrix sum_action(n, w.cols());
  for (Index j = 0; j < w.cols(); ++j) sum_action.col(j) = a.apply(w.col(j)) + b.apply(w.col(j));
  out.extension_residual = max_ext(extension_residuals(DenseOperator::on_domain(w, sum_action), out.AB));
  if (a.full_domain() && b.full_domain()) {
    const CMatrix direct = a.matrix() + b.matrix();
    out.collapse_residual = (out.AB.matrix() - direct).norm() / linalg::scale_of(direct);
  }
  return out;
}

JointFactorization joint_factorize(const DenseOperator& a, const DenseOperator& b, const FormSumOptions& opts) {
  const FormSumResult fs = form_sum(a, b, opts);
  JointFactorization jf;
  if (a.diagonal()) {
    // J = diag(sqrt a_n) ⊕ diag(sqrt b_n): J J^* has coefficients a_n + b_n
    const SeqRule& ra = a.diagonal()->coefficients;
    const SeqRule& rb = b.diagonal()->coefficients;
    const SeqRule& rab = fs.AB.diagonal()->coefficients;
    double worst = 0.0;
    for (long k = 1; k <= fs.AB.domain_dimension(); ++k) {
      const double jj = std::pow(std::sqrt(ra(k).real()), 2) + std::pow(std::sqrt(rb(k).real()), 2);
      worst = std::max(worst, rel(std::abs(jj - rab(k).real()), jj, rab(k).real()));
    }
    jf.identity_residual = (ra + rb).approx_equal(rab) ? worst : 1.0;
    jf.extension_residual = fs.extension_residual;
    return jf;
  }
  const FactorizationResult fa = factorize(a), fb = factorize(b);
  jf.J = fs.joint;
  const CMatrix w = fs.AB.domain_basis();
  for (Index j = 0; j < w.cols(); ++j) {
    const CVector z = w.col(j);
    const CVector js = jf.J.adjoint() * z;
    const CVector az = fa.coordinates_of_image(linalg::fit_in_span(fa.domain_basis, z).coefficients);
    const CVector bz = fb.coordinates_of_image(linalg::fit_in_span(fb.domain_basis, z).coefficients);
    CVector expected(js.size());
    expected << az, bz;
    jf.jstar_residual = std::max(jf.jstar_residual, (js - expected).norm() / std::max(1.0, expected.norm()));
  }
  const DenseOperator jj = DenseOperator::on_domain(w, jf.J * (jf.J.adjoint() * w));
  jf.identity_residual = std::max(max_ext(extension_residuals(fs.AB, jj)), max_ext(extension_residuals(jj, fs.AB)));
  CMatrix sum_action(w.rows(), w.cols());
  for (Index j = 0; j < w.cols(); ++j) sum_action.col(j) = a.apply(w.col(j)) + b.apply(w.col(j));
  jf.extension_residual = max_ext(extension_residuals(DenseOperator::on_domain(w, sum_action), jj));
  return jf;
}

namespace {

// Coefficients M with E Z = Z M; returns the worst relative fit residual.
double invariance(const CMatrix& ez, const CMatrix& z, CMatrix& coef) {
  coef.resize(z.cols(), z.cols());
  double worst = 0.0;
  for (Index j = 0; j < z.cols(); ++j) {
    const linalg::SpanFit fit = linalg::fit_in_span(z, ez.col(j));
    coef.col(j) = fit.coefficients;
    worst = std::max(worst, fit.residual);
  }
  return worst;
}

}  // namespace

CommutantLift lift_commutant(const DenseOperator& a, const DenseOperator& e, std::uint64_t seed) {
  require(a.backend() == Backend::Dense && e.backend() == Backend::Dense, ErrorCode::Unsupported,
          "commutant lifts are available in the dense backend");
  require(e.full_domain() && e.ambient_dimension() == a.ambient_dimension(), ErrorCode::InvalidArgument,
          "E must be bounded and everywhere defined on X");
  CommutantLift lift;
  lift.E = e;
  lift.factor = factorize(a);
  const FactorizationResult& f = lift.factor;
  const CMatrix em = e.matrix();
  const CMatrix& z = f.domain_basis;

  CMatrix coef;
  lift.invariance_residual = invariance(em * z, z, coef);
  require(lift.invariance_residual <= 1e-9, ErrorCode::NotCommuting, "E does not leave dom A invariant");
  const DenseOperator star_a = DenseOperator::on_domain(z, em.adjoint() * f.action);
  const DenseOperator a_e = DenseOperator::on_domain(z, f.action * coef);
  lift.commutation_residual = max_ext(extension_residuals(star_a, a_e));
  require(lift.commutation_residual <= Tolerances::defaults().action, ErrorCode::NotCommuting, "E*A ⊆ AE is violated");

  lift.E_hat = f.coefficients.adjoint() * f.form * coef * f.coefficients;
  // A x = 0 must give A E x = 0
  Eigen::SelfAdjointEigenSolver<CMatrix> es(f.form);
  const double top = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  const double fscale = std::max(1.0, f.form.norm() * coef.norm());
  for (Index k = 0; k < es.eigenvalues().size(); ++k) {
    if (es.eigenvalues()(k) > 1e-10 * top) continue;
    const CVector img = f.coefficients.adjoint() * (f.form * (coef * es.eigenvectors().col(k)));
    lift.well_defined_residual = std::max(lift.well_defined_residual, img.norm() / fscale);
  }

  lift.r_E2 = linalg::spectral_radius(em * em);
  const double ehat_norm = f.rank ? linalg::spectral_norm(lift.E_hat) : 0.0;
  const double root = std::sqrt(lift.r_E2);
  auto ratio = [&](double num) { return num <= 1e-300 ? 0.0 : (root > 0.0 ? num / root : INFINITY); };
  lift.bound_exact = ratio(ehat_norm);
  random::Engine rng(seed);
  for (int k = 0; k < 24 && f.rank > 0; ++k) {
    const CVector h = f.coordinates_of_image(random::gaussian_vector(rng, z.cols()));
    if (h.norm() <= 1e-12) continue;
    lift.bound_ratio = std::max(lift.bound_ratio, ratio((lift.E_hat * h).norm() / h.norm()));
  }
  lift.selfadjoint_residual =
      f.rank ? (lift.E_hat - lift.E_hat.adjoint()).norm() / std::max(1.0, lift.E_hat.norm()) : 0.0;
  return lift;
}

double resolvent_residual(const DenseOperator& a, const CommutantLift& lift, double lambda) {
  (void)a;
  const FactorizationResult& f = lift.factor;
  if (f.rank == 0) return 0.0;
  const Index n = lift.E.ambient_dimension();
  const CMatrix shifted = lift.E.matrix() - lambda * CMatrix::Identity(n, n);
  const CMatrix r = shifted.fullPivLu().inverse();
  CMatrix coef;
  invariance(r * f.domain_basis, f.domain_basis, coef);
  const CMatrix lifted = f.coefficients.adjoint() * f.form * coef * f.coefficients;
  const CMatrix direct = (lift.E_hat - lambda * CMatrix::Identity(f.rank, f.rank)).fullPivLu().inverse();
  return (lifted - direct).norm() / std::max(1.0, direct.norm());
}

Report commutation_formsum(const DenseOperator& a, const DenseOperator& b, const DenseOperator& e) {
  Report rep("Thm5");
  rep.add_claim("Eq7");
  const Index n = a.ambient_dimension();
  require(lower_bound(form_of(b), DualityPair::dense(n)).gamma > 0.0, ErrorCode::NoLowerBound,
          "B has no positive lower bound");
  const CommutantLift la = lift_commutant(a, e), lb = lift_commutant(b, e);
  rep.check("E*A ⊆ AE", la.commutation_residual, 1e-9);
  rep.check("E*B ⊆ BE", lb.commutation_residual, 1e-9);
  const FormSumResult fs = form_sum(a, b);
  const DenseOperator& ab = fs.AB;
  const CMatrix em = e.matrix();

  CMatrix coef;
  const double inv = invariance(em * ab.domain_basis(), ab.domain_basis(), coef);
  rep.check("E leaves dom(A+B) invariant", inv, 1e-9);
  const DenseOperator lhs = DenseOperator::on_domain(ab.domain_basis(), em.adjoint() * ab.action());
  const DenseOperator rhs = DenseOperator::on_domain(ab.domain_basis(), ab.action() * coef);
  rep.check("E*(A+B) ⊆ (A+B)E", max_ext(extension_residuals(lhs, rhs)), 1e-9);

  CMatrix j(n, la.factor.rank + lb.factor.rank);
  j << la.factor.J, lb.factor.J;
  CMatrix ehat = CMatrix::Zero(j.cols(), j.cols());
  ehat.topLeftCorner(la.factor.rank, la.factor.rank) = la.E_hat;
  ehat.bottomRightCorner(lb.factor.rank, lb.factor.rank) = lb.E_hat;
  const double scale = std::max(1.0, j.norm() * std::max(ehat.norm(), em.norm()));
  rep.check("E*J ⊆ J(E^_A ⊕ E^_B)", (em.adjoint() * j - j * ehat).norm() / scale, 1e-9);
  rep.check("(E^_A ⊕ E^_B)J* ⊆ J*E", (ehat * j.adjoint() - j.adjoint() * em).norm() / scale, 1e-9);
  return rep;
}

Report spectrum_inclusion(const DenseOperator& a, const DenseOperator& e) {
  Report rep("Thm6");
  const CommutantLift lift = lift_commutant(a, e);
  const CVector se = linalg::eigenvalues(e.matrix());
  const CVector sh = lift.factor.rank ? linalg::eigenvalues(lift.E_hat) : CVector();
  const double rho = std::max(1.0, std::sqrt(lift.r_E2));
  double worst_imag = 0.0, worst_dist = 0.0;
  nlohmann::json hat = nlohmann::json::array(), full = nlohmann::json::array();
  for (Index i = 0; i < sh.size(); ++i) {
    worst_imag = std::max(worst_imag, std::abs(sh(i).imag()));
    double d = INFINITY;
    for (Index k = 0; k < se.size(); ++k) d = std::min(d, std::abs(sh(i) - se(k)));
    worst_dist = std::max(worst_dist, d);
    hat.push_back({sh(i).real(), sh(i).imag()});
  }
  for (Index k = 0; k < se.size(); ++k) full.push_back({se(k).real(), se(k).imag()});
  rep.check("sigma(E^) real", worst_imag / rho, 1e-9);
  rep.check("sigma(E^) inside sigma(E)", worst_dist / rho, 1e-8);
  const double r = std::sqrt(lift.r_E2);
  for (double lambda : {r + 1.0, -r - 1.0, r + 2.5})
    rep.check("resolvent lift at " + std::to_string(lambda), resolvent_residual(a, lift, lambda), 1e-8);
  rep.data()["sigma_E_hat"] = hat;
  rep.data()["sigma_E"] = full;
  return rep;
}

}  // namespace formcalc
