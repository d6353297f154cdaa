#include "formcalc/factorization.hpp"

#include <algorithm>
#include <cmath>

#include "formcalc/random.hpp"

namespace formcalc {
namespace {

constexpr double kRankTol = 1e-10;

struct Spectral {
  RVector values;
  CMatrix vectors;
};

Spectral eig(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  return {es.eigenvalues(), es.eigenvectors()};
}

// Orthonormal basis of the effective ambient space span(Z); empty when Z spans C^n.
CMatrix effective_ambient(const CMatrix& z) {
  if (linalg::numerical_rank(z, 1e-10) == z.rows()) return CMatrix();
  return linalg::orthonormal_span(z);
}

CVector project(const CMatrix& q, const CVector& v) { return q.size() == 0 ? v : CVector(q.adjoint() * v); }

double rel_diff(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace

DenseOperator FactorizationResult::jjstar() const {
  return DenseOperator::on_domain(domain_basis, J * (J.adjoint() * domain_basis));
}

FactorizationResult factorize(const DenseOperator& a) {
  require(!a.diagonal(), ErrorCode::Unsupported, "factorize works on finite-dimensional domains");
  FactorizationResult r;
  r.domain_basis = a.domain_basis();
  r.action = a.action();
  const CMatrix f = a.form_matrix();
  require(linalg::hermitian_residual(f) <= 1e-10, ErrorCode::NotSymmetric, "operator is not symmetric");
  r.form = linalg::hermitian_part(f);
  const Spectral s = eig(r.form);
  const double top = std::max(s.values.cwiseAbs().maxCoeff(), 1e-300);
  require(s.values(0) >= -1e-12 * std::max(1.0, top), ErrorCode::Indefinite, "operator is not positive");

  r.coefficients = linalg::orthonormalizing_coefficients(r.form, kRankTol, &r.rank);
  r.J = r.action * r.coefficients;
  r.action_rank = linalg::numerical_rank(r.action, kRankTol);

  // (A x, x) = 0 must force A x = 0 in the effective ambient space.
  const CMatrix q = effective_ambient(r.domain_basis);
  const double ynorm = std::max(linalg::spectral_norm(r.action), 1e-300);
  for (Index k = 0; k < s.values.size(); ++k) {
    if (s.values(k) > kRankTol * top) continue;
    const double res = project(q, r.action * s.vectors.col(k)).norm() / ynorm;
    r.well_defined_residual = std::max(r.well_defined_residual, res);
  }
  require(r.well_defined_residual <= 1e-6, ErrorCode::Indefinite,
          "pre-inner product on ran A is not well defined (Cauchy inequality fails)");

  const ExtensionResiduals ext = extension_residuals(a, r.jjstar());
  r.identity_residual = std::max(ext.subspace, ext.action);
  return r;
}

const char* to_string(FormValueKind k) {
  switch (k) {
    case FormValueKind::ExactEigensolve: return "exact-eigensolve";
    case FormValueKind::Grid: return "grid";
    case FormValueKind::TailSum: return "tail-sum";
    case FormValueKind::TailDivergence: return "tail-divergence";
    case FormValueKind::KernelDivergence: return "kernel-divergence";
  }
  return "?";
}

namespace {

FormValue diagonal_form(const DenseOperator& a, const Vector& y) {
  require(y.backend() == Backend::Sequence, ErrorCode::BackendMismatch, "sequence operator needs a sequence vector");
  const SeqRule& coeff = a.diagonal()->coefficients;
  require(coeff.is_real() && coeff.certified_infimum() >= 0.0, ErrorCode::Indefinite,
          "diagonal coefficients are not certified non-negative");
  FormValue out;
  long double head = 0.0L;
  for (long n = 1; n <= y.size(); ++n) head += coeff(n).real() * std::norm(y.at(n));
  out.kind = FormValueKind::TailSum;
  out.value = static_cast<double>(head);
  if (!y.tail_rule()) return out;
  const SeqRule tail = coeff * y.tail_rule()->squared_modulus();
  SeriesCertificate cert = certify_series(tail, y.size() + 1);
  switch (cert.verdict) {
    case SeriesVerdict::Converges:
      out.value += cert.value();
      break;
    case SeriesVerdict::Diverges:
      out.value = INFINITY;
      out.kind = FormValueKind::TailDivergence;
      break;
    case SeriesVerdict::Uncertified:
      throw Error(ErrorCode::Uncertified, "form value not certified: " + cert.reason);
  }
  out.series = std::move(cert);
  return out;
}

}  // namespace

FormEvaluator::FormEvaluator(const DenseOperator& a) : a_(a) {
  if (a.diagonal()) return;
  fr_ = factorize(a);
  const Spectral s = eig(fr_.form);
  values_ = s.values;
  vectors_ = s.vectors;
  action_norm_ = linalg::spectral_norm(fr_.action);
  if (a.full_domain()) matrix_ = a.matrix();
  if (fr_.rank > 0) {
    const linalg::PivotedCholesky pc = linalg::pivoted_cholesky(fr_.form, kRankTol);
    pivot_embed_ = CMatrix::Zero(fr_.form.rows(), pc.rank);
    for (Index k = 0; k < pc.rank; ++k) pivot_embed_(pc.pivots[k], k) = 1.0;
    pivot_block_ = pivot_embed_.adjoint() * fr_.form * pivot_embed_;
  }
}

FormValue FormEvaluator::operator()(const Vector& y) const {
  if (a_.diagonal()) return diagonal_form(a_, y);
  require(y.size() == a_.ambient_dimension(), ErrorCode::BackendMismatch, "vector does not match the ambient space");
  const CVector& yc = y.coords();
  const CVector w = fr_.action.adjoint() * yc;  // (A Z c, y) = w^* c
  FormValue out;
  out.kind = FormValueKind::ExactEigensolve;

  // directions with (Ax, x) = 0 but (Ax, y) != 0 make the supremum infinite
  const double top = std::max(values_.cwiseAbs().maxCoeff(), 1e-300);
  const double wscale = std::max(action_norm_ * yc.norm(), 1e-300);
  for (Index k = 0; k < values_.size(); ++k) {
    if (values_(k) > kRankTol * top) continue;
    if (std::abs(vectors_.col(k).dot(w)) > 1e-8 * wscale) {
      out.value = INFINITY;
      out.kind = FormValueKind::KernelDivergence;
      out.witness = fr_.domain_basis * vectors_.col(k);
      return out;
    }
  }

  if (matrix_.size() > 0)
    out.value = std::max(0.0, yc.dot(matrix_ * yc).real());  // (Ay, y)
  else
    out.value = fr_.jstar(yc).squaredNorm();

  // cross-check: largest eigenvalue of (w w^*, F) on the pivot block
  if (fr_.rank == 0) {
    out.cross_check = 0.0;
  } else {
    const Index r = pivot_embed_.cols();
    const CVector wr = pivot_embed_.adjoint() * w;
    const linalg::GeneralizedEigen ge = linalg::generalized_hermitian_eigen(wr * wr.adjoint(), pivot_block_);
    out.cross_check = std::max(0.0, ge.values(r - 1));
    out.witness = fr_.domain_basis * (pivot_embed_ * ge.vectors.col(r - 1));
  }
  out.cross_check_residual = rel_diff(out.value, out.cross_check);
  if (out.value <= 1e-14 * wscale && out.cross_check <= 1e-14 * wscale) out.cross_check_residual = 0.0;
  return out;
}

FormValue form_on_X(const DenseOperator& a, const Vector& y) { return FormEvaluator(a)(y); }

bool in_dom_Jstar(const DenseOperator& a, const Vector& y) { return form_on_X(a, y).finite(); }

const char* to_string(Order o) {
  switch (o) {
    case Order::AGeqB: return "A>=B";
    case Order::BGeqA: return "B>=A";
    case Order::Equal: return "equal";
    case Order::Incomparable: return "incomparable";
  }
  return "?";
}

namespace {

bool dominates(double fa, double fb, double slack) {
  if (std::isinf(fa)) return true;
  if (std::isinf(fb)) return false;
  return fa >= fb - slack * std::max(fa, fb);
}

std::vector<ProbeValue> build_probes(const DenseOperator& a, const DenseOperator& b,
                                     const std::vector<Vector>& samples, const CompareOptions& opts) {
  std::vector<ProbeValue> probes;
  auto add = [&](Vector y, std::string origin) { probes.push_back({std::move(y), 0.0, 0.0, std::move(origin)}); };
  for (const auto& s : samples) add(s, "sample");
  random::Engine rng(opts.seed);

  if (a.backend() == Backend::Sequence) {
    const Index len = std::max(a.domain_dimension(), b.domain_dimension());
    for (Index i = 0; i < len; ++i) add(Vector::finite(CMatrix::Identity(len, len).col(i)), "basis");
    for (int k = 0; k < opts.random_probes; ++k) add(Vector::finite(random::unit_vector(rng, len)), "random");
    return probes;
  }

  const Index n = a.ambient_dimension();
  for (Index i = 0; i < n; ++i) add(Vector::dense(CMatrix::Identity(n, n).col(i)), "basis");
  for (Index j = 0; j < a.domain_dimension(); ++j) add(Vector::dense(a.domain_basis().col(j)), "dom-A");
  for (Index j = 0; j < b.domain_dimension(); ++j) add(Vector::dense(b.domain_basis().col(j)), "dom-B");
  for (int k = 0; k < opts.random_probes; ++k) add(Vector::dense(random::unit_vector(rng, n)), "random");
  if (a.full_domain() && b.full_domain()) {
    // adversarial: eigenvectors of A - B, where the forms differ most
    const Spectral s = eig(linalg::hermitian_part(a.matrix() - b.matrix()));
    for (Index k = 0; k < n; ++k) add(Vector::dense(s.vectors.col(k)), "eigen");
  }
  return probes;
}

}  // namespace

OrderingReport compare(const DenseOperator& a, const DenseOperator& b, const std::vector<Vector>& samples,
                       const CompareOptions& opts) {
  require(a.backend() == b.backend(), ErrorCode::BackendMismatch, "operators live on different backends");
  if (a.backend() == Backend::Dense)
    require(a.ambient_dimension() == b.ambient_dimension(), ErrorCode::BackendMismatch, "ambient dimensions differ");
  OrderingReport rep;
  rep.slack = opts.slack;
  rep.probes = build_probes(a, b, samples, opts);
  bool a_geq = true, b_geq = true;
  const FormEvaluator eval_a(a), eval_b(b);
  for (auto& p : rep.probes) {
    p.form_a = eval_a(p.y).value;
    p.form_b = eval_b(p.y).value;
    if (std::isfinite(p.form_a) && !std::isfinite(p.form_b)) rep.a_domain_in_b = false;
    if (std::isfinite(p.form_b) && !std::isfinite(p.form_a)) rep.b_domain_in_a = false;
    a_geq = a_geq && dominates(p.form_a, p.form_b, opts.slack);
    b_geq = b_geq && dominates(p.form_b, p.form_a, opts.slack);
  }
  rep.a_geq_b = a_geq && rep.a_domain_in_b;
  rep.b_geq_a = b_geq && rep.b_domain_in_a;
  if (rep.a_geq_b && rep.b_geq_a)
    rep.verdict = Order::Equal;
  else if (rep.a_geq_b)
    rep.verdict = Order::AGeqB;
  else if (rep.b_geq_a)
    rep.verdict = Order::BGeqA;
  else
    rep.verdict = Order::Incomparable;
  return rep;
}

Report antisymmetry_check(const DenseOperator& a, const DenseOperator& b, const CompareOptions& opts) {
  const OrderingReport ord = compare(a, b, {}, opts);
  require(ord.verdict == Order::Equal, ErrorCode::NotEqual,
          std::string("antisymmetry needs equal forms, compare gave ") + to_string(ord.verdict));
  Report rep("Def-Order");
  rep.data()["probes"] = ord.probes.size();
  if (a.diagonal() && b.diagonal()) {
    rep.require_true("coefficient rules agree",
                     a.diagonal()->coefficients.approx_equal(b.diagonal()->coefficients, 1e-10));
    rep.require_true("domain rules agree", a.diagonal()->domain == b.diagonal()->domain);
    return rep;
  }
  Tolerances tol;
  tol.subspace = tol.action = 1e-10;
  const ExtensionResiduals ab = extension_residuals(a, b, tol), ba = extension_residuals(b, a, tol);
  rep.check("A subset of B", std::max(ab.subspace, ab.action), 1e-10);
  rep.check("B subset of A", std::max(ba.subspace, ba.action), 1e-10);
  return rep;
}

Report hilbert_consistency(const DenseOperator& a, const std::vector<CVector>& samples) {
  require(a.backend() == Backend::Dense && a.full_domain(), ErrorCode::Unsupported,
          "hilbert_consistency needs an everywhere-defined dense operator");
  const CMatrix m = linalg::hermitian_part(a.matrix());
  const CMatrix root = linalg::sqrt_psd(m);
  const double scale = std::max(linalg::spectral_norm(m), 1e-300);
  Report rep("Lem2");
  double worst = 0.0;
  for (const auto& y : samples) {
    const double lhs = form_on_X(a, Vector::dense(y)).value;
    const double rhs = (root * y).squaredNorm();
    worst = std::max(worst, std::abs(lhs - rhs) / (scale * std::max(y.squaredNorm(), 1e-300)));
  }
  rep.check("form value equals ||A^{1/2} y||^2", worst, 1e-8);
  rep.data()["samples"] = samples.size();
  return rep;
}

}  // namespace formcalc
