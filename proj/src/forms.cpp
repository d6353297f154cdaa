#include "formcalc/forms.hpp"

#include <algorithm>
#include <cmath>

namespace formcalc {

SesquilinearForm SesquilinearForm::dense(CMatrix basis, CMatrix gram, bool symmetric) {
  require(basis.cols() >= 1 && basis.rows() >= basis.cols(), ErrorCode::InvalidArgument, "invalid form domain basis");
  require(gram.rows() == basis.cols() && gram.cols() == basis.cols(), ErrorCode::InvalidArgument,
          "gram must be d x d for a d-dimensional domain");
  require(linalg::numerical_rank(basis, 1e-10) == basis.cols(), ErrorCode::InvalidArgument,
          "form domain basis is not linearly independent");
  if (symmetric)
    require(linalg::hermitian_residual(gram) <= 1e-12, ErrorCode::NotSymmetric, "gram is not Hermitian");
  SesquilinearForm t;
  t.symmetric_ = symmetric;
  t.basis_ = std::move(basis);
  t.gram_ = symmetric ? linalg::hermitian_part(gram) : std::move(gram);
  return t;
}

SesquilinearForm SesquilinearForm::on_standard_basis(const CMatrix& gram, bool symmetric) {
  return dense(CMatrix::Identity(gram.rows(), gram.rows()), gram, symmetric);
}

SesquilinearForm SesquilinearForm::diagonal(const SeqRule& weights, Index truncation, DomainRule domain) {
  require(truncation >= 1, ErrorCode::InvalidArgument, "truncation must be >= 1");
  require(weights.is_real(), ErrorCode::NotSymmetric, "diagonal form weights must be real");
  SesquilinearForm t;
  t.backend_ = Backend::Sequence;
  t.basis_ = CMatrix::Identity(truncation, truncation);
  t.gram_ = CMatrix::Zero(truncation, truncation);
  for (Index i = 0; i < truncation; ++i) t.gram_(i, i) = weights(static_cast<long>(i + 1));
  t.diagonal_ = DiagonalStructure{weights, domain};
  return t;
}

cplx SesquilinearForm::operator()(const CVector& x, const CVector& y) const {
  const linalg::SpanFit fx = linalg::fit_in_span(basis_, x);
  const linalg::SpanFit fy = linalg::fit_in_span(basis_, y);
  require(fx.residual <= 1e-9 && fy.residual <= 1e-9, ErrorCode::OutOfDomain, "argument outside the form domain");
  return fy.coefficients.dot(gram_.transpose() * fx.coefficients);
}

double SesquilinearForm::min_gram_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(linalg::hermitian_part(gram_), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

bool SesquilinearForm::positive(double tol) const {
  return min_gram_eigenvalue() >= -tol * linalg::scale_of(gram_);
}

SesquilinearForm form_of(const DenseOperator& a) {
  if (a.diagonal())
    return SesquilinearForm::diagonal(a.diagonal()->coefficients, a.domain_dimension(), a.diagonal()->domain);
  const CMatrix f = a.form_matrix();
  const bool symmetric = linalg::hermitian_residual(f) <= 1e-12;
  return SesquilinearForm::dense(a.domain_basis(), f.transpose(), symmetric);
}

const char* to_string(LowerBoundKind k) { return k == LowerBoundKind::ExactP2 ? "exact-p2" : "equivalence-scaled"; }

LowerBoundCertificate lower_bound(const SesquilinearForm& t, const DualityPair& pair) {
  require(t.symmetric(), ErrorCode::NotSymmetric, "lower bounds need a symmetric form");
  LowerBoundCertificate cert;
  cert.p = pair.p();
  cert.kind = pair.hilbert() ? LowerBoundKind::ExactP2 : LowerBoundKind::EquivalenceScaled;

  if (t.backend() == Backend::Sequence) {
    require(pair.backend() == Backend::Sequence, ErrorCode::BackendMismatch, "form and pair backends differ");
    const double inf = t.diagonal()->coefficients.certified_infimum();
    require(inf >= -1e-12, ErrorCode::Indefinite, "diagonal weights are negative");
    // ||x||_p <= ||x||_2 for p >= 2; for p < 2 no dimension-free equivalence exists.
    require(pair.p() >= 2.0, ErrorCode::Uncertified, "no certified l_p lower bound below p = 2 in infinite dimensions");
    cert.gamma = std::max(0.0, inf);
    return cert;
  }

  require(pair.backend() == Backend::Dense && pair.dimension() == t.ambient_dimension(), ErrorCode::BackendMismatch,
          "form and pair dimensions differ");
  const CMatrix k = t.gram().transpose();  // t(Ba, Ba) = a^* G^T a
  const CMatrix m = t.basis().adjoint() * t.basis();
  const linalg::GeneralizedEigen ge = linalg::generalized_hermitian_eigen(k, m);
  const double lambda = ge.values(0);
  require(lambda >= -1e-12 * linalg::scale_of(k), ErrorCode::Indefinite, "form is not positive");
  const double gamma2 = std::max(0.0, lambda);
  if (pair.hilbert()) {
    cert.gamma = gamma2;
    return cert;
  }
  const double n = static_cast<double>(t.ambient_dimension());
  cert.gamma = gamma2 * std::pow(n, -2.0 * std::abs(1.0 / pair.p() - 0.5));
  cert.slack = gamma2 - cert.gamma;
  return cert;
}

double equivalence_norm_bound(const CMatrix& m, double p) {
  const double n = static_cast<double>(std::max(m.rows(), m.cols()));
  const double factor = p < 2.0 ? std::pow(n, 2.0 * (1.0 / p - 0.5)) : 1.0;
  return factor * linalg::spectral_norm(m);
}

namespace {

// Coefficients c with f = Z c solving t(f, z_k) = (v, z_k): G^T c = Z^* v.
CMatrix riesz_coefficients(const SesquilinearForm& t, const CMatrix& rhs) {
  const CMatrix gt = t.gram().transpose();
  Eigen::LDLT<CMatrix> ldlt(gt);
  require(ldlt.info() == Eigen::Success, ErrorCode::Singular, "gram factorization failed");
  const CMatrix c = ldlt.solve(rhs);
  const double res = (gt * c - rhs).norm() / std::max(1.0, rhs.norm());
  require(std::isfinite(res) && res <= 1e-8, ErrorCode::Singular, "gram is numerically singular");
  return c;
}

void require_representable(const SesquilinearForm& t) {
  require(t.backend() == Backend::Dense, ErrorCode::Unsupported, "representation is available in the dense backend");
  require(t.symmetric(), ErrorCode::NotSymmetric, "form is not symmetric");
}

}  // namespace

Vector riesz_solve(const SesquilinearForm& t, const Functional& v) {
  require_representable(t);
  require(v.backend() == Backend::Dense && v.size() == t.ambient_dimension(), ErrorCode::BackendMismatch,
          "functional does not match the form's ambient space");
  const LowerBoundCertificate cert = lower_bound(t, DualityPair::dense(t.ambient_dimension()));
  require(cert.gamma > 0.0, ErrorCode::NoLowerBound, "form has no positive lower bound");
  const CMatrix& z = t.basis();
  const CVector c = riesz_coefficients(t, z.adjoint() * v.coords());
  return Vector::dense(z * c);
}

DenseOperator inverse_selfadjoint(const DenseOperator& b) {
  require(b.backend() == Backend::Dense, ErrorCode::Unsupported, "inverse_selfadjoint needs the dense backend");
  require(b.mapping() == Mapping::DualToPrimal, ErrorCode::InvalidArgument, "expected an operator X* -> X");
  require(symmetry_residual(b) <= 1e-10, ErrorCode::NotSelfAdjoint, "B is not self-adjoint");
  const CMatrix& w = b.domain_basis();
  // B restricted to span(W) in orthonormal coordinates.
  Eigen::HouseholderQR<CMatrix> qr(w);
  const CMatrix r = qr.matrixQR().topRows(w.cols()).triangularView<Eigen::Upper>();
  const CMatrix restricted = b.action() * r.inverse();
  Eigen::JacobiSVD<CMatrix> svd(restricted);
  const double smin = svd.singularValues().size() ? svd.singularValues().minCoeff() : 0.0;
  require(smin > 1e-12 * std::max(1.0, svd.singularValues().maxCoeff()), ErrorCode::NotInjective,
          "B is not injective");
  const DenseOperator a = DenseOperator::on_domain(b.action(), w, Mapping::PrimalToDual);
  const DenseOperator a_star = adjoint(a);
  require(is_extension(a, a_star) && is_extension(a_star, a), ErrorCode::NotSelfAdjoint,
          "inverse failed the self-adjointness check");
  return a;
}

RepresentationResult associated_operator(const SesquilinearForm& t, const DualityPair& pair) {
  require_representable(t);
  RepresentationResult res;
  res.gamma = lower_bound(t, pair);
  require(res.gamma.gamma > 0.0, ErrorCode::NoLowerBound, "form has no positive lower bound");

  const CMatrix& z = t.basis();
  const CMatrix m = z.adjoint() * z;
  const CMatrix bz = z * riesz_coefficients(t, m);
  res.B = DenseOperator::on_domain(z, bz, Mapping::DualToPrimal);
  res.A = inverse_selfadjoint(res.B);

  const double zs = std::max(1.0, z.norm());
  res.ab_residual = (res.A.matrix() * bz - z).norm() / zs;
  res.ba_residual = (res.B.matrix() * res.A.action() - res.A.domain_basis()).norm() /
                    std::max(1.0, res.A.domain_basis().norm());
  res.selfadjoint_residual = symmetry_residual(res.A);
  res.b_norm = equivalence_norm_bound(res.B.matrix(), pair.p());
  res.b_norm_bound = 1.0 / res.gamma.gamma;
  return res;
}

}  // namespace formcalc
