#include "formcalc/operator.hpp"

#include <algorithm>
#include <cmath>

namespace formcalc {
namespace {

Mapping adjoint_mapping(Mapping m) {
  switch (m) {
    case Mapping::PrimalToPrimal: return Mapping::DualToDual;
    case Mapping::DualToDual: return Mapping::PrimalToPrimal;
    default: return m;
  }
}

CMatrix pad_rows(const CMatrix& m, Index rows) {
  if (m.rows() >= rows) return m;
  CMatrix out = CMatrix::Zero(rows, m.cols());
  out.topRows(m.rows()) = m;
  return out;
}

double relative(double num, double denom) {
  if (num == 0.0) return 0.0;
  return num / std::max(denom, 1e-300);
}

// Generic finite-dimensional comparison: columns of S's domain against
// span(dom T), actions compared on the effective ambient of T.
ExtensionResiduals compare_finite(const CMatrix& s_basis, const CMatrix& s_action, const CMatrix& t_basis,
                                  const CMatrix& t_action, bool t_full, const Tolerances& tol) {
  ExtensionResiduals r;
  const CMatrix q = t_full ? CMatrix() : linalg::orthonormal_span(t_basis);
  double t_norm = 0.0;
  if (t_basis.cols() > 0) {
    Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(t_basis);
    t_norm = linalg::spectral_norm(t_action * cod.pseudoInverse());
  }
  for (Index j = 0; j < s_basis.cols(); ++j) {
    const CVector z = s_basis.col(j);
    const linalg::SpanFit fit = linalg::fit_in_span(t_basis, z);
    r.subspace = std::max(r.subspace, fit.residual);
    if (fit.coefficients.size() == 0) {
      r.action = std::max(r.action, s_action.col(j).norm() > 0 ? 1.0 : 0.0);
      continue;
    }
    const CVector diff = t_action * fit.coefficients - s_action.col(j);
    const double mismatch = t_full ? diff.norm() : (q.adjoint() * diff).norm();
    const double denom = std::max(t_norm * z.norm(), s_action.col(j).norm());
    r.action = std::max(r.action, relative(mismatch, denom));
  }
  r.holds = r.subspace <= tol.subspace && r.action <= tol.action;
  return r;
}

}  // namespace

const char* to_string(Mapping m) {
  switch (m) {
    case Mapping::PrimalToDual: return "X->X*";
    case Mapping::DualToPrimal: return "X*->X";
    case Mapping::PrimalToPrimal: return "X->X";
    case Mapping::DualToDual: return "X*->X*";
  }
  return "?";
}

const char* to_string(DomainRule r) { return r == DomainRule::FinitelySupported ? "finitely-supported" : "maximal"; }

DenseOperator DenseOperator::from_matrix(const CMatrix& m, Mapping mapping) {
  require(m.rows() == m.cols(), ErrorCode::InvalidArgument, "operator matrix must be square");
  return on_domain(CMatrix::Identity(m.rows(), m.cols()), m, mapping);
}

DenseOperator DenseOperator::on_domain(CMatrix basis, CMatrix action, Mapping mapping) {
  require(basis.cols() == action.cols(), ErrorCode::InvalidArgument,
          "action needs exactly one column per domain basis vector");
  require(basis.rows() == action.rows(), ErrorCode::InvalidArgument, "domain and action ambient dimensions differ");
  require(basis.rows() >= 1, ErrorCode::InvalidArgument, "empty ambient space");
  require(linalg::numerical_rank(basis, 1e-10) == basis.cols(), ErrorCode::InvalidArgument,
          "domain basis is not linearly independent");
  for (Index j = 0; j < action.cols(); ++j)
    for (Index i = 0; i < action.rows(); ++i)
      require(std::isfinite(std::abs(action(i, j))), ErrorCode::InvalidArgument, "operator action must be finite");
  DenseOperator op;
  op.basis_ = std::move(basis);
  op.action_ = std::move(action);
  op.mapping_ = mapping;
  return op;
}

DenseOperator DenseOperator::diagonal(const SeqRule& coefficients, Index truncation, DomainRule domain,
                                      Mapping mapping) {
  require(truncation >= 1, ErrorCode::InvalidArgument, "truncation must be >= 1");
  DenseOperator op;
  op.backend_ = Backend::Sequence;
  op.mapping_ = mapping;
  op.basis_ = CMatrix::Identity(truncation, truncation);
  op.action_ = CMatrix::Zero(truncation, truncation);
  for (Index i = 0; i < truncation; ++i) op.action_(i, i) = coefficients(static_cast<long>(i + 1));
  op.diagonal_ = DiagonalStructure{coefficients, domain};
  return op;
}

bool DenseOperator::full_domain() const {
  return backend_ == Backend::Dense && linalg::numerical_rank(basis_, 1e-10) == basis_.rows();
}

CMatrix DenseOperator::matrix() const {
  const CMatrix gram = basis_.adjoint() * basis_;
  return action_ * gram.ldlt().solve(basis_.adjoint());
}

CMatrix DenseOperator::form_matrix() const { return basis_.adjoint() * action_; }

CVector DenseOperator::apply(const CVector& x, double rel_tol) const {
  require(x.size() == basis_.rows(), ErrorCode::BackendMismatch, "vector length does not match the ambient space");
  const linalg::SpanFit fit = linalg::fit_in_span(basis_, x);
  require(fit.residual <= rel_tol, ErrorCode::OutOfDomain, "vector is not in the operator domain");
  return action_ * fit.coefficients;
}

DenseOperator DenseOperator::with_mapping(Mapping mapping) const {
  DenseOperator op = *this;
  op.mapping_ = mapping;
  return op;
}

double symmetry_residual(const DenseOperator& t) { return linalg::hermitian_residual(t.form_matrix()); }

DenseOperator adjoint(const DenseOperator& a) {
  if (a.backend() == Backend::Sequence) {
    require(a.diagonal().has_value(), ErrorCode::Unsupported,
            "sequence-backend adjoints are available for diagonal operators only");
    return DenseOperator::diagonal(a.diagonal()->coefficients.conjugate(), a.domain_dimension(), DomainRule::Maximal,
                                   adjoint_mapping(a.mapping()));
  }
  require(a.domain_dimension() > 0, ErrorCode::NotDense, "operator has an empty domain");
  const CMatrix& z = a.domain_basis();
  const CMatrix gram = z.adjoint() * z;
  const CMatrix f = a.form_matrix();
  // (A x, y) = (x, A* y) for x, y in span(Z), with A* y represented in span(Z).
  const CMatrix action = z * gram.ldlt().solve(f.adjoint());
  return DenseOperator::on_domain(z, action, adjoint_mapping(a.mapping()));
}

ExtensionResiduals extension_residuals(const DenseOperator& s, const DenseOperator& t, const Tolerances& tol) {
  ExtensionResiduals fail;
  fail.subspace = fail.action = INFINITY;
  if (s.backend() != t.backend() || s.mapping() != t.mapping()) return fail;

  if (s.backend() == Backend::Dense) {
    if (s.ambient_dimension() != t.ambient_dimension()) return fail;
    return compare_finite(s.domain_basis(), s.action(), t.domain_basis(), t.action(), t.full_domain(), tol);
  }

  const auto& sd = s.diagonal();
  const auto& td = t.diagonal();
  if (td) {
    if (sd) {
      ExtensionResiduals r;
      const Index len = std::max(s.domain_dimension(), t.domain_dimension());
      double mismatch = 0.0, scale = 0.0;
      for (long n = 1; n <= len; ++n) {
        mismatch = std::max(mismatch, std::abs(sd->coefficients(n) - td->coefficients(n)));
        scale = std::max(scale, std::abs(td->coefficients(n)));
      }
      r.action = relative(mismatch, scale);
      if (!sd->coefficients.approx_equal(td->coefficients, tol.action)) r.action = std::max(r.action, 1.0);
      r.subspace = (sd->domain == DomainRule::Maximal && td->domain == DomainRule::FinitelySupported) ? 1.0 : 0.0;
      r.holds = r.subspace <= tol.subspace && r.action <= tol.action;
      return r;
    }
    // finitely supported columns always lie in a diagonal operator's domain
    const Index len = std::max(s.ambient_dimension(), t.ambient_dimension());
    const CMatrix sb = pad_rows(s.domain_basis(), len);
    const CMatrix sa = pad_rows(s.action(), len);
    CMatrix ta(len, sb.cols());
    for (Index i = 0; i < len; ++i) ta.row(i) = td->coefficients(static_cast<long>(i + 1)) * sb.row(i);
    ExtensionResiduals r;
    for (Index j = 0; j < sb.cols(); ++j) {
      const double denom = std::max(ta.col(j).norm(), sa.col(j).norm());
      r.action = std::max(r.action, relative((ta.col(j) - sa.col(j)).norm(), denom));
    }
    r.holds = r.action <= tol.action;
    return r;
  }
  if (sd) return fail;  // infinite-dimensional domain cannot sit inside a finite span
  const Index len = std::max(s.ambient_dimension(), t.ambient_dimension());
  return compare_finite(pad_rows(s.domain_basis(), len), pad_rows(s.action(), len), pad_rows(t.domain_basis(), len),
                        pad_rows(t.action(), len), false, tol);
}

bool is_extension(const DenseOperator& s, const DenseOperator& t, const Tolerances& tol) {
  return extension_residuals(s, t, tol).holds;
}

}  // namespace formcalc
