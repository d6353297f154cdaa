#include "formcalc/linalg.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "formcalc/errors.hpp"

namespace formcalc::linalg {

double scale_of(const CMatrix& m) { return std::max(1.0, m.norm()); }

double hermitian_residual(const CMatrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  return (m - m.adjoint()).norm() / scale_of(m);
}

double spectral_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

CVector eigenvalues(const CMatrix& m) {
  if (m.size() == 0) return CVector();
  Eigen::ComplexEigenSolver<CMatrix> es(m, false);
  require(es.info() == Eigen::Success, ErrorCode::Unsupported, "eigenvalue iteration did not converge");
  return es.eigenvalues();
}

double spectral_radius(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return eigenvalues(m).cwiseAbs().maxCoeff();
}

CMatrix orthonormal_span(const CMatrix& columns, double rel_tol) {
  if (columns.size() == 0) return CMatrix(columns.rows(), 0);
  Eigen::JacobiSVD<CMatrix> svd(columns, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return CMatrix(columns.rows(), 0);
  Index r = 0;
  while (r < s.size() && s(r) > rel_tol * s(0)) ++r;
  return svd.matrixU().leftCols(r);
}

Index numerical_rank(const CMatrix& columns, double rel_tol) { return orthonormal_span(columns, rel_tol).cols(); }

SpanFit fit_in_span(const CMatrix& basis, const CVector& v) {
  SpanFit fit;
  if (basis.cols() == 0) {
    fit.coefficients = CVector();
    fit.residual = v.norm() > 0 ? 1.0 : 0.0;
    return fit;
  }
  Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(basis);
  fit.coefficients = cod.solve(v);
  const double denom = std::max(v.norm(), 1e-300);
  fit.residual = (basis * fit.coefficients - v).norm() / denom;
  if (v.norm() == 0.0) fit.residual = 0.0;
  return fit;
}

CMatrix span_intersection(const CMatrix& a, const CMatrix& b, double rel_tol) {
  const CMatrix qa = orthonormal_span(a, rel_tol);
  const CMatrix qb = orthonormal_span(b, rel_tol);
  if (qa.cols() == 0 || qb.cols() == 0) return CMatrix(a.rows(), 0);
  Eigen::JacobiSVD<CMatrix> svd(qa.adjoint() * qb, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  Index k = 0;
  while (k < s.size() && s(k) > 1.0 - 1e-8) ++k;
  return qa * svd.matrixU().leftCols(k);
}

PivotedCholesky pivoted_cholesky(const CMatrix& f, double rel_tol) {
  const Index n = f.rows();
  PivotedCholesky out;
  out.lower = CMatrix::Zero(n, n);
  out.pivots.resize(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) out.pivots[static_cast<size_t>(i)] = i;
  if (n == 0) return out;

  RVector residual_diag(n);
  for (Index i = 0; i < n; ++i) residual_diag(i) = f(i, i).real();
  const double max_diag = std::max(0.0, residual_diag.maxCoeff());
  const double threshold = rel_tol * max_diag;

  auto& perm = out.pivots;
  Index k = 0;
  for (; k < n; ++k) {
    Index best = k;
    for (Index j = k + 1; j < n; ++j)
      if (residual_diag(perm[j]) > residual_diag(perm[best])) best = j;
    const double d = residual_diag(perm[best]);
    if (max_diag == 0.0 || d <= threshold) {
      out.smallest_discarded = std::max(0.0, d);
      break;
    }
    std::swap(perm[k], perm[best]);
    const Index p = perm[k];
    const double lpk = std::sqrt(d);
    out.lower(p, k) = lpk;
    for (Index i = k + 1; i < n; ++i) {
      const Index q = perm[i];
      cplx sum = f(q, p);
      for (Index l = 0; l < k; ++l) sum -= out.lower(q, l) * std::conj(out.lower(p, l));
      out.lower(q, k) = sum / lpk;
      residual_diag(q) -= std::norm(out.lower(q, k));
    }
  }
  out.rank = k;
  out.lower.conservativeResize(n, k);
  return out;
}

CMatrix orthonormalizing_coefficients(const CMatrix& f, double rel_tol, Index* rank_out) {
  const Index n = f.rows();
  const PivotedCholesky pc = pivoted_cholesky(f, rel_tol);
  const Index r = pc.rank;
  CMatrix l1(r, r);
  for (Index i = 0; i < r; ++i) l1.row(i) = pc.lower.row(pc.pivots[static_cast<size_t>(i)]);
  // C = E L1^{-*}, E selecting the pivot rows.
  const CMatrix inv_adj = l1.adjoint().triangularView<Eigen::Upper>().solve(CMatrix::Identity(r, r));
  CMatrix c = CMatrix::Zero(n, r);
  for (Index i = 0; i < r; ++i) c.row(pc.pivots[static_cast<size_t>(i)]) = inv_adj.row(i);
  if (rank_out) *rank_out = r;
  return c;
}

GeneralizedEigen generalized_hermitian_eigen(const CMatrix& k, const CMatrix& m, double pivot_rel) {
  require(k.rows() == k.cols() && m.rows() == m.cols() && k.rows() == m.rows(), ErrorCode::InvalidArgument,
          "generalized eigenproblem needs square matrices of equal size");
  const Index n = k.rows();
  GeneralizedEigen out;
  if (n == 0) return out;
  Eigen::LLT<CMatrix> llt(hermitian_part(m));
  require(llt.info() == Eigen::Success, ErrorCode::Singular, "basis Gram matrix is not positive definite");
  const CMatrix l = llt.matrixL();
  const double max_diag = m.diagonal().real().maxCoeff();
  for (Index i = 0; i < n; ++i)
    require(std::norm(l(i, i)) > pivot_rel * max_diag, ErrorCode::Singular,
            "Cholesky pivot of the basis Gram below threshold");
  const CMatrix x = l.triangularView<Eigen::Lower>().solve(hermitian_part(k));
  const CMatrix s = l.triangularView<Eigen::Lower>().solve(x.adjoint().eval()).adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(s));
  require(es.info() == Eigen::Success, ErrorCode::Unsupported, "eigen solver failed");
  out.values = es.eigenvalues();
  out.vectors = l.adjoint().triangularView<Eigen::Upper>().solve(es.eigenvectors());
  return out;
}

CMatrix sqrt_psd(const CMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a));
  const RVector roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix hermitian_part(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

}  // namespace formcalc::linalg
