#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace formcalc {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace linalg {

/// max(1, Frobenius norm): denominator for relative residuals.
double scale_of(const CMatrix& m);

double hermitian_residual(const CMatrix& m);

double spectral_norm(const CMatrix& m);

/// Largest modulus among the eigenvalues.
double spectral_radius(const CMatrix& m);

CVector eigenvalues(const CMatrix& m);

/// Orthonormal basis of the column span; singular values below
/// rel_tol * sigma_max are discarded.
CMatrix orthonormal_span(const CMatrix& columns, double rel_tol = 1e-10);

Index numerical_rank(const CMatrix& columns, double rel_tol = 1e-10);

struct SpanFit {
  CVector coefficients;
  double residual = 0.0;  // ||basis * c - v|| / max(1, ||v||)
};

/// Least-squares coefficients of v in the column span of basis.
SpanFit fit_in_span(const CMatrix& basis, const CVector& v);

/// Orthonormal basis of span(a) intersected with span(b).
CMatrix span_intersection(const CMatrix& a, const CMatrix& b, double rel_tol = 1e-10);

/// Symmetric-pivoted Cholesky of a Hermitian PSD matrix,
/// P^T F P ~= L L^*, stopping once the remaining pivot falls below
/// rel_tol * (largest diagonal entry).
struct PivotedCholesky {
  CMatrix lower;                  // n x rank, already in original ordering (F ~= lower * lower^*)
  std::vector<Index> pivots;      // pivot order, first `rank` entries used
  Index rank = 0;
  double smallest_discarded = 0;  // largest remaining diagonal when stopping
};

PivotedCholesky pivoted_cholesky(const CMatrix& hermitian_psd, double rel_tol);

/// Coefficient matrix C with C^* F C = I_rank for Hermitian PSD F,
/// built from the pivoted Cholesky factor (columns live in the pivot block).
CMatrix orthonormalizing_coefficients(const CMatrix& hermitian_psd, double rel_tol, Index* rank_out);

struct GeneralizedEigen {
  RVector values;  // ascending
  CMatrix vectors; // columns, M-orthonormal
};

/// Solves K v = lambda M v for Hermitian K and Hermitian positive definite M
/// by reduction through the Cholesky factor of M. Throws Singular when a
/// pivot of M drops below pivot_rel * (largest diagonal of M).
GeneralizedEigen generalized_hermitian_eigen(const CMatrix& k, const CMatrix& m, double pivot_rel = 1e-12);

/// Principal square root of a Hermitian PSD matrix (negative eigenvalues clipped).
CMatrix sqrt_psd(const CMatrix& a);

CMatrix hermitian_part(const CMatrix& a);

}  // namespace linalg
}  // namespace formcalc
