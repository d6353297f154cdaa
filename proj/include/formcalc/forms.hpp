#pragma once

#include <optional>

#include "formcalc/duality.hpp"
#include "formcalc/operator.hpp"
#include "formcalc/tolerances.hpp"

namespace formcalc {

/// Sesquilinear form on span(basis) with gram(i, j) = t(b_i, b_j), linear in
/// the first argument. In the sequence backend only diagonal forms
/// t(x, y) = sum_n w_n x_n conj(y_n) are supported.
class SesquilinearForm {
 public:
  SesquilinearForm() = default;

  static SesquilinearForm dense(CMatrix basis, CMatrix gram, bool symmetric = true);
  static SesquilinearForm on_standard_basis(const CMatrix& gram, bool symmetric = true);
  static SesquilinearForm diagonal(const SeqRule& weights, Index truncation,
                                   DomainRule domain = DomainRule::FinitelySupported);

  Backend backend() const { return backend_; }
  bool symmetric() const { return symmetric_; }
  Index ambient_dimension() const { return basis_.rows(); }
  Index dimension() const { return basis_.cols(); }
  const CMatrix& basis() const { return basis_; }
  const CMatrix& gram() const { return gram_; }
  const std::optional<DiagonalStructure>& diagonal() const { return diagonal_; }

  /// t(x, y) for x, y in span(basis) given by ambient coordinates.
  cplx operator()(const CVector& x, const CVector& y) const;

  /// Smallest eigenvalue of the (Hermitian part of the) gram.
  double min_gram_eigenvalue() const;
  bool positive(double tol = 1e-12) const;

 private:
  Backend backend_ = Backend::Dense;
  bool symmetric_ = true;
  CMatrix basis_;
  CMatrix gram_;
  std::optional<DiagonalStructure> diagonal_;
};

/// t(x, y) = (A x, y) on dom A.
SesquilinearForm form_of(const DenseOperator& a);

enum class LowerBoundKind { ExactP2, EquivalenceScaled };

const char* to_string(LowerBoundKind k);

struct LowerBoundCertificate {
  double gamma = 0.0;
  LowerBoundKind kind = LowerBoundKind::ExactP2;
  double p = 2.0;
  double slack = 0.0;  // Euclidean bound minus gamma
};

/// t(x, x) >= gamma ||x||_p^2 on the form domain. Exact for p = 2, a
/// certified under-estimate otherwise. Throws Indefinite on a negative gram.
LowerBoundCertificate lower_bound(const SesquilinearForm& t, const DualityPair& pair);

struct RepresentationResult {
  DenseOperator A;  // X -> X*
  DenseOperator B;  // X* -> X, B = A^{-1}
  LowerBoundCertificate gamma;
  double ab_residual = 0.0;       // ||A B w - w|| on a basis of the effective dual
  double ba_residual = 0.0;       // ||B A x - x|| on dom A
  double selfadjoint_residual = 0.0;
  double b_norm = 0.0;            // certified upper estimate of ||B||_{q -> p}
  double b_norm_bound = 0.0;      // 1 / gamma
};

/// The positive self-adjoint operator represented by t, built through the
/// Riesz inverse B and inverted via inverse_selfadjoint.
RepresentationResult associated_operator(const SesquilinearForm& t, const DualityPair& pair);

/// f in span(basis) with t(f, x) = (v, x) for every x in the form domain.
Vector riesz_solve(const SesquilinearForm& t, const Functional& v);

/// A = B^{-1} with dom A = ran B for an injective self-adjoint B: X* -> X.
DenseOperator inverse_selfadjoint(const DenseOperator& b);

/// Certified upper estimate of ||M||_{q -> p} from the spectral norm.
double equivalence_norm_bound(const CMatrix& m, double p);

}  // namespace formcalc
