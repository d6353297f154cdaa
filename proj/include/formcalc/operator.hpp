#pragma once

#include <optional>

#include "formcalc/duality.hpp"
#include "formcalc/tolerances.hpp"

namespace formcalc {

/// Which spaces an operator connects. X** is identified with X.
enum class Mapping { PrimalToDual, DualToPrimal, PrimalToPrimal, DualToDual };

const char* to_string(Mapping m);

/// Domain of a sequence-backend diagonal operator: finitely supported
/// sequences, or every sequence whose image stays in the codomain.
enum class DomainRule { FinitelySupported, Maximal };

const char* to_string(DomainRule r);

struct DiagonalStructure {
  SeqRule coefficients;
  DomainRule domain = DomainRule::FinitelySupported;
};

/// Linear operator given by a domain basis and the action on each basis
/// vector. In the dense backend the closure of the domain span is the
/// effective ambient space; the sequence backend additionally supports
/// diagonal operators described by a coefficient rule.
class DenseOperator {
 public:
  DenseOperator() = default;

  /// Everywhere-defined operator with coordinate matrix m.
  static DenseOperator from_matrix(const CMatrix& m, Mapping mapping = Mapping::PrimalToDual);

  /// Operator on span(basis) with T basis.col(j) = action.col(j).
  static DenseOperator on_domain(CMatrix basis, CMatrix action, Mapping mapping = Mapping::PrimalToDual);

  /// Sequence-backend diagonal operator (a_n); the stored finite part covers
  /// n = 1..truncation.
  static DenseOperator diagonal(const SeqRule& coefficients, Index truncation, DomainRule domain,
                                Mapping mapping = Mapping::PrimalToDual);

  Backend backend() const { return backend_; }
  Mapping mapping() const { return mapping_; }
  Index ambient_dimension() const { return basis_.rows(); }
  Index domain_dimension() const { return basis_.cols(); }
  const CMatrix& domain_basis() const { return basis_; }
  const CMatrix& action() const { return action_; }
  const std::optional<DiagonalStructure>& diagonal() const { return diagonal_; }

  /// Dense backend: the domain spans all of C^n.
  bool full_domain() const;

  /// Coordinate matrix action * pinv(basis); vanishes off the domain span.
  CMatrix matrix() const;

  /// Entry (i, j) = (T b_j, b_i); Hermitian exactly when T is symmetric.
  CMatrix form_matrix() const;

  /// Applies T to x in span(basis); throws OutOfDomain otherwise.
  CVector apply(const CVector& x, double rel_tol = 1e-9) const;

  DenseOperator with_mapping(Mapping mapping) const;

 private:
  Backend backend_ = Backend::Dense;
  Mapping mapping_ = Mapping::PrimalToDual;
  CMatrix basis_;
  CMatrix action_;
  std::optional<DiagonalStructure> diagonal_;
};

/// Relative residual ||F - F^*|| of the form matrix.
double symmetry_residual(const DenseOperator& t);

/// Adjoint with respect to the pairing; for a full-domain dense operator the
/// coordinate matrix is the conjugate transpose. Diagonal sequence operators
/// map to the maximal diagonal operator with conjugated coefficients.
DenseOperator adjoint(const DenseOperator& a);

struct ExtensionResiduals {
  bool holds = false;
  double subspace = 0.0;  // worst relative distance of dom S basis vectors from dom T
  double action = 0.0;    // worst relative action mismatch
};

ExtensionResiduals extension_residuals(const DenseOperator& s, const DenseOperator& t,
                                       const Tolerances& tol = Tolerances::defaults());

/// S is a restriction of T (S ⊆ T).
bool is_extension(const DenseOperator& s, const DenseOperator& t, const Tolerances& tol = Tolerances::defaults());

}  // namespace formcalc
