#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "formcalc/duality.hpp"
#include "formcalc/operator.hpp"
#include "formcalc/report.hpp"
#include "formcalc/series.hpp"

namespace formcalc {

/// A = J J^* through the auxiliary space H_A, the completion of ran A under
/// [Ax, Ay] = (Ax, y). H_A is represented by the orthonormal basis
/// u_k = A Z C_k, where Z is the domain basis and C^* F C = I for F = Z^* A Z.
struct FactorizationResult {
  CMatrix domain_basis;  // Z
  CMatrix action;        // Y = A Z
  CMatrix form;          // F(i, j) = (A z_j, z_i)
  CMatrix coefficients;  // C
  CMatrix J;             // n x rank, J e_k = u_k
  Index rank = 0;
  Index action_rank = 0;           // numerical rank of Y (for comparison)
  double well_defined_residual = 0.0;  // worst ||A x|| over (A x, x) = 0, relative
  double identity_residual = 0.0;      // JJ^* against A on dom A

  /// Gram of H_A on the spanning family {A z_j}: [A z_i, A z_j] = (A z_i, z_j).
  CMatrix gram() const { return form.transpose(); }
  /// J^* y in orthonormal H_A coordinates.
  CVector jstar(const CVector& y) const { return J.adjoint() * y; }
  /// H_A coordinates of A (Z c).
  CVector coordinates_of_image(const CVector& c) const { return coefficients.adjoint() * (form * c); }
  /// JJ^* restricted to dom A.
  DenseOperator jjstar() const;
};

/// Throws NotSymmetric / Indefinite when A is not positive symmetric, and
/// Indefinite when (A x, x) = 0 does not force A x = 0 on the domain.
FactorizationResult factorize(const DenseOperator& a);

enum class FormValueKind { ExactEigensolve, Grid, TailSum, TailDivergence, KernelDivergence };

const char* to_string(FormValueKind k);

/// sup { |(A x, y)|^2 : x in dom A, (A x, x) <= 1 }.
struct FormValue {
  double value = 0.0;  // may be +inf
  FormValueKind kind = FormValueKind::ExactEigensolve;
  CVector witness;                 // maximizing x (dense, finite value)
  double cross_check = NAN;        // value from the constrained maximization
  double cross_check_residual = 0.0;
  std::optional<SeriesCertificate> series;
  bool finite() const { return std::isfinite(value); }
};

FormValue form_on_X(const DenseOperator& a, const Vector& y);

/// form_on_X against one operator for many vectors; factorizes once.
class FormEvaluator {
 public:
  explicit FormEvaluator(const DenseOperator& a);
  FormValue operator()(const Vector& y) const;
  const FactorizationResult& factorization() const { return fr_; }

 private:
  DenseOperator a_;
  FactorizationResult fr_;
  RVector values_;
  CMatrix vectors_;
  CMatrix matrix_;  // coordinate matrix when the domain is full
  double action_norm_ = 0.0;
  CMatrix pivot_embed_;
  CMatrix pivot_block_;
};
bool in_dom_Jstar(const DenseOperator& a, const Vector& y);

enum class Order { AGeqB, BGeqA, Equal, Incomparable };

const char* to_string(Order o);

struct ProbeValue {
  Vector y;
  double form_a = 0.0;
  double form_b = 0.0;
  std::string origin;
};

struct OrderingReport {
  Order verdict = Order::Incomparable;
  std::vector<ProbeValue> probes;
  bool a_domain_in_b = true;  // dom J_A^* in dom J_B^* over the probes
  bool b_domain_in_a = true;
  double slack = 1e-9;
  bool a_geq_b = false;
  bool b_geq_a = false;
};

struct CompareOptions {
  std::uint64_t seed = 1;
  int random_probes = 8;
  double slack = 1e-9;
};

/// A >= B iff dom J_A^* in dom J_B^* and the form of A dominates that of B.
/// Decided over the supplied samples plus basis, random and eigenvector probes.
OrderingReport compare(const DenseOperator& a, const DenseOperator& b, const std::vector<Vector>& samples,
                       const CompareOptions& opts = {});

/// Requires compare(A, B) = Equal (throws NotEqual) and verifies A = B as operators.
Report antisymmetry_check(const DenseOperator& a, const DenseOperator& b, const CompareOptions& opts = {});

/// form_on_X(A, y) against ||A^{1/2} y||^2 on the samples (dense, full domain).
Report hilbert_consistency(const DenseOperator& a, const std::vector<CVector>& samples);

}  // namespace formcalc
