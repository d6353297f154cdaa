#pragma once

#include <string>
#include <vector>

#include "formcalc/factorization.hpp"
#include "formcalc/forms.hpp"
#include "formcalc/report.hpp"

namespace formcalc {

enum class ClosednessKind { LowerBoundAutomatic, Sequential };

const char* to_string(ClosednessKind k);

/// One sequential run: x_k = truncations of `limit` at the listed N_k.
struct ClosednessRun {
  Vector limit;
  std::vector<long> truncations;
  std::vector<double> tails;  // t(x_k - x, x_k - x), certified upper bounds
  double limit_energy = 0.0;  // t(x, x)
};

struct ClosednessWitness {
  ClosednessKind kind = ClosednessKind::LowerBoundAutomatic;
  std::vector<ClosednessRun> runs;
  std::string note;
};

/// Dense forms are closed automatically. Diagonal sequence forms execute the
/// runs: the limit must lie in D and the form tails must contract to zero;
/// a run whose form increments do not contract throws NotClosed.
ClosednessWitness is_closed(const SesquilinearForm& t, const std::vector<Vector>& limits);

struct FormSumOptions {
  // Hilbert-space allowance: lets gamma_A = 0 through for diagonal sequence forms.
  bool allow_zero_lower_bound = false;
  int samples = 16;
  std::uint64_t seed = 1;
};

struct FormSumResult {
  DenseOperator AB;             // A form-sum B
  CMatrix joint;                // dense: [J_A J_B], n x (r_A + r_B)
  Index rank_a = 0, rank_b = 0;
  Index dim_hab = 0;            // dense: dim of dom J_A^* intersected with dom t_B
  Index dim_effective = 0;      // dense: dim of the effective ambient space
  double joint_residual = 0.0;   // worst |[J^*y]^2 - (AB y, y)| relative
  double extension_residual = 0.0;  // A + B on dom A ∩ dom B inside AB
  double collapse_residual = NAN;   // ||AB - (A + B)|| when both are everywhere defined
  LowerBoundCertificate gamma_a;
};

FormSumResult form_sum(const DenseOperator& a, const DenseOperator& b, const FormSumOptions& opts = {});

struct JointFactorization {
  CMatrix J;                  // H_A ⊕ H_B -> X*
  double jstar_residual = 0.0;    // J^* z against A z ⊕ B z on dom A ∩ dom B
  double identity_residual = 0.0; // J J^* against the form sum
  double extension_residual = 0.0;  // A + B inside J J^*
};

JointFactorization joint_factorize(const DenseOperator& a, const DenseOperator& b, const FormSumOptions& opts = {});

struct CommutantLift {
  DenseOperator E;
  FactorizationResult factor;  // of A
  CMatrix E_hat;               // on orthonormal H_A coordinates
  double r_E2 = 0.0;           // spectral radius of E^2
  double invariance_residual = 0.0;  // E(dom A) inside dom A
  double commutation_residual = 0.0;         // E^* A inside A E
  double well_defined_residual = 0.0;
  double bound_ratio = 0.0;     // max [E^ A x] / ([A x] r(E^2)^{1/2}) over samples
  double bound_exact = 0.0;     // ||E^|| / r(E^2)^{1/2}
  double selfadjoint_residual = 0.0;
};

/// Lifts a bounded E with E^* A ⊆ A E to the bounded self-adjoint E^ on H_A,
/// E^(A x) = A E x. Throws NotCommuting when E^* A ⊆ A E or invariance fails.
CommutantLift lift_commutant(const DenseOperator& a, const DenseOperator& e, std::uint64_t seed = 1);

/// E^* (A form-sum B) ⊆ (A form-sum B) E and the intermediate inclusions.
Report commutation_formsum(const DenseOperator& a, const DenseOperator& b, const DenseOperator& e);

/// Lift of (E - lambda)^{-1} against (E^ - lambda)^{-1}, relative residual.
double resolvent_residual(const DenseOperator& a, const CommutantLift& lift, double lambda);

/// Spectrum of E^ real and inside sigma(E); resolvent identity at 3 real points.
Report spectrum_inclusion(const DenseOperator& a, const DenseOperator& e);

}  // namespace formcalc
