#pragma once

#include <vector>

#include "formcalc/forms.hpp"
#include "formcalc/report.hpp"

namespace formcalc {

struct FriedrichsResult {
  DenseOperator A_F;
  SesquilinearForm energy_space;          // inner product of the completion H
  LowerBoundCertificate gamma_input;      // certified bound of a
  LowerBoundCertificate gamma_preserved;  // certified bound of A_F
  double extension_residual = 0.0;        // is_extension(a, A_F)
  double selfadjoint_residual = 0.0;
  double embedding_residual = 0.0;        // [t, y] - (a t, I_a y), sampled
  double embedding_injectivity = 0.0;     // smallest singular value of I_a (dense), 1 otherwise
};

/// Positive self-adjoint extension of a positive symmetric a with the same
/// lower bound. Dense: the operator of the closed form t_a. Sequence
/// (diagonal a_n >= gamma > 0): diag(a_n) on its maximal domain.
FriedrichsResult friedrichs(const DenseOperator& a, const DualityPair& pair);

/// Extension, self-adjointness, lower bound and embedding checks as a report.
Report verify_friedrichs(const DenseOperator& a, const FriedrichsResult& fr);

/// Whether y lies in the operator's domain. Sequence diagonal operators use
/// their domain rule; the maximal rule needs sum |a_n y_n|^2 < inf, decided by
/// a series certificate (throws Uncertified when undecidable).
bool in_domain(const DenseOperator& op, const Vector& y);

/// For each sample y in dom J_F^*, truncations y_N with certified energy
/// tails [J_F^*(y - y_N)]^2 decreasing to below 1e-8 (relative to [J_F^* y]^2
/// when that exceeds one). Throws OutOfDomain for samples outside dom J_F^*.
Report core_check(const DenseOperator& a, const FriedrichsResult& fr, const std::vector<Vector>& samples);

}  // namespace formcalc
