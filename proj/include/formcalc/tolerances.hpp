#pragma once

namespace formcalc {

/// Numerical thresholds used across the library. All values are multiplied
/// by FORMCALC_TOL_SCALE (default 1.0) when obtained through defaults().
struct Tolerances {
  double subspace = 1e-9;   // relative residual for span membership
  double action = 1e-9;     // relative residual for operator action agreement
  double identity = 1e-10;  // exact-identity checks
  double psd = 1e-12;       // eigenvalue floor for positivity
  double tail = 1e-12;      // certified series tail for pairings and norms

  static const Tolerances& defaults();
  static double scale();
};

}  // namespace formcalc
