#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "formcalc/forms.hpp"
#include "formcalc/formsum.hpp"
#include "formcalc/report.hpp"
#include "formcalc/series.hpp"

namespace formcalc {

/// Atoms omega_1, omega_2, ... with weights mu_n: a finite list or c * shape(n).
class DiscreteProbabilitySpace {
 public:
  static DiscreteProbabilitySpace finite(std::vector<double> weights);
  /// mu_n = c * shape(n), n >= 1, c normalizing the total mass.
  static DiscreteProbabilitySpace generated(const SeqRule& shape);
  /// mu_n = c e^{-rate n}.
  static DiscreteProbabilitySpace exponential(double rate);

  bool is_finite() const { return !rule_.has_value(); }
  Index atoms() const { return static_cast<Index>(weights_.size()); }  // finite spaces
  double weight(long n) const;
  double log_weight(long n) const;
  const SeqRule& rule() const { return *rule_; }
  double normalization() const { return c_; }
  double mass_error() const { return mass_error_; }  // certified |total mass - 1|

 private:
  std::vector<double> weights_;
  std::optional<SeqRule> rule_;
  double c_ = 1.0;
  double mass_error_ = 0.0;
};

/// Values xi(omega_n). A table stores one vector per atom of a finite space;
/// the power-factorial kind is xi(omega_n)_k = (scale n)^k / k! minus an
/// optional offset on the first coordinates.
class RandomVariable {
 public:
  enum class Kind { Table, PowerFactorial };

  static RandomVariable table(CMatrix values);  // d x atoms
  static RandomVariable power_factorial(double scale = 1.0);

  Kind kind() const { return kind_; }
  Index dimension() const { return values_.rows(); }  // table
  const CMatrix& values() const { return values_; }
  double scale() const { return scale_; }
  const CVector& offset() const { return offset_; }

  /// Coordinate k (1-based) of xi(omega_n).
  cplx coordinate(long n, long k) const;

  RandomVariable with_offset(CVector offset) const;

 private:
  Kind kind_ = Kind::Table;
  CMatrix values_;
  double scale_ = 1.0;
  CVector offset_;
};

struct WeakExpectation {
  Vector mean;                  // retained coordinates
  double tail_bound = 0.0;      // worst certified coordinate remainder
  double spot_check_residual = 0.0;  // |f(E xi) - E f(xi)| over 10 random functionals
};

/// Coordinatewise Pettis integral over the first `coords` coordinates
/// (all coordinates for tables). Throws Uncertified on a divergent coordinate.
WeakExpectation weak_expectation(const DiscreteProbabilitySpace& mu, const RandomVariable& xi, Index coords = 8,
                                 std::uint64_t seed = 1);

/// xi - E xi on the first `coords` coordinates (exact for tables).
RandomVariable centered(const DiscreteProbabilitySpace& mu, const RandomVariable& xi, Index coords = 8);

enum class Membership { In, Out, Uncertified };

struct SecondMomentCertificate {
  Membership verdict = Membership::Uncertified;
  std::optional<SeriesCertificate> series;  // majorant (in) or minorant (out)
  long minorant_from = 0;                   // index from which the minorant holds
  std::vector<std::pair<long, double>> growth;  // partial sums of mu_n |f(xi_n)|^2
  std::string reason;
};

/// Decides sum_n mu_n |f(xi(omega_n))|^2 < inf. Functionals are finitely
/// supported, or generated by one term c k^beta s^k with beta <= 0, s > 0.
SecondMomentCertificate second_moment(const DiscreteProbabilitySpace& mu, const RandomVariable& xi,
                                      const Functional& f);
bool in_second_moment_domain(const DiscreteProbabilitySpace& mu, const RandomVariable& xi, const Functional& f);

/// E f(xi) and E f(xi) conj(g(xi)) with certified tails.
cplx expectation(const DiscreteProbabilitySpace& mu, const RandomVariable& xi, const Functional& f,
                 double tol = 1e-12);
cplx second_moment_value(const DiscreteProbabilitySpace& mu, const RandomVariable& xi, const Functional& f,
                         const Functional& g, double tol = 1e-12);

/// t(f_i, f_j) = E f_i(xi) conj(f_j(xi)) on span of the basis functionals,
/// minus E f_i(xi) conj(E f_j(xi)) when centered. Throws OutOfDomain when a
/// basis functional lies outside D.
SesquilinearForm covariance_form(const DiscreteProbabilitySpace& mu, const RandomVariable& xi,
                                 const std::vector<Functional>& basis, bool centered = false);

/// Sequential closedness runs for the covariance form: truncations f_K of a
/// generated functional f with E|(f - f_K)(xi)|^2 -> 0. Throws NotClosed
/// when f is outside D or the tails do not contract.
ClosednessWitness covariance_closedness(const DiscreteProbabilitySpace& mu, const RandomVariable& xi,
                                        const std::vector<Functional>& limits);

/// Representation of the covariance form; maps X* to X. Gated on gamma > 0.
RepresentationResult covariance_operator(const DiscreteProbabilitySpace& mu, const RandomVariable& xi,
                                         const std::vector<Functional>& basis, const DualityPair& pair,
                                         bool centered = true);

/// Finite spaces: Cov(xi + eta) on the product space against
/// the form sum of Cov(xi) and Cov(eta); coordinate functionals as basis.
Report independent_sum(const DiscreteProbabilitySpace& mu, const RandomVariable& xi,
                       const DiscreteProbabilitySpace& nu, const RandomVariable& eta);

/// Diagonal covariances: xi = sum_k eps_k sigma_k e_k with
/// independent signs (sigma_k^2 = var_xi(k)), likewise eta; brute force over
/// the first `coords` coordinates plus equality of the coefficient rules.
Report independent_sum_diagonal(const SeqRule& var_xi, const SeqRule& var_eta, Index coords = 6);

/// Product space of two finite spaces and the variable xi + eta on it.
std::pair<DiscreteProbabilitySpace, RandomVariable> independent_product(const DiscreteProbabilitySpace& mu,
                                                                        const RandomVariable& xi,
                                                                        const DiscreteProbabilitySpace& nu,
                                                                        const RandomVariable& eta);

}  // namespace formcalc
