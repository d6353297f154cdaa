#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "formcalc/linalg.hpp"

namespace formcalc {

/// coeff * n^power * ratio^n, evaluated for n = 1, 2, ...
struct SeqTerm {
  cplx coeff{1.0, 0.0};
  double power = 0.0;
  double ratio = 1.0;
};

/// Closed-form coefficient rule: a finite sum of power-exponential terms.
/// The family is closed under sums and products, which is what lets every
/// tail sum in the sequence backend carry a ratio- or integral-test bound.
class SeqRule {
 public:
  SeqRule() = default;
  explicit SeqRule(std::vector<SeqTerm> terms);

  static SeqRule constant(cplx c);
  static SeqRule power(double alpha, cplx c = 1.0);       // c n^alpha
  static SeqRule geometric(double r, cplx c = 1.0);       // c r^n
  static SeqRule exponential(double rate, cplx c = 1.0);  // c e^{rate n}

  cplx operator()(long n) const;

  SeqRule operator+(const SeqRule& other) const;
  SeqRule operator*(const SeqRule& other) const;
  SeqRule scaled(cplx factor) const;
  SeqRule conjugate() const;

  /// Termwise majorant sum |c| n^a r^n  >= |f(n)|.
  SeqRule magnitude_bound() const;
  /// Majorant of |f(n)|^p using (sum u_j)^p <= J^{p-1} sum u_j^p.
  SeqRule power_bound(double p) const;
  /// |f(n)|^2 expanded as f * conj(f).
  SeqRule squared_modulus() const;

  const std::vector<SeqTerm>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_real() const;
  bool approx_equal(const SeqRule& other, double rel_tol = 1e-12) const;

  /// Certified lower bound of inf_{n>=1} f(n) for rules whose terms all have
  /// positive real coefficients; throws Uncertified otherwise.
  double certified_infimum() const;
  /// Certified upper bound of sup_{n>=1} |f(n)|, +inf when unbounded.
  double certified_supremum() const;

  std::string describe() const;

 private:
  void canonicalize();
  std::vector<SeqTerm> terms_;
};

enum class SeriesVerdict { Converges, Diverges, Uncertified };

const char* to_string(SeriesVerdict v);

struct SeriesCertificate {
  SeriesVerdict verdict = SeriesVerdict::Uncertified;
  double partial_sum = 0.0;   // sum from first to last_index
  long last_index = 0;
  double tail_estimate = 0.0; // estimate of the remainder past last_index
  double tail_bound = 0.0;    // bound on |series - value()| (inf if none)
  std::vector<std::pair<long, double>> growth;  // partial sums at checkpoints
  std::string reason;

  double value() const { return partial_sum + tail_estimate; }
  /// Bound on the true remainder past last_index.
  double remainder_bound() const { return std::abs(tail_estimate) + tail_bound; }
  bool certified_to(double tol) const {
    return verdict == SeriesVerdict::Converges && tail_bound <= tol;
  }
};

struct SeriesOptions {
  double tail_tol = 1e-12;
  long max_terms = 1L << 21;
};

/// Sum of a non-negative series given by a closed-form rule, n >= first.
/// Convergence is decided analytically from the dominant term; the value is
/// a partial sum plus a rigorous tail bound.
SeriesCertificate certify_series(const SeqRule& nonnegative, long first, const SeriesOptions& opts = {});

struct RuleSum {
  cplx value;
  double error_bound = 0.0;
  long last_index = 0;
};

/// sum_{n >= first} f(n) for a rule whose terms are all summable. Algebraic
/// terms get an Euler-Maclaurin tail correction with a certified remainder;
/// throws Uncertified unless the total error is <= tol.
RuleSum sum_rule(const SeqRule& f, long first, double tol, long max_terms = 1L << 22);

struct TailEstimate {
  cplx estimate;
  double error_bound = 0.0;  // inf when no certificate applies at `last`
  double upper_bound() const { return std::abs(estimate) + error_bound; }
};

/// sum_{n > last} f(n) without summing any terms: ratio bounds for geometric
/// terms, Euler-Maclaurin for algebraic ones.
TailEstimate tail_estimate(const SeqRule& f, long last);

/// Upper bound of sum_{n > last} |term| for a single term; +inf when the
/// bounding ratio is not below one at `last` or the term diverges.
double term_tail_bound(const SeqTerm& term, long last);

}  // namespace formcalc
