#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "formcalc/errors.hpp"
#include "formcalc/linalg.hpp"
#include "formcalc/series.hpp"

namespace formcalc {

/// Dense: coordinates of C^n. Sequence: the first N coordinates of a
/// sequence space are stored, the rest follow a closed-form rule.
enum class Backend { Dense, Sequence };

const char* to_string(Backend b);

/// The pair <X, X*> with l_p norm on X and l_q on X*, 1/p + 1/q = 1.
class DualityPair {
 public:
  static DualityPair dense(Index n, double p = 2.0);
  static DualityPair sequence(Index truncation, double p = 2.0);

  Backend backend() const { return backend_; }
  Index dimension() const { return dimension_; }
  double p() const { return p_; }
  double q() const { return p_ / (p_ - 1.0); }
  bool hilbert() const { return p_ == 2.0; }

  /// The same backend seen from the dual side (exponent q).
  DualityPair dual() const { return DualityPair(backend_, dimension_, q()); }

 private:
  DualityPair(Backend backend, Index dimension, double p);

  Backend backend_;
  Index dimension_;
  double p_;
};

enum class TailKind { ExactlySupported, Generator };

struct PrimalTag {};
struct DualTag {};

/// A vector of X (PrimalTag) or a functional of X* (DualTag). In the
/// sequence backend the coordinates past the stored head are either zero or
/// given by a closed-form rule.
template <class Tag>
class Element {
 public:
  Element() = default;

  static Element dense(CVector coords) { return Element(Backend::Dense, std::move(coords), std::nullopt); }

  static Element finite(CVector head) { return Element(Backend::Sequence, std::move(head), std::nullopt); }

  static Element generated(const SeqRule& rule, Index truncation) {
    require(truncation >= 1, ErrorCode::InvalidArgument, "truncation must be >= 1");
    CVector head(truncation);
    for (Index i = 0; i < truncation; ++i) head(i) = rule(static_cast<long>(i + 1));
    return Element(Backend::Sequence, std::move(head), rule);
  }

  static Element sequence(CVector head, std::optional<SeqRule> tail) {
    return Element(Backend::Sequence, std::move(head), std::move(tail));
  }

  Backend backend() const { return backend_; }
  Index size() const { return coords_.size(); }
  const CVector& coords() const { return coords_; }
  TailKind tail_kind() const { return tail_ ? TailKind::Generator : TailKind::ExactlySupported; }
  const std::optional<SeqRule>& tail_rule() const { return tail_; }

  /// Coordinate n (1-based); beyond the head the tail rule applies.
  cplx at(long n) const {
    if (n <= coords_.size()) return coords_(n - 1);
    return tail_ ? (*tail_)(n) : cplx(0.0);
  }

  /// Same element with the head materialized out to `length` coordinates.
  Element extended(Index length) const {
    if (length <= coords_.size()) return *this;
    require(backend_ == Backend::Sequence, ErrorCode::BackendMismatch, "cannot extend a dense element");
    CVector head(length);
    for (Index i = 0; i < length; ++i) head(i) = at(static_cast<long>(i + 1));
    return Element(backend_, std::move(head), tail_);
  }

  Element scaled(cplx factor) const {
    std::optional<SeqRule> tail;
    if (tail_) tail = tail_->scaled(factor);
    return Element(backend_, coords_ * factor, std::move(tail));
  }

  Element operator+(const Element& other) const {
    require(backend_ == other.backend_, ErrorCode::BackendMismatch, "element backends differ");
    if (backend_ == Backend::Dense) {
      require(size() == other.size(), ErrorCode::BackendMismatch, "dense lengths differ");
      return dense(coords_ + other.coords_);
    }
    const Index len = std::max(size(), other.size());
    Element a = extended(len), b = other.extended(len);
    std::optional<SeqRule> tail;
    if (a.tail_ || b.tail_) tail = a.tail_.value_or(SeqRule{}) + b.tail_.value_or(SeqRule{});
    return Element(Backend::Sequence, a.coords_ + b.coords_, std::move(tail));
  }

  Element operator-(const Element& other) const { return *this + other.scaled(-1.0); }

  /// Keeps the first `length` coordinates and drops the tail.
  Element truncated(Index length) const {
    Element e = extended(length);
    return Element(backend_, e.coords_.head(std::min(length, e.size())).eval(), std::nullopt);
  }

 private:
  Element(Backend backend, CVector coords, std::optional<SeqRule> tail)
      : backend_(backend), coords_(std::move(coords)), tail_(std::move(tail)) {
    for (Index i = 0; i < coords_.size(); ++i)
      require(std::isfinite(coords_(i).real()) && std::isfinite(coords_(i).imag()), ErrorCode::InvalidArgument,
              "element coordinates must be finite");
  }

  Backend backend_ = Backend::Dense;
  CVector coords_;
  std::optional<SeqRule> tail_;
};

using Vector = Element<PrimalTag>;
using Functional = Element<DualTag>;

/// Coordinate identification between X and X* (Riesz map of the l_2 pairing).
Functional as_functional(const Vector& x);
Vector as_vector(const Functional& v);

struct Pairing {
  cplx value;
  double tail_bound = 0.0;  // certified |remainder| (sequence backend)
  long terms = 0;
};

/// (v, x) = sum_i v_i conj(x_i): linear in v, conjugate-linear in x.
/// Sequence backend throws Uncertified unless the remainder is <= tail_tol.
Pairing pair_certified(const Functional& v, const Vector& x, double tail_tol = 1e-12);
cplx pair(const Functional& v, const Vector& x);

/// (x, v) := conj((v, x)).
cplx pair(const Vector& x, const Functional& v);

/// l_p norm of the coordinates (including the certified tail).
double norm(const Vector& x, double p);
double norm(const Functional& v, double q);

}  // namespace formcalc
