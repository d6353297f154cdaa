#include "formcalc/duality.hpp"

#include <cmath>

#include "formcalc/tolerances.hpp"

namespace formcalc {

const char* to_string(Backend b) { return b == Backend::Dense ? "dense" : "sequence"; }

DualityPair::DualityPair(Backend backend, Index dimension, double p) : backend_(backend), dimension_(dimension), p_(p) {
  require(p > 1.0 && std::isfinite(p), ErrorCode::InvalidArgument, "norm exponent must lie in (1, inf)");
  require(dimension >= 1, ErrorCode::InvalidArgument, "dimension / truncation must be >= 1");
}

DualityPair DualityPair::dense(Index n, double p) { return DualityPair(Backend::Dense, n, p); }
DualityPair DualityPair::sequence(Index truncation, double p) { return DualityPair(Backend::Sequence, truncation, p); }

Functional as_functional(const Vector& x) {
  if (x.backend() == Backend::Dense) return Functional::dense(x.coords());
  return Functional::sequence(x.coords(), x.tail_rule());
}

Vector as_vector(const Functional& v) {
  if (v.backend() == Backend::Dense) return Vector::dense(v.coords());
  return Vector::sequence(v.coords(), v.tail_rule());
}

Pairing pair_certified(const Functional& v, const Vector& x, double tail_tol) {
  require(v.backend() == x.backend(), ErrorCode::BackendMismatch, "pairing across backends");
  Pairing out;
  if (v.backend() == Backend::Dense) {
    require(v.size() == x.size(), ErrorCode::BackendMismatch, "pairing of dense elements with different lengths");
    out.value = x.coords().dot(v.coords());  // conj(x) . v
    out.terms = v.size();
    return out;
  }
  const Index n_head = std::max(v.size(), x.size());
  cplx sum = 0.0;
  for (long n = 1; n <= n_head; ++n) sum += v.at(n) * std::conj(x.at(n));
  out.terms = n_head;
  if (v.tail_rule() && x.tail_rule()) {
    const SeqRule product = (*v.tail_rule()) * x.tail_rule()->conjugate();
    const RuleSum tail = sum_rule(product, n_head + 1, tail_tol);
    sum += tail.value;
    out.terms = tail.last_index;
    out.tail_bound = tail.error_bound;
  }
  out.value = sum;
  return out;
}

cplx pair(const Functional& v, const Vector& x) { return pair_certified(v, x, Tolerances::defaults().tail).value; }

cplx pair(const Vector& x, const Functional& v) { return std::conj(pair(v, x)); }

namespace {

template <class E>
double lp_norm(const E& x, double p) {
  require(p > 1.0 && std::isfinite(p), ErrorCode::InvalidArgument, "norm exponent must lie in (1, inf)");
  long double acc = 0.0L;
  for (Index i = 0; i < x.size(); ++i) acc += std::pow(std::abs(x.coords()(i)), p);
  if (x.backend() == Backend::Sequence && x.tail_rule()) {
    const SeqRule bound = x.tail_rule()->power_bound(p);
    const double tol = Tolerances::defaults().tail * std::max(1.0, static_cast<double>(acc));
    const SeriesCertificate cert = certify_series(bound, x.size() + 1, {tol, 1L << 22});
    if (cert.verdict != SeriesVerdict::Converges)
      throw Error(ErrorCode::Uncertified, "norm tail not certified (" + cert.reason + ")");
    if (x.tail_rule()->terms().size() == 1) {
      // |x_n|^p coincides with the single-term bound
      require(cert.certified_to(tol), ErrorCode::Uncertified, "norm tail not certified below tolerance");
      acc += cert.value();
    } else {
      for (long n = x.size() + 1; n <= cert.last_index; ++n) acc += std::pow(std::abs(x.at(n)), p);
      require(cert.remainder_bound() <= tol, ErrorCode::Uncertified, "norm tail not certified below tolerance");
    }
  }
  return std::pow(static_cast<double>(acc), 1.0 / p);
}

}  // namespace

double norm(const Vector& x, double p) { return lp_norm(x, p); }
double norm(const Functional& v, double q) { return lp_norm(v, q); }

}  // namespace formcalc
