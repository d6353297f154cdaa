#include "formcalc/series.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "formcalc/errors.hpp"

namespace formcalc {
namespace {

constexpr double kRatioSnap = 1e-13;
constexpr double kPowerSnap = 1e-13;

bool same_shape(const SeqTerm& a, const SeqTerm& b) {
  return std::abs(a.power - b.power) <= kPowerSnap && std::abs(a.ratio - b.ratio) <= kRatioSnap * std::max(1.0, a.ratio);
}

// log of n^power ratio^n (ratio > 0)
double log_shape(const SeqTerm& t, double n) { return t.power * std::log(n) + n * std::log(t.ratio); }

double term_modulus(const SeqTerm& t, double n) {
  if (t.ratio == 0.0) return 0.0;
  return std::abs(t.coeff) * std::exp(log_shape(t, n));
}

bool positive_real(cplx c) { return c.real() > 0.0 && std::abs(c.imag()) <= 1e-14 * std::abs(c); }

// dominant term: largest ratio, then largest power
const SeqTerm* dominant(const std::vector<SeqTerm>& terms) {
  const SeqTerm* best = nullptr;
  for (const auto& t : terms) {
    if (!best || t.ratio > best->ratio * (1 + kRatioSnap) ||
        (std::abs(t.ratio - best->ratio) <= kRatioSnap * best->ratio && t.power > best->power))
      best = &t;
  }
  return best;
}

bool term_converges(const SeqTerm& t) { return t.ratio < 1.0 || (t.ratio == 1.0 && t.power < -1.0); }

}  // namespace

SeqRule::SeqRule(std::vector<SeqTerm> terms) : terms_(std::move(terms)) {
  for (const auto& t : terms_)
    require(t.ratio >= 0.0 && std::isfinite(t.ratio) && std::isfinite(t.power) && std::isfinite(t.coeff.real()) &&
                std::isfinite(t.coeff.imag()),
            ErrorCode::InvalidArgument, "sequence rule terms need finite power, coefficient and ratio >= 0");
  canonicalize();
}

SeqRule SeqRule::constant(cplx c) { return SeqRule({SeqTerm{c, 0.0, 1.0}}); }
SeqRule SeqRule::power(double alpha, cplx c) { return SeqRule({SeqTerm{c, alpha, 1.0}}); }
SeqRule SeqRule::geometric(double r, cplx c) { return SeqRule({SeqTerm{c, 0.0, r}}); }
SeqRule SeqRule::exponential(double rate, cplx c) { return SeqRule({SeqTerm{c, 0.0, std::exp(rate)}}); }

void SeqRule::canonicalize() {
  std::vector<SeqTerm> merged;
  for (auto t : terms_) {
    if (std::abs(t.ratio - 1.0) <= kRatioSnap) t.ratio = 1.0;
    if (t.ratio == 0.0 || t.coeff == cplx(0.0)) continue;
    auto it = std::find_if(merged.begin(), merged.end(), [&](const SeqTerm& m) { return same_shape(m, t); });
    if (it == merged.end())
      merged.push_back(t);
    else
      it->coeff += t.coeff;
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(), [](const SeqTerm& t) { return t.coeff == cplx(0.0); }),
               merged.end());
  std::sort(merged.begin(), merged.end(), [](const SeqTerm& a, const SeqTerm& b) {
    return a.ratio != b.ratio ? a.ratio < b.ratio : a.power < b.power;
  });
  terms_ = std::move(merged);
}

cplx SeqRule::operator()(long n) const {
  cplx sum = 0.0;
  const double x = static_cast<double>(n);
  for (const auto& t : terms_) {
    if (t.ratio == 0.0) continue;
    sum += t.coeff * std::exp(log_shape(t, x));
  }
  return sum;
}

SeqRule SeqRule::operator+(const SeqRule& other) const {
  std::vector<SeqTerm> all = terms_;
  all.insert(all.end(), other.terms_.begin(), other.terms_.end());
  return SeqRule(std::move(all));
}

SeqRule SeqRule::operator*(const SeqRule& other) const {
  std::vector<SeqTerm> all;
  all.reserve(terms_.size() * other.terms_.size());
  for (const auto& a : terms_)
    for (const auto& b : other.terms_) all.push_back({a.coeff * b.coeff, a.power + b.power, a.ratio * b.ratio});
  return SeqRule(std::move(all));
}

SeqRule SeqRule::scaled(cplx factor) const {
  std::vector<SeqTerm> all = terms_;
  for (auto& t : all) t.coeff *= factor;
  return SeqRule(std::move(all));
}

SeqRule SeqRule::conjugate() const {
  std::vector<SeqTerm> all = terms_;
  for (auto& t : all) t.coeff = std::conj(t.coeff);
  return SeqRule(std::move(all));
}

SeqRule SeqRule::magnitude_bound() const {
  std::vector<SeqTerm> all = terms_;
  for (auto& t : all) t.coeff = std::abs(t.coeff);
  return SeqRule(std::move(all));
}

SeqRule SeqRule::power_bound(double p) const {
  require(p >= 1.0, ErrorCode::InvalidArgument, "power bound needs p >= 1");
  const double j = static_cast<double>(terms_.size());
  std::vector<SeqTerm> all;
  for (const auto& t : terms_)
    all.push_back({std::pow(j, p - 1.0) * std::pow(std::abs(t.coeff), p), p * t.power, std::pow(t.ratio, p)});
  return SeqRule(std::move(all));
}

SeqRule SeqRule::squared_modulus() const { return (*this) * conjugate(); }

bool SeqRule::is_real() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const SeqTerm& t) { return std::abs(t.coeff.imag()) <= 1e-14 * std::abs(t.coeff); });
}

bool SeqRule::approx_equal(const SeqRule& other, double rel_tol) const {
  const SeqRule diff = *this + other.scaled(-1.0);
  double scale = 0.0;
  for (const auto& t : terms_) scale = std::max(scale, std::abs(t.coeff));
  for (const auto& t : other.terms_) scale = std::max(scale, std::abs(t.coeff));
  return std::all_of(diff.terms_.begin(), diff.terms_.end(),
                     [&](const SeqTerm& t) { return std::abs(t.coeff) <= rel_tol * scale; });
}

double SeqRule::certified_infimum() const {
  double total = 0.0;
  for (const auto& t : terms_) {
    require(positive_real(t.coeff), ErrorCode::Uncertified,
            "infimum certificate needs positive real coefficients, got " + describe());
    const double c = t.coeff.real();
    const double l = std::log(t.ratio);
    const auto at = [&](double n) { return c * std::exp(log_shape(t, n)); };
    if (l >= 0.0 && t.power >= 0.0) {
      total += at(1.0);  // nondecreasing
    } else if (l <= 0.0 && t.power <= 0.0) {
      total += 0.0;      // nonincreasing to zero
    } else if (l < 0.0) {
      total += 0.0;      // rises then decays to zero
    } else {
      // l > 0, power < 0: single interior minimum at -power / l
      const double star = std::max(1.0, -t.power / l);
      total += std::min(at(std::floor(star)), at(std::ceil(star)));
    }
  }
  return total;
}

double SeqRule::certified_supremum() const {
  double total = 0.0;
  for (const auto& t : terms_) {
    const double c = std::abs(t.coeff);
    const double l = std::log(t.ratio);
    const auto at = [&](double n) { return c * std::exp(log_shape(t, n)); };
    if (l > 0.0 || (l == 0.0 && t.power > 0.0)) return INFINITY;
    if (t.power <= 0.0) {
      total += at(1.0);
    } else {
      const double star = std::max(1.0, -t.power / l);
      total += std::max(at(std::floor(star)), at(std::ceil(star)));
    }
  }
  return total;
}

std::string SeqRule::describe() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& t : terms_) {
    if (!first) os << " + ";
    first = false;
    os << "(" << t.coeff.real();
    if (t.coeff.imag() != 0.0) os << (t.coeff.imag() < 0 ? "-" : "+") << std::abs(t.coeff.imag()) << "i";
    os << ")";
    if (t.power != 0.0) os << "*n^" << t.power;
    if (t.ratio != 1.0) os << "*" << t.ratio << "^n";
  }
  return os.str();
}

const char* to_string(SeriesVerdict v) {
  switch (v) {
    case SeriesVerdict::Converges: return "converges";
    case SeriesVerdict::Diverges: return "diverges";
    case SeriesVerdict::Uncertified: return "uncertified";
  }
  return "unknown";
}

double term_tail_bound(const SeqTerm& term, long last) {
  const double c = std::abs(term.coeff);
  if (c == 0.0 || term.ratio == 0.0) return 0.0;
  if (term.ratio < 1.0) {
    const double n0 = static_cast<double>(last + 1);
    const double q = term.power > 0.0 ? std::pow((n0 + 1.0) / n0, term.power) * term.ratio : term.ratio;
    if (q >= 1.0) return INFINITY;
    return std::exp(std::log(c) + log_shape(term, n0) - std::log1p(-q));
  }
  if (term.ratio == 1.0 && term.power < -1.0) {
    const double e = -term.power - 1.0;
    if (last >= 1) return c * std::pow(static_cast<double>(last), -e) / e;
    return c * (1.0 + 1.0 / e);
  }
  return INFINITY;
}

namespace {

// Estimate and error bound for sum_{n > m} of one term.
std::pair<cplx, double> term_tail(const SeqTerm& t, long m) {
  if (t.ratio == 1.0 && t.power < -1.0) {
    // Euler-Maclaurin through the first-derivative term; for x^a with a < 0
    // the remainder is bounded by the first omitted term |D^3 f(m)| / 720.
    const long double a = t.power, x = static_cast<long double>(m);
    const long double integral = std::pow(x, a + 1) / (-a - 1);
    const long double f0 = std::pow(x, a), f1 = a * std::pow(x, a - 1);
    const long double f3 = std::abs(a * (a - 1) * (a - 2)) * std::pow(x, a - 3);
    const double est = static_cast<double>(integral - f0 / 2 - f1 / 12);
    return {t.coeff * est, 2.0 * std::abs(t.coeff) * static_cast<double>(f3 / 720)};
  }
  SeqTerm mag = t;
  mag.coeff = std::abs(t.coeff);
  return {0.0, term_tail_bound(mag, m)};
}

std::pair<cplx, double> rule_tail(const SeqRule& f, long m) {
  cplx est = 0.0;
  double err = 0.0;
  for (const auto& t : f.terms()) {
    const auto [e, b] = term_tail(t, m);
    est += e;
    err += b;
  }
  return {est, err};
}

}  // namespace

TailEstimate tail_estimate(const SeqRule& f, long last) {
  const auto [est, err] = rule_tail(f, std::max(last, 1L));
  return {est, err};
}

RuleSum sum_rule(const SeqRule& f, long first, double tol, long max_terms) {
  first = std::max(first, 1L);
  RuleSum out;
  out.last_index = first - 1;
  if (f.is_zero()) return out;
  for (const auto& t : f.terms())
    require(term_converges(t), ErrorCode::Uncertified, "series term not summable: " + SeqRule({t}).describe());
  long m = std::max(first + 31, 64L);
  auto [est, err] = rule_tail(f, m);
  while (!(err <= tol) && m < max_terms) {
    m = std::min(2 * m, max_terms);
    std::tie(est, err) = rule_tail(f, m);
  }
  require(err <= tol, ErrorCode::Uncertified, "series tail not certified below tolerance: " + f.describe());
  std::complex<long double> acc = 0.0L;
  for (long n = first; n <= m; ++n) {
    const cplx v = f(n);
    acc += std::complex<long double>(v.real(), v.imag());
  }
  out.value = cplx(static_cast<double>(acc.real()), static_cast<double>(acc.imag())) + est;
  out.error_bound = err;
  out.last_index = m;
  return out;
}

SeriesCertificate certify_series(const SeqRule& f, long first, const SeriesOptions& opts) {
  SeriesCertificate cert;
  first = std::max(first, 1L);
  cert.last_index = first - 1;
  if (f.is_zero()) {
    cert.verdict = SeriesVerdict::Converges;
    cert.reason = "zero rule";
    return cert;
  }
  const SeqTerm* dom = dominant(f.terms());

  auto partial = [&](long from, long to, long checkpoint_base) {
    long double acc = 0.0L;
    long next_checkpoint = checkpoint_base;
    for (long n = from; n <= to; ++n) {
      const double v = f(n).real();
      if (!std::isfinite(v)) {
        cert.last_index = n - 1;
        cert.partial_sum = static_cast<double>(acc);
        return false;
      }
      acc += v;
      if (n == next_checkpoint) {
        cert.growth.emplace_back(n, static_cast<double>(acc));
        next_checkpoint *= 10;
      }
    }
    cert.last_index = to;
    cert.partial_sum = static_cast<double>(acc);
    return true;
  };

  if (term_converges(*dom)) {
    cert.verdict = SeriesVerdict::Converges;
    long m = std::max(first + 31, 64L);
    auto [est, err] = rule_tail(f, m);
    while (!(err <= opts.tail_tol) && m < opts.max_terms) {
      m = std::min(2 * m, opts.max_terms);
      std::tie(est, err) = rule_tail(f, m);
    }
    partial(first, m, 10);
    cert.tail_estimate = est.real();
    cert.tail_bound = err;
    cert.reason = "dominant term " + SeqRule({*dom}).describe() + " summable";
    return cert;
  }

  if (positive_real(dom->coeff)) {
    cert.verdict = SeriesVerdict::Diverges;
    partial(first, std::min(opts.max_terms, 100000L), 10);
    cert.tail_bound = INFINITY;
    cert.reason = "dominant term " + SeqRule({*dom}).describe() + " not summable";
    return cert;
  }
  cert.verdict = SeriesVerdict::Uncertified;
  cert.tail_bound = INFINITY;
  cert.reason = "dominant term has no positive real coefficient: " + f.describe();
  return cert;
}

}  // namespace formcalc
