#include "formcalc/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "formcalc/random.hpp"

namespace formcalc {

namespace {

constexpr long kMaxAtoms = 1L << 16;

// value = mant * exp(log_scale); keeps e^{s n} growth representable.
struct LogValue {
  cplx mant{0.0, 0.0};
  double log_scale = 0.0;
};

// A functional restricted to coordinates k >= start.
struct FunctionalView {
  const Functional* f = nullptr;
  long start = 1;
  bool generated = false;
  SeqTerm term;  // f_k = term.coeff k^power ratio^k when generated
};

FunctionalView classify(const Functional& f, long start = 1) {
  FunctionalView v;
  v.f = &f;
  v.start = start;
  if (f.tail_kind() == TailKind::ExactlySupported) return v;
  const SeqRule& rule = *f.tail_rule();
  require(rule.terms().size() == 1, ErrorCode::Uncertified,
          "generated functionals must be a single term c k^beta s^k: " + rule.describe());
  const SeqTerm& t = rule.terms().front();
  require(t.power <= 0.0 && t.ratio > 0.0, ErrorCode::Uncertified,
          "generated functionals need beta <= 0 and s > 0: " + rule.describe());
  for (Index i = 0; i < f.size(); ++i) {
    const cplx r = rule(static_cast<long>(i + 1));
    require(std::abs(f.coords()(i) - r) <= 1e-13 * std::max(1.0, std::abs(r)), ErrorCode::Uncertified,
            "functional mixes an explicit head with a generator tail");
  }
  v.generated = true;
  v.term = t;
  return v;
}

bool is_zero(const FunctionalView& v) {
  if (v.generated) return std::abs(v.term.coeff) == 0.0;
  for (Index i = std::max<Index>(v.start - 1, 0); i < v.f->size(); ++i)
    if (v.f->coords()(i) != cplx(0.0)) return false;
  return true;
}

double log_power_factorial(double scale, long n, long k) {
  return static_cast<double>(k) * std::log(scale * static_cast<double>(n)) - std::lgamma(static_cast<double>(k) + 1.0);
}

cplx offset_part(const RandomVariable& xi, const FunctionalView& v) {
  cplx acc = 0.0;
  const CVector& o = xi.offset();
  for (long k = v.start; k <= o.size(); ++k) acc += v.f->at(k) * std::conj(o(k - 1));
  return acc;
}

// f(xi(omega_n)) = sum_k f_k conj(xi(omega_n)_k) over k >= start.
LogValue evaluate(const RandomVariable& xi, const FunctionalView& v, long n) {
  LogValue out;
  if (xi.kind() == RandomVariable::Kind::Table) {
    const Index d = xi.dimension();
    cplx acc = 0.0;
    for (long k = v.start; k <= d; ++k) acc += v.f->at(k) * std::conj(xi.values()(k - 1, n - 1));
    out.mant = acc;
    return out;
  }
  const double beta = xi.scale();
  if (!v.generated) {
    cplx acc = 0.0;
    for (long k = v.start; k <= v.f->size(); ++k) {
      const cplx fk = v.f->coords()(k - 1);
      if (fk != cplx(0.0)) acc += fk * std::exp(log_power_factorial(beta, n, k));
    }
    out.mant = acc - offset_part(xi, v);
    return out;
  }
  // c sum_{k >= start} k^b (s beta n)^k / k!; terms have a common phase.
  const SeqTerm& t = v.term;
  const double x = t.ratio * beta * static_cast<double>(n);
  const double lx = std::log(x);
  std::vector<double> logs;
  double lmax = -INFINITY;
  for (long k = v.start;; ++k) {
    const double kd = static_cast<double>(k);
    const double l = t.power * std::log(kd) + kd * lx - std::lgamma(kd + 1.0);
    logs.push_back(l);
    lmax = std::max(lmax, l);
    // past k >= 2x successive ratios are <= 1/2, so the rest is below the last term
    if ((kd >= 2.0 * x && l < lmax - 45.0) || k - v.start > 200000) break;
  }
  double rel = 0.0;
  for (double l : logs) rel += std::exp(l - lmax);
  const double log_s = lmax + std::log(rel);
  if (log_s < 650.0) {
    out.mant = t.coeff * std::exp(log_s) - offset_part(xi, v);
  } else {
    out.mant = t.coeff;  // the offset is below e^{-650} relative
    out.log_scale = log_s;
  }
  return out;
}

// |f(xi(omega_n))| <= U(n).
SeqRule upper_rule(const RandomVariable& xi, const FunctionalView& v) {
  require(xi.kind() == RandomVariable::Kind::PowerFactorial, ErrorCode::Unsupported,
          "table variables live on finite spaces");
  const double beta = xi.scale();
  double off = 0.0;
  const CVector& o = xi.offset();
  for (long k = v.start; k <= o.size(); ++k) off += std::abs(v.f->at(k)) * std::abs(o(k - 1));
  SeqRule u = off > 0.0 ? SeqRule::constant(off) : SeqRule{};
  if (v.generated) return u + SeqRule::exponential(v.term.ratio * beta, std::abs(v.term.coeff));
  for (long k = v.start; k <= v.f->size(); ++k) {
    const double fk = std::abs(v.f->coords()(k - 1));
    if (fk > 0.0) u = u + SeqRule::power(static_cast<double>(k), fk * std::exp(log_power_factorial(beta, 1, k)));
  }
  return u;
}

cplx combine(double log_weight, const LogValue& a, const LogValue& b) {
  return a.mant * std::conj(b.mant) * std::exp(log_weight + a.log_scale + b.log_scale);
}

struct Sum {
  cplx value;
  double error = 0.0;
};

// sum_n mu_n F(n) conj(G(n)); G absent means G = 1.
Sum expect_views(const DiscreteProbabilitySpace& mu, const RandomVariable& xi, const FunctionalView& fv,
                 const FunctionalView* gv, double tol) {
  Sum out;
  const LogValue one{cplx(1.0), 0.0};
  if (mu.is_finite()) {
    if (xi.kind() == RandomVariable::Kind::Table)
      require(xi.values().cols() == mu.atoms(), ErrorCode::InvalidArgument, "variable table and space sizes differ");
    long double re = 0.0L, im = 0.0L;
    for (long n = 1; n <= mu.atoms(); ++n) {
      const cplx t = combine(mu.log_weight(n), evaluate(xi, fv, n), gv ? evaluate(xi, *gv, n) : one);
      re += t.real();
      im += t.imag();
    }
    out.value = cplx(static_cast<double>(re), static_cast<double>(im));
    return out;
  }
  require(xi.kind() == RandomVariable::Kind::PowerFactorial, ErrorCode::InvalidArgument,
          "table variables need a finite space");
  if (is_zero(fv) || (gv && is_zero(*gv))) return out;
  SeqRule majorant = mu.rule() * upper_rule(xi, fv);
  if (gv) majorant = majorant * upper_rule(xi, *gv);
  long double re = 0.0L, im = 0.0L;
  long done = 0;
  for (long n_max = 32; n_max <= kMaxAtoms; n_max *= 2) {
    for (long n = done + 1; n <= n_max; ++n) {
      const cplx t = combine(mu.log_weight(n), evaluate(xi, fv, n), gv ? evaluate(xi, *gv, n) : one);
      re += t.real();
      im += t.imag();
    }
    done = n_max;
    out.value = cplx(static_cast<double>(re), static_cast<double>(im));
    out.error = tail_estimate(majorant, n_max).upper_bound();
    if (out.error <= tol * std::max(std::abs(out.value), 1e-300) || out.error == 0.0) return out;
  }
  throw Error(ErrorCode::Uncertified, "expectation tail not certified: majorant " + majorant.describe());
}

double real_log(double v) { return v > 0.0 ? std::log(v) : -INFINITY; }

}  // namespace

// ---- DiscreteProbabilitySpace ----

DiscreteProbabilitySpace DiscreteProbabilitySpace::finite(std::vector<double> weights) {
  require(!weights.empty(), ErrorCode::InvalidArgument, "a probability space needs atoms");
  double total = 0.0;
  for (double w : weights) {
    require(std::isfinite(w) && w > 0.0, ErrorCode::InvalidArgument, "weights must be positive");
    total += w;
  }
  require(std::abs(total - 1.0) <= 1e-12, ErrorCode::InvalidArgument, "weights must sum to 1");
  DiscreteProbabilitySpace s;
  s.weights_ = std::move(weights);
  s.mass_error_ = std::abs(total - 1.0);
  return s;
}

DiscreteProbabilitySpace DiscreteProbabilitySpace::generated(const SeqRule& shape) {
  require(!shape.is_zero(), ErrorCode::InvalidArgument, "weight rule is zero");
  for (const SeqTerm& t : shape.terms())
    require(t.coeff.real() > 0.0 && t.coeff.imag() == 0.0 && t.ratio > 0.0, ErrorCode::InvalidArgument,
            "weight rule terms must be positive");
  const RuleSum total = sum_rule(shape, 1, 1e-14);
  require(total.value.real() > 0.0, ErrorCode::InvalidArgument, "weight rule has no mass");
  DiscreteProbabilitySpace s;
  s.c_ = 1.0 / total.value.real();
  s.rule_ = shape.scaled(s.c_);
  s.mass_error_ = s.c_ * total.error_bound;
  require(s.mass_error_ <= 1e-12, ErrorCode::Uncertified, "total mass not certified to 1e-12");
  return s;
}

DiscreteProbabilitySpace DiscreteProbabilitySpace::exponential(double rate) {
  require(rate > 0.0, ErrorCode::InvalidArgument, "rate must be positive");
  const double r = std::exp(-rate);
  DiscreteProbabilitySpace s;
  s.c_ = (1.0 - r) / r;
  s.rule_ = SeqRule::geometric(r, s.c_);
  return s;
}

double DiscreteProbabilitySpace::weight(long n) const {
  if (rule_) return (*rule_)(n).real();
  require(n >= 1 && n <= atoms(), ErrorCode::InvalidArgument, "atom index out of range");
  return weights_[static_cast<std::size_t>(n - 1)];
}

double DiscreteProbabilitySpace::log_weight(long n) const {
  if (rule_ && rule_->terms().size() == 1) {
    const SeqTerm& t = rule_->terms().front();
    const double nd = static_cast<double>(n);
    return std::log(t.coeff.real()) + t.power * std::log(nd) + nd * std::log(t.ratio);
  }
  return real_log(weight(n));
}

// ---- RandomVariable ----

RandomVariable RandomVariable::table(CMatrix values) {
  require(values.rows() >= 1 && values.cols() >= 1, ErrorCode::InvalidArgument, "empty value table");
  require(values.allFinite(), ErrorCode::InvalidArgument, "values must be finite");
  RandomVariable v;
  v.kind_ = Kind::Table;
  v.values_ = std::move(values);
  return v;
}

RandomVariable RandomVariable::power_factorial(double scale) {
  require(scale > 0.0 && std::isfinite(scale), ErrorCode::InvalidArgument, "scale must be positive");
  RandomVariable v;
  v.kind_ = Kind::PowerFactorial;
  v.scale_ = scale;
  return v;
}

cplx RandomVariable::coordinate(long n, long k) const {
  if (kind_ == Kind::Table) return values_(k - 1, n - 1);
  cplx v = std::exp(log_power_factorial(scale_, n, k));
  if (k <= offset_.size()) v -= offset_(k - 1);
  return v;
}

RandomVariable RandomVariable::with_offset(CVector offset) const {
  require(kind_ == Kind::PowerFactorial, ErrorCode::InvalidArgument, "offsets apply to generated variables");
  RandomVariable v = *this;
  v.offset_ = std::move(offset);
  return v;
}

// ---- expectations ----

WeakExpectation weak_expectation(const DiscreteProbabilitySpace& mu, const RandomVariable& xi, Index coords,
                                 std::uint64_t seed) {
  WeakExpectation out;
  random::Engine rng(seed);
  CVector mean;
  if (xi.kind() == RandomVariable::Kind::Table) {
    require(mu.is_finite() && xi.values().cols() == mu.atoms(), ErrorCode::InvalidArgument,
            "variable table and space sizes differ");
    mean = CVector::Zero(xi.dimension());
    for (long n = 1; n <= mu.atoms(); ++n) mean += mu.weight(n) * xi.values().col(n - 1);
    out.mean = Vector::dense(mean);
  } else {
    require(coords >= 1, ErrorCode::InvalidArgument, "need at least one coordinate");
    mean = CVector::Zero(coords);
    for (long k = 1; k <= coords; ++k) {
      if (mu.is_finite()) {
        for (long n = 1; n <= mu.atoms(); ++n) mean(k - 1) += mu.weight(n) * xi.coordinate(n, k);
        continue;
      }
      const SeqRule term = mu.rule() * SeqRule::power(static_cast<double>(k),
                                                     std::exp(log_power_factorial(xi.scale(), 1, k)));
      const SeriesCertificate cert = certify_series(term, 1);
      require(cert.verdict != SeriesVerdict::Diverges, ErrorCode::OutOfDomain,
              "coordinate " + std::to_string(k) + " of the expectation diverges");
      const RuleSum s = sum_rule(term, 1, 1e-12);
      mean(k - 1) = s.value;
      if (k <= xi.offset().size()) mean(k - 1) -= xi.offset()(k - 1);
      out.tail_bound = std::max(out.tail_bound, s.error_bound);
    }
    out.mean = Vector::finite(mean);
  }

  for (int i = 0; i < 10; ++i) {
    const CVector c = random::gaussian_vector(rng, mean.size());
    const Functional f = xi.kind() == RandomVariable::Kind::Table ? Functional::dense(c) : Functional::finite(c);
    const cplx lhs = pair(f, out.mean);
    const cplx rhs = expectation(mu, xi, f);
    out.spot_check_residual = std::max(out.spot_check_residual, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }
  return out;
}

RandomVariable centered(const DiscreteProbabilitySpace& mu, const RandomVariable& xi, Index coords) {
  const WeakExpectation e = weak_expectation(mu, xi, coords);
  if (xi.kind() == RandomVariable::Kind::Table) {
    CMatrix v = xi.values();
    v.colwise() -= e.mean.coords();
    return RandomVariable::table(std::move(v));
  }
  const Index len = std::max<Index>(coords, xi.offset().size());
  CVector off = CVector::Zero(len);
  off.head(xi.offset().size()) = xi.offset();
  off.head(coords) += e.mean.coords();
  return xi.with_offset(std::move(off));
}

cplx expectation(const DiscreteProbabilitySpace& mu, const RandomVariable& xi, const Functional& f, double tol) {
  return expect_views(mu, xi, classify(f), nullptr, tol).value;
}

cplx second_moment_value(const DiscreteProbabilitySpace& mu, const RandomVariable& xi, const Functional& f,
                         const Functional& g, double tol) {
  const FunctionalView fv = classify(f), gv = classify(g);
  return expect_views(mu, xi, fv, &gv, tol).value;
}

// ---- second-moment domain ----

SecondMomentCertificate second_moment(const DiscreteProbabilitySpace& mu, const RandomVariable& xi,
                                      const Functional& f) {
  SecondMomentCertificate out;
  FunctionalView v;
  try {
    v = classify(f);
  } catch (const Error& e) {
    out.reason = e.what();
    return out;
  }
  if (is_zero(v)) {
    out.verdict = Membership::In;
    out.reason = "zero functional";
    return out;
  }
  if (mu.is_finite()) {
    out.verdict = Membership::In;
    out.reason = "finite probability space";
    return out;
  }
  require(xi.kind() == RandomVariable::Kind::PowerFactorial, ErrorCode::InvalidArgument,
          "table variables need a finite space");

  const SeqRule u = upper_rule(xi, v);
  const SeriesCertificate upper = certify_series(mu.rule() * u.squared_modulus(), 1);
  if (upper.verdict == SeriesVerdict::Converges) {
    out.verdict = Membership::In;
    out.series = upper;
    out.reason = "majorant " + upper.reason;
    return out;
  }

  // Minorant |f(xi_n)| >= lead(n) / 4 from some n on.
  const double beta = xi.scale();
  const double off = std::abs(offset_part(xi, v));
  SeqRule lead;
  std::function<bool(long)> holds;
  if (v.generated) {
    // sum_{k>=1} k^b x^k / k! >= x^{-m} (e^x - sum_{j<=m} x^j / j!), m = ceil(-b),
    // and the bracket is >= e^x / 2 once e^x >= 2 sum_{j<=m} x^j / j!.
    const double m = std::ceil(-v.term.power);
    const double sb = v.term.ratio * beta;
    const double lc = std::log(std::abs(v.term.coeff));
    lead = SeqRule({SeqTerm{std::abs(v.term.coeff) * std::pow(sb, -m), -m, std::exp(sb)}});
    holds = [=](long n) {
      const double x = sb * static_cast<double>(n);
      double poly = 0.0, term = 1.0;
      for (int j = 0; j <= static_cast<int>(m); ++j) {
        if (j > 0) term *= x / j;
        poly += term;
      }
      const bool bracket = x >= std::log(2.0 * poly);
      const bool offset_small = lc - m * std::log(x) + x - std::log(4.0) >= real_log(off);
      return bracket && offset_small;
    };
  } else {
    // P(n) = sum_k a_k n^k - off; |P(n)| >= |a_K| n^K / 2 once the lower terms are below half.
    const long top = static_cast<long>(f.size());
    long K = top;
    while (K >= v.start && f.coords()(K - 1) == cplx(0.0)) --K;
    std::vector<double> a(static_cast<std::size_t>(K + 1), 0.0);
    for (long k = v.start; k <= K; ++k) a[k] = std::abs(f.coords()(k - 1)) * std::exp(log_power_factorial(beta, 1, k));
    lead = SeqRule::power(static_cast<double>(K), a[K] * 2.0);  // |lead| / 4 = a_K n^K / 2
    holds = [=](long n) {
      const double nd = static_cast<double>(n);
      double lower = off * std::pow(nd, -static_cast<double>(K));
      for (long k = 1; k < K; ++k) lower += a[k] * std::pow(nd, static_cast<double>(k - K));
      return lower <= a[K] / 2.0;
    };
  }
  long from = 0;
  for (long n = 1; n <= 100000; ++n)
    if (holds(n)) {
      from = n;
      break;
    }
  if (from == 0) {
    out.reason = "no minorant threshold below n = 100000";
    return out;
  }
  const SeqRule minorant = mu.rule() * lead.squared_modulus().scaled(1.0 / 16.0);
  const SeriesCertificate lower = certify_series(minorant, from);
  out.minorant_from = from;
  if (lower.verdict == SeriesVerdict::Diverges) {
    out.verdict = Membership::Out;
    out.series = lower;
    out.reason = "minorant " + lower.reason + " from n = " + std::to_string(from);
    long double acc = 0.0L;
    long next = 10;
    for (long n = 1; n <= 160; ++n) {
      const LogValue fv = evaluate(xi, v, n);
      acc += std::norm(fv.mant) * std::exp(mu.log_weight(n) + 2.0 * fv.log_scale);
      if (n == next) {
        out.growth.emplace_back(n, static_cast<double>(acc));
        next *= 2;
      }
    }
    return out;
  }
  out.reason = "majorant diverges and minorant converges: " + upper.reason + "; " + lower.reason;
  return out;
}

bool in_second_moment_domain(const DiscreteProbabilitySpace& mu, const RandomVariable& xi, const Functional& f) {
  const SecondMomentCertificate c = second_moment(mu, xi, f);
  require(c.verdict != Membership::Uncertified, ErrorCode::Uncertified, "second moment: " + c.reason);
  return c.verdict == Membership::In;
}

// ---- covariance form and operator ----

namespace {

void require_in_domain(const DiscreteProbabilitySpace& mu, const RandomVariable& xi, const Functional& f,
                       const std::string& what) {
  const SecondMomentCertificate c = second_moment(mu, xi, f);
  require(c.verdict != Membership::Uncertified, ErrorCode::Uncertified, what + ": " + c.reason);
  require(c.verdict == Membership::In, ErrorCode::OutOfDomain, what + " lies outside D: " + c.reason);
}

}  // namespace

SesquilinearForm covariance_form(const DiscreteProbabilitySpace& mu, const RandomVariable& xi,
                                 const std::vector<Functional>& basis, bool centered) {
  require(!basis.empty(), ErrorCode::InvalidArgument, "empty functional basis");
  const Index d = static_cast<Index>(basis.size());
  Index ambient = 0;
  for (const Functional& f : basis) {
    if (xi.kind() == RandomVariable::Kind::Table) {
      require(f.backend() == Backend::Dense && f.size() == xi.dimension(), ErrorCode::BackendMismatch,
              "table variables need dense functionals of matching length");
    } else {
      require(f.backend() == Backend::Sequence, ErrorCode::BackendMismatch, "sequence functionals expected");
    }
    ambient = std::max(ambient, f.size());
  }
  CMatrix z = CMatrix::Zero(ambient, d);
  std::vector<FunctionalView> views;
  std::vector<cplx> means(static_cast<std::size_t>(d), 0.0);
  for (Index j = 0; j < d; ++j) {
    require_in_domain(mu, xi, basis[j], "basis functional " + std::to_string(j));
    z.col(j).head(basis[j].size()) = basis[j].coords();
    views.push_back(classify(basis[j]));
    if (centered) means[j] = expect_views(mu, xi, views[j], nullptr, 1e-13).value;
  }
  CMatrix g(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = i; j < d; ++j) {
      cplx v = expect_views(mu, xi, views[i], &views[j], 1e-13).value;
      if (centered) v -= means[i] * std::conj(means[j]);
      if (i == j) v = cplx(v.real(), 0.0);
      g(i, j) = v;
      g(j, i) = std::conj(v);
    }
  SesquilinearForm t = SesquilinearForm::dense(z, g, true);
  require(t.min_gram_eigenvalue() >= -1e-12 * std::max(1.0, g.norm()), ErrorCode::Indefinite,
          "covariance gram is not positive semidefinite");
  return t;
}

ClosednessWitness covariance_closedness(const DiscreteProbabilitySpace& mu, const RandomVariable& xi,
                                        const std::vector<Functional>& limits) {
  ClosednessWitness w;
  w.kind = ClosednessKind::Sequential;
  w.note = mu.is_finite() ? "finite probability space: D = X* and t is a finite sum of rank-one forms"
                          : "truncations f_K of each limit, tails E|(f - f_K)(xi)|^2";
  for (std::size_t i = 0; i < limits.size(); ++i) {
    const Functional& f = limits[i];
    const SecondMomentCertificate c = second_moment(mu, xi, f);
    require(c.verdict != Membership::Uncertified, ErrorCode::Uncertified, "closedness run: " + c.reason);
    require(c.verdict == Membership::In, ErrorCode::NotClosed,
            "run " + std::to_string(i) + ": limit functional outside D (" + c.reason + ")");
    ClosednessRun run;
    run.limit = as_vector(f);
    const FunctionalView full = classify(f);
    run.limit_energy = expect_views(mu, xi, full, &full, 1e-13).value.real();
    const double target = 1e-10 * std::max(run.limit_energy, 1e-300);
    for (long K = 1; K <= 4096; K *= 2) {
      const FunctionalView rest = classify(f, K + 1);
      const double tail = is_zero(rest) ? 0.0 : expect_views(mu, xi, rest, &rest, 1e-6).value.real();
      if (!run.tails.empty())
        require(tail <= run.tails.back() * (1.0 + 1e-9) + 1e-300, ErrorCode::NotClosed,
                "run " + std::to_string(i) + ": tails do not decrease");
      run.truncations.push_back(K);
      run.tails.push_back(tail);
      if (tail <= target) break;
    }
    require(run.tails.back() <= target, ErrorCode::NotClosed,
            "run " + std::to_string(i) + ": tails did not reach 1e-10 of the limit energy");
    w.runs.push_back(std::move(run));
  }
  return w;
}

RepresentationResult covariance_operator(const DiscreteProbabilitySpace& mu, const RandomVariable& xi,
                                         const std::vector<Functional>& basis, const DualityPair& pair,
                                         bool centered) {
  const SesquilinearForm t = covariance_form(mu, xi, basis, centered);
  // Functionals are handled on their retained coordinates; the lower bound is
  // taken in the dual norm ||f||_q.
  const DualityPair dual = DualityPair::dense(t.ambient_dimension(), pair.q());
  const LowerBoundCertificate lb = lower_bound(t, dual);
  require(lb.gamma > 1e-12 * std::max(1.0, t.gram().norm()), ErrorCode::NoLowerBound,
          "covariance form has lower bound 0 on the basis span; the Hilbert-space fallback at gamma = 0 is out of "
          "scope");
  RepresentationResult r = associated_operator(t, dual);
  r.A = r.A.with_mapping(Mapping::DualToPrimal);
  r.B = r.B.with_mapping(Mapping::PrimalToDual);
  return r;
}

// ---- independent sums ----

std::pair<DiscreteProbabilitySpace, RandomVariable> independent_product(const DiscreteProbabilitySpace& mu,
                                                                        const RandomVariable& xi,
                                                                        const DiscreteProbabilitySpace& nu,
                                                                        const RandomVariable& eta) {
  require(mu.is_finite() && nu.is_finite(), ErrorCode::Unsupported, "product spaces need finite factors");
  require(xi.kind() == RandomVariable::Kind::Table && eta.kind() == RandomVariable::Kind::Table,
          ErrorCode::Unsupported, "product spaces need table variables");
  require(xi.dimension() == eta.dimension(), ErrorCode::InvalidArgument, "variables take values in different spaces");
  require(xi.values().cols() == mu.atoms() && eta.values().cols() == nu.atoms(), ErrorCode::InvalidArgument,
          "variable table and space sizes differ");
  const Index a = mu.atoms(), b = nu.atoms();
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(a * b));
  CMatrix v(xi.dimension(), a * b);
  double total = 0.0;
  for (Index i = 0; i < a; ++i)
    for (Index j = 0; j < b; ++j) {
      w.push_back(mu.weight(i + 1) * nu.weight(j + 1));
      total += w.back();
      v.col(i * b + j) = xi.values().col(i) + eta.values().col(j);
    }
  for (double& x : w) x /= total;  // removes rounding drift of the products
  return {DiscreteProbabilitySpace::finite(std::move(w)), RandomVariable::table(std::move(v))};
}

namespace {

std::vector<Functional> coordinate_functionals(Index d) {
  std::vector<Functional> out;
  for (Index k = 0; k < d; ++k) out.push_back(Functional::dense(CVector::Unit(d, k)));
  return out;
}

// Covariance operator X* -> X; at gamma = 0 the finite-dimensional Hilbert
// operator is taken directly from the gram.
DenseOperator covariance_or_direct(const DiscreteProbabilitySpace& mu, const RandomVariable& xi, bool* direct) {
  const std::vector<Functional> basis = coordinate_functionals(xi.dimension());
  try {
    *direct = false;
    return covariance_operator(mu, xi, basis, DualityPair::dense(xi.dimension())).A;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoLowerBound) throw;
  }
  *direct = true;
  const SesquilinearForm t = covariance_form(mu, xi, basis, true);
  return DenseOperator::from_matrix(t.gram().transpose(), Mapping::DualToPrimal);
}

}  // namespace

Report independent_sum(const DiscreteProbabilitySpace& mu, const RandomVariable& xi,
                       const DiscreteProbabilitySpace& nu, const RandomVariable& eta) {
  Report rep("Thm8");
  const auto [prod, sum] = independent_product(mu, xi, nu, eta);
  bool da = false, db = false, ds = false;
  const DenseOperator a = covariance_or_direct(mu, xi, &da);
  const DenseOperator b = covariance_or_direct(nu, eta, &db);
  const DenseOperator s = covariance_or_direct(prod, sum, &ds);

  FormSumOptions opts;
  opts.allow_zero_lower_bound = da;  // Hilbert case: dense finite-dimensional, p = 2
  const FormSumResult fs = form_sum(a.with_mapping(Mapping::PrimalToDual), b.with_mapping(Mapping::PrimalToDual), opts);
  const CMatrix ab = fs.AB.matrix();
  const CMatrix sm = s.matrix();
  const double scale = std::max(1.0, sm.norm());
  rep.check("cov(xi+eta) = A form-sum B", (ab - sm).norm() / scale, 1e-10);
  rep.check("cov(xi+eta) = cov(xi) + cov(eta)", (a.matrix() + b.matrix() - sm).norm() / scale, 1e-10);
  rep.data()["atoms"] = {mu.atoms(), nu.atoms(), prod.atoms()};
  rep.data()["dimension"] = xi.dimension();
  rep.data()["gamma_zero_direct"] = {da, db, ds};
  return rep;
}

Report independent_sum_diagonal(const SeqRule& var_xi, const SeqRule& var_eta, Index coords) {
  Report rep("Thm8");
  require(coords >= 1 && coords <= 7, ErrorCode::InvalidArgument, "brute force supports 1..7 coordinates");
  require(var_xi.certified_infimum() >= 0.0 && var_eta.certified_infimum() >= 0.0, ErrorCode::InvalidArgument,
          "variances must be non-negative");

  // xi = sum_k eps_k sigma_k e_k over all sign patterns.
  auto signs = [&](const SeqRule& var) {
    const Index atoms = Index(1) << coords;
    CMatrix v(coords, atoms);
    for (Index a = 0; a < atoms; ++a)
      for (Index k = 0; k < coords; ++k)
        v(k, a) = ((a >> k) & 1 ? -1.0 : 1.0) * std::sqrt(var(static_cast<long>(k + 1)).real());
    return std::make_pair(DiscreteProbabilitySpace::finite(std::vector<double>(atoms, 1.0 / atoms)),
                          RandomVariable::table(std::move(v)));
  };
  const auto [mu, xi] = signs(var_xi);
  const auto [nu, eta] = signs(var_eta);
  const auto [prod, sum] = independent_product(mu, xi, nu, eta);
  const std::vector<Functional> basis = coordinate_functionals(coords);
  const CMatrix g = covariance_form(prod, sum, basis, true).gram();

  const DenseOperator a = DenseOperator::diagonal(var_xi, coords, DomainRule::Maximal);
  const DenseOperator b = DenseOperator::diagonal(var_eta, coords, DomainRule::Maximal);
  FormSumOptions opts;
  opts.allow_zero_lower_bound = true;  // inf of the variances may be 0 (Hilbert case)
  const FormSumResult fs = form_sum(a, b, opts);
  const SeqRule& rab = fs.AB.diagonal()->coefficients;

  double brute = 0.0;
  CMatrix expected = CMatrix::Zero(coords, coords);
  for (Index k = 0; k < coords; ++k) expected(k, k) = rab(static_cast<long>(k + 1));
  brute = (g - expected).norm() / std::max(1.0, expected.norm());
  rep.check("brute-force covariance of xi+eta vs form-sum coefficients", brute, 1e-10);
  rep.require_true("form-sum rule equals var_xi + var_eta", rab.approx_equal(var_xi + var_eta, 1e-12));
  rep.data()["rule"] = rab.describe();
  rep.data()["coordinates"] = coords;
  return rep;
}

}  // namespace formcalc
