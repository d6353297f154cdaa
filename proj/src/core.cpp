#include <cmath>
#include <cstdlib>

#include "formcalc/errors.hpp"
#include "formcalc/report.hpp"
#include "formcalc/tolerances.hpp"

namespace formcalc {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::BackendMismatch: return "backend-mismatch";
    case ErrorCode::Uncertified: return "uncertified";
    case ErrorCode::NotDense: return "not-dense";
    case ErrorCode::NotSymmetric: return "not-symmetric";
    case ErrorCode::NotSelfAdjoint: return "not-self-adjoint";
    case ErrorCode::Indefinite: return "indefinite";
    case ErrorCode::NoLowerBound: return "no-lower-bound";
    case ErrorCode::Singular: return "singular";
    case ErrorCode::NotInjective: return "not-injective";
    case ErrorCode::OutOfDomain: return "out-of-domain";
    case ErrorCode::NotCommuting: return "not-commuting";
    case ErrorCode::NotEqual: return "not-equal";
    case ErrorCode::NotClosed: return "not-closed";
    case ErrorCode::Unsupported: return "unsupported";
  }
  return "unknown";
}

double Tolerances::scale() {
  static const double value = [] {
    const char* env = std::getenv("FORMCALC_TOL_SCALE");
    if (!env) return 1.0;
    char* end = nullptr;
    const double s = std::strtod(env, &end);
    return (end != env && std::isfinite(s) && s > 0.0) ? s : 1.0;
  }();
  return value;
}

const Tolerances& Tolerances::defaults() {
  static const Tolerances tol = [] {
    Tolerances t;
    const double s = scale();
    t.subspace *= s;
    t.action *= s;
    t.identity *= s;
    t.psd *= s;
    t.tail *= s;
    return t;
  }();
  return tol;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Uncertified: return "uncertified";
  }
  return "unknown";
}

void Report::add_claim(const std::string& tag) {
  for (const auto& c : claims_)
    if (c == tag) return;
  claims_.push_back(tag);
}

bool Report::check(const std::string& name, double residual, double tolerance) {
  const bool ok = std::isfinite(residual) && residual <= tolerance;
  checks_.push_back({name, residual, tolerance, ok});
  return ok;
}

void Report::require_true(const std::string& name, bool ok) {
  checks_.push_back({name, ok ? 0.0 : 1.0, 0.0, ok});
}

void Report::mark_uncertified(const std::string& reason) { uncertified_.push_back(reason); }

void Report::merge(const Report& other) {
  for (const auto& c : other.claims_) add_claim(c);
  checks_.insert(checks_.end(), other.checks_.begin(), other.checks_.end());
  uncertified_.insert(uncertified_.end(), other.uncertified_.begin(), other.uncertified_.end());
}

Verdict Report::verdict() const {
  for (const auto& c : checks_)
    if (!c.passed) return Verdict::Fail;
  if (!uncertified_.empty()) return Verdict::Uncertified;
  return Verdict::Pass;
}

double Report::max_residual() const {
  double worst = 0.0;
  for (const auto& c : checks_) worst = std::max(worst, c.residual);
  return worst;
}

nlohmann::json Report::to_json() const {
  nlohmann::json j;
  j["claims"] = claims_;
  j["verdict"] = to_string(verdict());
  auto& checks = j["checks"] = nlohmann::json::array();
  for (const auto& c : checks_) {
    nlohmann::json entry{{"name", c.name}, {"tolerance", c.tolerance}, {"passed", c.passed}};
    if (std::isfinite(c.residual))
      entry["residual"] = c.residual;
    else
      entry["residual"] = c.residual > 0 ? "inf" : "nan";
    checks.push_back(std::move(entry));
  }
  if (!uncertified_.empty()) j["uncertified"] = uncertified_;
  if (!data_.empty()) j["data"] = data_;
  return j;
}

}  // namespace formcalc
