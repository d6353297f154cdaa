#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace formcalc {

enum class Verdict { Pass, Fail, Uncertified };

const char* to_string(Verdict v);

struct Check {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Machine-readable verification record. The verdict is pass exactly when
/// every check is within tolerance and nothing was left uncertified.
class Report {
 public:
  Report() = default;
  explicit Report(std::string claim) { claims_.push_back(std::move(claim)); }

  void add_claim(const std::string& tag);
  bool check(const std::string& name, double residual, double tolerance);
  void require_true(const std::string& name, bool ok);
  void mark_uncertified(const std::string& reason);
  void merge(const Report& other);

  Verdict verdict() const;
  bool passed() const { return verdict() == Verdict::Pass; }
  double max_residual() const;

  const std::vector<std::string>& claims() const { return claims_; }
  const std::vector<Check>& checks() const { return checks_; }
  const std::vector<std::string>& uncertified_reasons() const { return uncertified_; }

  nlohmann::json& data() { return data_; }
  const nlohmann::json& data() const { return data_; }

  nlohmann::json to_json() const;

 private:
  std::vector<std::string> claims_;
  std::vector<Check> checks_;
  std::vector<std::string> uncertified_;
  nlohmann::json data_ = nlohmann::json::object();
};

}  // namespace formcalc
