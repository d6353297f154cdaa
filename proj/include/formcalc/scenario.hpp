#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "formcalc/report.hpp"

namespace formcalc::scenario {

using json = nlohmann::json;

inline constexpr const char* kScenarioSchema = "formcalc-scenarios/1";
inline constexpr const char* kReportSchema = "formcalc-report/1";

struct Scenario {
  std::string id;
  std::string op;
  json operands = json::object();
  std::uint64_t seed = 1;
  double tolerance_scale = 1.0;  // multiplies every tolerance of the operation
  Verdict expect = Verdict::Pass;
};

struct Result {
  Scenario scenario;
  Report report;
  std::string error;  // library error that decided the verdict, if any
  double wall_time = 0.0;
  std::map<std::string, std::string> tables;  // name -> CSV text

  Verdict verdict() const { return report.verdict(); }
  bool matched() const { return verdict() == scenario.expect; }
  json to_json(bool timing) const;
};

/// Names of the registered operations, sorted.
std::vector<std::string> operations();

/// Claim tags an operation reports.
std::vector<std::string> claims_of(const std::string& op);

/// Reads a scenario document; throws io::SchemaError on a malformed file,
/// duplicate ids or an unknown operation.
std::vector<Scenario> parse(const json& doc);
json to_json(const std::vector<Scenario>& scenarios);

/// Executes one scenario. Library errors become a failing (or, for
/// Uncertified, an uncertified) report; io::SchemaError propagates.
Result run(const Scenario& s);

/// Runs scenarios on `jobs` threads; results are ordered by id.
std::vector<Result> run_all(const std::vector<Scenario>& scenarios, int jobs = 1);

/// 0 when everything passes, else 2 on any failure, else 3.
int exit_code(const std::vector<Result>& results);
/// The same taxonomy applied to scenarios whose verdict differs from `expect`.
int suite_exit_code(const std::vector<Result>& results);

/// Summary with per-scenario verdicts, counts, and the coverage map of claim
/// tags to passing scenario ids. Wall times only when `timing` is set.
json summary(const std::vector<Result>& results, const json& header, bool timing);

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"representation", "friedrichs", "ordering", "formsum",
                                              "covariance",     "elliptic",   "all"};
  return names;
}

/// The scenario battery of a suite, generated deterministically from the
/// seed. Each suite holds at least one scenario expected to fail. Throws
/// io::SchemaError for an unknown suite name.
std::vector<Scenario> suite(const std::string& name, std::uint64_t seed);

}  // namespace formcalc::scenario
