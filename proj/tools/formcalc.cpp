#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "formcalc/scenario.hpp"
#include "formcalc/serialize.hpp"

namespace fs = std::filesystem;
using namespace formcalc;
using nlohmann::json;

namespace {

constexpr int kSchemaExit = 4;

struct Output {
  fs::path dir = "formcalc-out";
  int jobs = 1;
  bool timing = false;
  bool quiet = false;
};

std::string file_stem(const std::string& id) {
  std::string s = id;
  for (char& c : s)
    if (c == '/' || c == '\\' || c == ' ') c = '_';
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

int finish(const std::vector<scenario::Result>& results, json header, int code, const Output& out) {
  for (const auto& r : results) {
    const std::string stem = file_stem(r.scenario.id);
    write_text(out.dir / "reports" / (stem + ".json"), r.to_json(out.timing).dump(2) + "\n");
    for (const auto& [name, csv] : r.tables) write_text(out.dir / "tables" / (stem + "." + name + ".csv"), csv);
    if (!out.quiet) {
      std::cout << to_string(r.verdict());
      if (!r.matched()) std::cout << " (expected " << to_string(r.scenario.expect) << ")";
      std::cout << "  " << r.scenario.id << '\n';
    }
  }
  json s = scenario::summary(results, header, out.timing);
  s["exit_code"] = code;
  write_text(out.dir / "summary.json", s.dump(2) + "\n");
  const auto& counts = s["counts"];
  std::cout << results.size() << " scenarios: " << counts["pass"] << " pass, " << counts["fail"] << " fail, "
            << counts["uncertified"] << " uncertified; summary in " << (out.dir / "summary.json").string() << '\n';
  return code;
}

int run_file(const std::string& file, const Output& out) {
  std::ifstream is(file);
  if (!is) {
    std::cerr << "formcalc: cannot open " << file << '\n';
    return kSchemaExit;
  }
  std::vector<scenario::Result> results;
  try {
    const json doc = json::parse(is);
    results = scenario::run_all(scenario::parse(doc), out.jobs);
  } catch (const json::exception& e) {
    std::cerr << "formcalc: " << file << ": " << e.what() << '\n';
    return kSchemaExit;
  } catch (const io::SchemaError& e) {
    std::cerr << "formcalc: " << file << ": " << e.what() << '\n';
    return kSchemaExit;
  }
  const json header{{"command", "run"}, {"source", fs::path(file).filename().string()}};
  return finish(results, header, scenario::exit_code(results), out);
}

int run_suite(const std::string& name, std::uint64_t seed, const std::string& emit, const Output& out) {
  std::vector<scenario::Scenario> scenarios;
  try {
    scenarios = scenario::suite(name, seed);
  } catch (const io::SchemaError& e) {
    std::cerr << "formcalc: " << e.what() << '\n';
    return kSchemaExit;
  }
  if (!emit.empty()) write_text(emit, scenario::to_json(scenarios).dump(2) + "\n");
  const auto results = scenario::run_all(scenarios, out.jobs);
  const json header{{"command", "suite"}, {"suite", name}, {"seed", seed}};
  return finish(results, header, scenario::suite_exit_code(results), out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"formcalc: verification of positive forms, operators and form sums"};
  app.require_subcommand(1);
  Output out;
  std::string out_dir = out.dir.string();

  auto* run = app.add_subcommand("run", "Execute a scenario file");
  std::string file;
  run->add_option("file", file, "Scenario JSON")->required();

  auto* suite = app.add_subcommand("suite", "Run a generated verification suite");
  std::string name;
  std::uint64_t seed = 1;
  std::string emit;
  suite->add_option("name", name, "representation | friedrichs | ordering | formsum | covariance | elliptic | all")
      ->required();
  suite->add_option("--seed", seed, "Generator seed");
  suite->add_option("--emit", emit, "Also write the generated scenarios to this file");

  for (auto* sub : {run, suite}) {
    sub->add_option("--jobs,-j", out.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out,-o", out_dir, "Output directory");
    sub->add_flag("--timing", out.timing, "Record wall times in the reports");
    sub->add_flag("--quiet,-q", out.quiet, "Only print the totals");
  }

  CLI11_PARSE(app, argc, argv);
  out.dir = out_dir;
  try {
    if (run->parsed()) return run_file(file, out);
    return run_suite(name, seed, emit, out);
  } catch (const std::exception& e) {
    std::cerr << "formcalc: " << e.what() << '\n';
    return 1;
  }
}
