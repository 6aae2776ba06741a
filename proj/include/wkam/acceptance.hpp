#pragma once

#include "wkam/config.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace wkam {

struct Check {
  std::string name;
  double value = 0.0;
  std::string relation;  // "<=", ">=" or "=="
  double bound = 0.0;
  bool pass = false;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::vector<Check> checks;
  double seconds = 0.0;
  Json details = Json::object();
  std::string error;  // exception text when the run aborted

  void check(std::string name, double value, const std::string& relation, double bound);
};

struct AcceptanceOptions {
  std::uint64_t seed = 12345;
};

// Seed from TOOLKIT_SEED, else the default.
std::uint64_t default_seed();

inline constexpr int kCriterionCount = 11;

// Runs one criterion; never throws, failures land in the result.
CriterionResult run_criterion(int id, const AcceptanceOptions& opts = {});
const char* criterion_title(int id);

// Criteria exercised by `verify --theorem`; throws ConfigError for unknown keys.
std::vector<int> criteria_for_theorem(const std::string& theorem);
std::vector<std::string> theorem_keys();

Json to_json(const CriterionResult& r);
// One line: "[PASS] 3 title (1.2 s)".
std::string summary_line(const CriterionResult& r);

}  // namespace wkam
