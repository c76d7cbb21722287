#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace sturm::cli {

struct RunConfig {
  std::string command = "eigen";  // eigen | asym | sweep | dump-regularizer | check-conditions
  double C = 0.0;
  double K = 1.0;
  double a = -1.0;
  double b = 1.0;
  double alpha = 0.0;
  double beta = 0.0;
  int nMin = 0;
  int nMax = 0;
  int orderN = 1;
  double tol = 1e-10;
  std::string method = "shooting";      // shooting | oracle | closed-form
  std::string target = "case";          // case | angles
  std::string regularizer = "singular"; // singular | chain
  int chainDepth = 0;                   // 0 = least depth keeping F integrable
  std::string format = "csv";           // csv | json
  std::string out;
  double ladderStart = 100.0;
  double ladderFactor = 10.0;
  int ladderCount = 5;

  /// Throws ValidationError on any inconsistent field.
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);

/// Column names plus rows of numbers or strings, in emission order.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;
  nlohmann::json extra;  // additional top-level JSON members (null when unused)
};

Table execute(const RunConfig& cfg);

/// CSV with a header row and %.17g numbers, or {"config": ..., "rows": [...]}.
std::string render(const RunConfig& cfg, const Table& table);

/// Worker count for row-parallel commands: STURM_ASYM_THREADS, 0 or unset meaning hardware concurrency.
unsigned worker_count();

/// Parses argv, runs the command and writes the result. Returns the process exit status:
/// 0 success, 2 validation, 3 budget exceeded, 4 internal inconsistency.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sturm::cli
