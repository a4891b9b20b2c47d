#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pdemand {

struct LetAssertVerdict {
  std::string binder;
  std::string node;
  std::string verdict;
  std::string detail;
};

/// Summary of one CLI command, rendered with `--json`.
struct RunReport {
  std::string path;
  std::string mode;
  std::string result;
  /// Machine form of the result when there is one (analysis JSON), else empty.
  std::string result_json;
  double parse_ms = 0;
  double eval_ms = 0;
  double analyze_ms = 0;
  double solve_ms = 0;
  std::map<std::string, std::uint64_t> counters;
  std::vector<LetAssertVerdict> verdicts;
  std::string error;
  int exit_code = 0;
};

std::string to_json(const RunReport& r, int indent = 2);

}  // namespace pdemand
