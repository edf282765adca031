#pragma once

#include <string>
#include <utility>
#include <vector>

namespace powerbound {

/// Outcome of a single numerical check: a pass flag, the worst residual seen,
/// the tolerance it was compared against, and named values for reporting.
struct CheckReport {
  std::string name;
  bool pass = true;
  double residual = 0.0;
  double tolerance = 0.0;
  std::string detail;
  std::vector<std::pair<std::string, double>> values;

  void record(std::string key, double value) {
    values.emplace_back(std::move(key), value);
  }
};

}  // namespace powerbound
