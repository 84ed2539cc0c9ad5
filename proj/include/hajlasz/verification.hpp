#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace hajlasz {

/// Outcome of checking one inequality (or a family of them) on computed data.
struct VerificationReport {
  std::string check;
  bool passed = true;
  double worst_ratio = 0.0;  ///< largest observed lhs/rhs
  std::vector<std::string> violations;
  std::map<std::string, double> constants;  ///< empirical constants and the quantities behind them
  std::vector<std::size_t> excluded;        ///< cells left out of an "almost everywhere" statement

  void fail(std::string what) {
    passed = false;
    violations.push_back(std::move(what));
  }

  void record_ratio(double r) { worst_ratio = std::max(worst_ratio, r); }
};

}  // namespace hajlasz
