#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <string_view>

#include "wme/targets.hpp"

namespace wme {

/// Payoff of predicting column j when row i happened.
using UtilityMatrix = Eigen::Matrix<int, kClassCount, kClassCount>;

/// Trade-on-extremes payoff: only columns 0 (short) and 4 (long) pay.
inline UtilityMatrix default_utility_matrix() {
  UtilityMatrix u;
  u << 2, 0, 0, 0, -2,
       1, 0, 0, 0, -1,
       0, 0, 0, 0, 0,
      -1, 0, 0, 0, 1,
      -2, 0, 0, 0, 2;
  return u;
}

inline int utility_of(const UtilityMatrix& u, ClassLabel actual, ClassLabel predicted) {
  return u(actual.value(), predicted.value());
}

/// Five lines of five whitespace-separated integers.
UtilityMatrix parse_utility_matrix(std::string_view text);
UtilityMatrix load_utility_matrix(const std::filesystem::path& path);
std::string format_utility_matrix(const UtilityMatrix& u);

}  // namespace wme
