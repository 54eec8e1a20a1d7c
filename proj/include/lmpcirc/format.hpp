#pragma once

#include <lmpcirc/circuit.hpp>

#include <string>
#include <vector>

namespace lmpc {

/// Rounds to `digits` significant digits (ties to even), flushing |x| < 1e-9 and -0 to 0.
double round_significant(double x, int digits = 9);

/// Shortest decimal text of round_significant(x).
std::string format_number(double x, int digits = 9);

/// Buses are numbered from 1 in human-readable reports.
inline std::string bus_label(Index id) { return std::to_string(id + 1); }

/// "node 1: 112.5 = 45 + 22.5 + 45 ✓"
std::string format_kcl(const KclBalance& b, double tol);

/// "(45-22.5) + (22.5-0) + (0-45) = 0 ✓"
std::string format_loop(const std::vector<Index>& walk, const Eigen::VectorXd& prices, double tol);

}  // namespace lmpc
