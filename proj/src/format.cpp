#include <lmpcirc/format.hpp>

#include <cfenv>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace lmpc {

double round_significant(double x, int digits) {
  if (!std::isfinite(x)) return x;
  if (std::abs(x) < 1e-9) return 0.0;
  // printf rounds the exact binary value in the current mode (nearest-even).
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits - 1, x);
  std::fesetround(saved);
  return std::strtod(buf, nullptr);
}

std::string format_number(double x, int digits) {
  const double r = round_significant(x, digits);
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, r);
  return std::string(buf, res.ptr);
}

namespace {

std::string join(const std::vector<double>& terms) {
  if (terms.empty()) return "0";
  std::string out;
  for (size_t k = 0; k < terms.size(); ++k) {
    if (k > 0) out += " + ";
    out += format_number(terms[k]);
  }
  return out;
}

}  // namespace

std::string format_kcl(const KclBalance& b, double tol) {
  return "node " + bus_label(b.node) + ": " + join(b.inflows) + " = " + join(b.outflows) +
         (std::abs(b.residual) <= tol ? " ✓" : " ✗");
}

std::string format_loop(const std::vector<Index>& walk, const Eigen::VectorXd& prices, double tol) {
  std::ostringstream os;
  for (size_t k = 0; k < walk.size(); ++k) {
    if (k > 0) os << " + ";
    os << '(' << format_number(prices(walk[k])) << '-' << format_number(prices(walk[(k + 1) % walk.size()])) << ')';
  }
  const double sum = loop_sum(walk, prices);
  os << " = " << format_number(sum) << (std::abs(sum) <= tol ? " ✓" : " ✗");
  return os.str();
}

}  // namespace lmpc
