#pragma once

#include <lmpcirc/lp.hpp>
#include <lmpcirc/network.hpp>

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace lmpc {

/// Congestion price of one limited line.
struct LineCongestion {
  Index line = 0;
  // Oriented along the constrained power flow when binding, else as stored.
  Index from = 0;
  Index to = 0;
  double value = 0;      // angle-basis multiplier, the circuit current-source amps
  double mw_basis = 0;   // value / susceptance, the $/MWh shadow price of the MW limit
};

struct DcopfSolution {
  Eigen::VectorXd p;        // MW per injector (consumption for loads)
  Eigen::VectorXd theta;    // rad per bus, reference bus at 0
  double objective = 0;     // $/h
  Eigen::VectorXd lmp;      // $/MWh per bus
  Eigen::VectorXd mu;       // per D row, two rows per limited line
  Eigen::VectorXd gamma;    // per C row, [lower, upper] per injector
  std::vector<LineCongestion> congestion;  // one entry per limited line
  std::vector<Index> marginal;             // injector indices strictly inside their limits
  bool degenerate = false;
  Index reference_bus = 0;
};

struct OpfOptions {
  Index reference_bus = 0;
  double marginal_tol = 1e-6;  // MW distance from both limits
};

/// Why an OPF has no feasible dispatch.
struct InfeasibilityDiagnostics {
  double total_demand = 0;        // fixed demand plus minimum controllable consumption
  double total_capacity = 0;      // sum of generator p_max
  double unserved = 0;            // MW that cannot be delivered under the limits
  std::vector<Index> short_buses; // buses left short in the least-infeasible dispatch
  std::vector<Index> cut_lines;   // limited lines saturated in that dispatch
  std::string summary() const;
};

class OpfInfeasible : public std::runtime_error {
 public:
  explicit OpfInfeasible(InfeasibilityDiagnostics d)
      : std::runtime_error("OPF infeasible: " + d.summary()), diagnostics(std::move(d)) {}
  InfeasibilityDiagnostics diagnostics;
};

class OpfUnbounded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoMarginalInjector : public std::runtime_error {
 public:
  NoMarginalInjector()
      : std::runtime_error("no marginal injector: every injector sits at a limit, ground is undefined") {}
};

DcopfSolution solve_opf(const Network& net, const OpfOptions& opt = {});

InfeasibilityDiagnostics diagnose_infeasibility(const Network& net);

struct ResidualBlock {
  std::string name;
  double norm = 0;
  bool pass = false;
};

/// Residuals of the six optimality blocks plus the duality gap.
struct CheckReport {
  std::array<ResidualBlock, 6> blocks;
  double duality_gap = 0;  // |cᵀp - (aᵀλ + bᵀγ + dᵀμ)|
  bool gap_pass = false;
  double tolerance = 0;

  bool all_pass() const;
};

/// Throws std::invalid_argument when `sol` does not match the shape of `net`.
CheckReport verify_optimality(const Network& net, const DcopfSolution& sol, double tol = 1e-7);

struct MarginalUnit {
  Index injector = 0;
  Index bus = 0;
  double cost = 0;
};

/// Cheapest marginal injector; ties go to the lowest bus id.
MarginalUnit cheapest_marginal(const DcopfSolution& sol, const Network& net);

}  // namespace lmpc
