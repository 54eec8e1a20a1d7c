#pragma once

#include <lmpcirc/circuit.hpp>

#include <optional>
#include <vector>

namespace lmpc {

struct NegativePriceReport {
  bool negative = false;             // some λ = v + offset < -tol
  std::vector<Index> witnesses;      // buses with negative price
  std::vector<double> witness_prices;
  double min_price = 0;
  Index min_node = 0;
  // Ground-based form: negative voltages exist iff ground is not the lowest node.
  bool ground_is_minimum = true;
  bool negative_voltages = false;
};

/// Flags negative prices from the solved circuit. Both verdicts coincide when offset is 0.
NegativePriceReport predict_negative_prices(const EquivalentCircuit& c, const CircuitSolution& s,
                                            double tol = 1e-7);

struct TopologyLine {
  Index from = 0;
  Index to = 0;
  double susceptance = 1;
};

/// A congestion price across one line: μ amps delivered into `to`.
struct KnownSource {
  Index from = 0;
  Index to = 0;
  double mu = 0;
};

/// What is needed to rebuild price differences without solving the OPF.
struct LimitedInfo {
  std::vector<TopologyLine> lines;
  std::vector<KnownSource> sources;
  std::optional<Index> ground;
  std::optional<double> offset;

  Index num_buses() const;
};

struct RecoveredPrices {
  std::optional<Eigen::VectorXd> lmp;  // only with both ground and offset known
  Eigen::MatrixXd differences;         // (i, j) = λ_i - λ_j
};

/// Throws CircuitError on disconnected topology or sources off the topology.
RecoveredPrices recover_lmps(const LimitedInfo& info);

struct SourceImpact {
  Index source = 0;
  Eigen::VectorXd contribution;
  double min = 0;
  double max = 0;
  std::vector<Index> negative_nodes;
};

struct CongestionImpact {
  std::vector<SourceImpact> sources;
  Eigen::VectorXd total;
};

CongestionImpact congestion_impact(const EquivalentCircuit& c, double tol = 1e-7);

}  // namespace lmpc
