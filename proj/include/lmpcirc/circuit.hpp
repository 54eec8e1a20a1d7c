#pragma once

#include <lmpcirc/dcopf.hpp>
#include <lmpcirc/network.hpp>

#include <Eigen/Core>
#include <Eigen/LU>

#include <stdexcept>
#include <vector>

namespace lmpc {

class NoCongestion : public std::runtime_error {
 public:
  NoCongestion()
      : std::runtime_error(
            "no congested line: without congestion LMPs throughout the network are all equal, so the "
            "circuit has no source") {}
};

class CircuitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Resistor {
  Index from = 0;
  Index to = 0;
  double ohms = 1;
};

/// Ideal current source: draws `amps` out of `from` and delivers them into `to`.
struct CurrentSource {
  Index from = 0;
  Index to = 0;
  double amps = 0;
  Index resistor = 0;  // the resistor it sits in parallel with
};

/**
 * DC circuit equivalent of an OPF dual. Node i is bus i, node voltages are
 * LMPs measured from the ground node, and `offset` is the price at ground.
 * Every source is in parallel with exactly one resistor.
 */
class EquivalentCircuit {
 public:
  EquivalentCircuit(Index num_nodes, std::vector<Resistor> resistors, std::vector<CurrentSource> sources,
                    Index ground, double offset);

  Index num_nodes() const { return num_nodes_; }
  const std::vector<Resistor>& resistors() const { return resistors_; }
  const std::vector<CurrentSource>& sources() const { return sources_; }
  Index ground() const { return ground_; }
  double offset() const { return offset_; }
  /// True when the resistor graph has no cycle.
  bool radial() const { return static_cast<Index>(resistors_.size()) == num_nodes_ - 1; }

  Eigen::MatrixXd conductance() const;
  /// Net source current delivered into each node.
  Eigen::VectorXd injections() const;
  Eigen::VectorXd injections(size_t source) const;

 private:
  Index num_nodes_;
  std::vector<Resistor> resistors_;
  std::vector<CurrentSource> sources_;
  Index ground_;
  double offset_;
};

struct CircuitSolution {
  Eigen::VectorXd node_voltages;                     // ground at exactly 0
  Eigen::VectorXd branch_currents;                   // per resistor, from -> to
  std::vector<Eigen::VectorXd> per_source_voltages;  // filled by superpose()

  Eigen::VectorXd prices(double offset) const { return node_voltages.array() + offset; }
};

/// Voltage source in series with its line resistor; raises the potential of `to` over `from`.
struct VoltageSource {
  Index from = 0;
  Index to = 0;
  double volts = 0;
  double ohms = 1;
  Index resistor = 0;
};

struct VoltageSourceView {
  std::vector<VoltageSource> sources;
};

/**
 * Solves G v = s with the ground row and column removed, then pins v_ground = 0.
 * G must be a weighted Laplacian of a connected graph.
 */
template <typename Derived, typename RhsDerived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> nodal_voltages(
    const Eigen::MatrixBase<Derived>& conductance, const Eigen::MatrixBase<RhsDerived>& injections, Index ground) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Index n = conductance.rows();
  std::vector<Index> keep;
  for (Index i = 0; i < n; ++i)
    if (i != ground) keep.push_back(i);
  const Index r = n - 1;
  Matrix G(r, r), s(r, injections.cols());
  for (Index a = 0; a < r; ++a) {
    s.row(a) = injections.row(keep[static_cast<size_t>(a)]);
    for (Index b = 0; b < r; ++b) G(a, b) = conductance(keep[static_cast<size_t>(a)], keep[static_cast<size_t>(b)]);
  }
  Eigen::FullPivLU<Matrix> lu(G);
  if (!lu.isInvertible()) throw CircuitError("reduced conductance matrix is singular (circuit disconnected)");
  const Matrix reduced = lu.solve(s);
  Matrix v = Matrix::Zero(n, injections.cols());
  for (Index a = 0; a < r; ++a) v.row(keep[static_cast<size_t>(a)]) = reduced.row(a);
  return v;
}

/**
 * Builds the equivalent circuit of an optimal OPF: one 1/b resistor per line,
 * one current source of μ amps per line whose μ exceeds `binding_tol`, ground at
 * the cheapest marginal injector's bus and offset equal to its cost.
 * Throws NoCongestion or NoMarginalInjector.
 */
EquivalentCircuit build_circuit(const Network& net, const DcopfSolution& sol, double binding_tol = 1e-7);

CircuitSolution solve_circuit(const EquivalentCircuit& c);

/// Full solve plus one voltage vector per source acting alone (others open-circuited).
CircuitSolution superpose(const EquivalentCircuit& c);

VoltageSourceView to_voltage_sources(const EquivalentCircuit& c);

/// Inverse source transformation: voltage sources back to parallel current sources.
EquivalentCircuit to_current_sources(const EquivalentCircuit& c, const VoltageSourceView& view);

/**
 * Node voltages of the voltage-source form, solved by modified nodal analysis
 * with one internal node and one branch-current unknown per voltage source.
 * Returns voltages of the original nodes only.
 */
Eigen::VectorXd solve_voltage_source_form(const EquivalentCircuit& c, const VoltageSourceView& view);

/// residual_i = Σ_j (v_i - v_j)/R_ij - net source current into i.
Eigen::VectorXd kcl_residuals(const EquivalentCircuit& c, const CircuitSolution& s);

/// One node's KCL as "current in = current out", terms in resistor order then sources.
struct KclBalance {
  Index node = 0;
  std::vector<double> inflows;
  std::vector<double> outflows;
  double residual = 0;
};

std::vector<KclBalance> kcl_ledger(const EquivalentCircuit& c, const CircuitSolution& s, double zero_tol = 1e-9);

struct LoopSum {
  std::vector<Index> nodes;  // closed walk, first node not repeated at the end
  double sum = 0;            // Σ (λ_i - λ_next) around the walk
};

/// Fundamental cycle basis from a BFS spanning tree visiting lowest ids first.
std::vector<LoopSum> kvl_loop_sums(Index num_nodes, const std::vector<std::pair<Index, Index>>& edges,
                                   const Eigen::VectorXd& prices);
std::vector<LoopSum> kvl_loop_sums(const Network& net, const Eigen::VectorXd& prices);

/// Σ (λ_i - λ_next) along an explicit closed walk.
double loop_sum(const std::vector<Index>& walk, const Eigen::VectorXd& prices);

}  // namespace lmpc
