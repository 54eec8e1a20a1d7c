#pragma once

#include <lmpcirc/lp.hpp>

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace lmpc {

/// Thrown when network data violates a structural invariant.
class NetworkError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Bus {
  Index id = 0;
  double demand = 0;  // fixed (uncontrollable) load, MW
};

struct Line {
  Index from = 0;
  Index to = 0;
  double susceptance = 1;             // per unit on a 1 MVA base
  std::optional<double> flow_limit;   // MW; absent means unconstrained
};

enum class InjectorKind { Generator, Load };

/// A generator or a price-responsive load. For loads `cost` is the bid and
/// p_min/p_max bound the consumption.
struct Injector {
  Index bus = 0;
  InjectorKind kind = InjectorKind::Generator;
  double cost = 0;
  double p_min = 0;
  double p_max = 0;

  bool is_load() const { return kind == InjectorKind::Load; }
};

/**
 * Immutable transmission network. The constructor validates every structural
 * invariant (contiguous bus ids, no parallel lines, positive susceptances, at
 * most one generator and one load per bus, connectivity) and throws
 * NetworkError otherwise. Buses are stored sorted by id.
 */
class Network {
 public:
  Network(std::vector<Bus> buses, std::vector<Line> lines, std::vector<Injector> injectors);

  Index num_buses() const { return static_cast<Index>(buses_.size()); }
  Index num_lines() const { return static_cast<Index>(lines_.size()); }
  Index num_injectors() const { return static_cast<Index>(injectors_.size()); }

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Line>& lines() const { return lines_; }
  const std::vector<Injector>& injectors() const { return injectors_; }

  /// Indices of lines carrying a flow limit, in line order.
  const std::vector<Index>& limited_lines() const { return limited_; }

  Eigen::VectorXd demands() const;
  double total_demand() const;

 private:
  std::vector<Bus> buses_;
  std::vector<Line> lines_;
  std::vector<Injector> injectors_;
  std::vector<Index> limited_;
};

/// True when the undirected graph on `n` nodes with the given edges is connected.
bool is_connected(Index n, const std::vector<std::pair<Index, Index>>& edges);

/// DC bus admittance matrix: off-diagonal -b_ij, diagonal sum of incident b_ij.
Eigen::MatrixXd build_b_matrix(const Network& net);

/**
 * The OPF in the generic form
 *
 *   min cᵀp  s.t.  A p + B θ = a,  C p >= b,  D θ >= d.
 *
 * Columns of A follow injector order (+1 generator, -1 load). C has two rows
 * per injector, [lower, upper]. D has two rows per limited line, in
 * angle-difference form so its entries are 0 and ±1:
 *
 *   θ_from - θ_to >= -f/b   (binding when power flows from -> to)
 *   θ_to - θ_from >= -f/b   (binding when power flows to -> from)
 *
 * Under this sign convention the MW flow on a line is b (θ_to - θ_from).
 */
struct DcopfLp {
  Eigen::MatrixXd A, B, C, D;
  Eigen::VectorXd a, b, c, d;
};

DcopfLp assemble_lp(const Network& net);

/// MW flow on each line, from -> to, for the given angles.
Eigen::VectorXd line_flows(const Network& net, const Eigen::VectorXd& theta);

/**
 * Seeded random meshed test network. A random spanning tree is laid first and
 * every other bus pair is added with probability `edge_prob`; a chord is forced
 * if no cycle results. Every bus with demand hosts a generator able to cover it
 * on its own, so the OPF is always feasible. Identical for identical arguments
 * on every platform.
 */
Network generate_random_network(std::uint64_t seed, Index n, double edge_prob);

}  // namespace lmpc
