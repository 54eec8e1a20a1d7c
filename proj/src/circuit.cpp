#include <lmpcirc/circuit.hpp>

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <string>

namespace lmpc {

EquivalentCircuit::EquivalentCircuit(Index num_nodes, std::vector<Resistor> resistors,
                                     std::vector<CurrentSource> sources, Index ground, double offset)
    : num_nodes_(num_nodes),
      resistors_(std::move(resistors)),
      sources_(std::move(sources)),
      ground_(ground),
      offset_(offset) {
  if (num_nodes_ < 2) throw CircuitError("circuit needs at least two nodes");
  if (ground_ < 0 || ground_ >= num_nodes_) throw CircuitError("ground is not a valid node");
  if (!std::isfinite(offset_)) throw CircuitError("offset must be finite");
  std::vector<std::pair<Index, Index>> edges;
  for (const Resistor& r : resistors_) {
    if (r.from < 0 || r.from >= num_nodes_ || r.to < 0 || r.to >= num_nodes_ || r.from == r.to)
      throw CircuitError("resistor endpoints invalid");
    if (!(r.ohms > 0) || !std::isfinite(r.ohms)) throw CircuitError("resistance must be positive");
    edges.emplace_back(r.from, r.to);
  }
  if (!is_connected(num_nodes_, edges)) throw CircuitError("circuit is not connected");
  if (sources_.empty()) throw NoCongestion();
  std::set<Index> used;
  for (const CurrentSource& s : sources_) {
    if (s.resistor < 0 || s.resistor >= static_cast<Index>(resistors_.size()))
      throw CircuitError("source refers to a missing resistor");
    const Resistor& r = resistors_[static_cast<size_t>(s.resistor)];
    if (std::minmax(s.from, s.to) != std::minmax(r.from, r.to))
      throw CircuitError("source is not in parallel with its resistor");
    if (!used.insert(s.resistor).second) throw CircuitError("two sources across one resistor");
    if (!(s.amps > 0) || !std::isfinite(s.amps)) throw CircuitError("source magnitude must be positive");
  }
}

Eigen::MatrixXd EquivalentCircuit::conductance() const {
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(num_nodes_, num_nodes_);
  for (const Resistor& r : resistors_) {
    const double g = 1.0 / r.ohms;
    G(r.from, r.from) += g;
    G(r.to, r.to) += g;
    G(r.from, r.to) -= g;
    G(r.to, r.from) -= g;
  }
  return G;
}

Eigen::VectorXd EquivalentCircuit::injections(size_t source) const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(num_nodes_);
  const CurrentSource& src = sources_.at(source);
  s(src.from) -= src.amps;
  s(src.to) += src.amps;
  return s;
}

Eigen::VectorXd EquivalentCircuit::injections() const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(num_nodes_);
  for (size_t k = 0; k < sources_.size(); ++k) s += injections(k);
  return s;
}

EquivalentCircuit build_circuit(const Network& net, const DcopfSolution& sol, double binding_tol) {
  std::vector<Resistor> resistors;
  for (const Line& l : net.lines()) resistors.push_back({l.from, l.to, 1.0 / l.susceptance});

  // Row 2r binds when power flows from -> to and then injects at `to`;
  // row 2r+1 is the mirror image.
  std::vector<CurrentSource> sources;
  const auto& limited = net.limited_lines();
  for (size_t r = 0; r < limited.size(); ++r) {
    const Index line = limited[r];
    const Line& l = net.lines()[static_cast<size_t>(line)];
    const double forward = sol.mu(2 * static_cast<Index>(r));
    const double backward = sol.mu(2 * static_cast<Index>(r) + 1);
    if (forward > binding_tol) sources.push_back({l.from, l.to, forward, line});
    if (backward > binding_tol) sources.push_back({l.to, l.from, backward, line});
  }
  if (sources.empty()) throw NoCongestion();
  const MarginalUnit ground = cheapest_marginal(sol, net);
  return EquivalentCircuit(net.num_buses(), std::move(resistors), std::move(sources), ground.bus, ground.cost);
}

namespace {

Eigen::VectorXd branch_currents(const EquivalentCircuit& c, const Eigen::VectorXd& v) {
  Eigen::VectorXd i(static_cast<Index>(c.resistors().size()));
  for (size_t k = 0; k < c.resistors().size(); ++k) {
    const Resistor& r = c.resistors()[k];
    i(static_cast<Index>(k)) = (v(r.from) - v(r.to)) / r.ohms;
  }
  return i;
}

}  // namespace

CircuitSolution solve_circuit(const EquivalentCircuit& c) {
  CircuitSolution s;
  s.node_voltages = nodal_voltages(c.conductance(), c.injections(), c.ground()).col(0);
  s.branch_currents = branch_currents(c, s.node_voltages);
  return s;
}

CircuitSolution superpose(const EquivalentCircuit& c) {
  const Index ns = static_cast<Index>(c.sources().size());
  Eigen::MatrixXd rhs(c.num_nodes(), ns);
  for (Index k = 0; k < ns; ++k) rhs.col(k) = c.injections(static_cast<size_t>(k));
  const Eigen::MatrixXd parts = nodal_voltages(c.conductance(), rhs, c.ground());

  CircuitSolution s = solve_circuit(c);
  for (Index k = 0; k < ns; ++k) s.per_source_voltages.push_back(parts.col(k));
  return s;
}

VoltageSourceView to_voltage_sources(const EquivalentCircuit& c) {
  VoltageSourceView view;
  for (const CurrentSource& s : c.sources()) {
    const double ohms = c.resistors()[static_cast<size_t>(s.resistor)].ohms;
    view.sources.push_back({s.from, s.to, s.amps * ohms, ohms, s.resistor});
  }
  return view;
}

EquivalentCircuit to_current_sources(const EquivalentCircuit& c, const VoltageSourceView& view) {
  std::vector<CurrentSource> sources;
  for (const VoltageSource& v : view.sources) sources.push_back({v.from, v.to, v.volts / v.ohms, v.resistor});
  return EquivalentCircuit(c.num_nodes(), c.resistors(), std::move(sources), c.ground(), c.offset());
}

Eigen::VectorXd solve_voltage_source_form(const EquivalentCircuit& c, const VoltageSourceView& view) {
  // Each voltage source splits its line: `to` --[E]-- internal --[R]-- `from`.
  const Index n = c.num_nodes();
  const Index nv = static_cast<Index>(view.sources.size());
  const Index nodes = n + nv;
  const Index size = nodes + nv;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(size, size);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);

  auto stamp_r = [&](Index a, Index b, double ohms) {
    const double g = 1.0 / ohms;
    G(a, a) += g;
    G(b, b) += g;
    G(a, b) -= g;
    G(b, a) -= g;
  };
  std::vector<bool> replaced(c.resistors().size(), false);
  for (Index k = 0; k < nv; ++k) {
    const VoltageSource& v = view.sources[static_cast<size_t>(k)];
    replaced[static_cast<size_t>(v.resistor)] = true;
    const Index internal = n + k;
    stamp_r(internal, v.from, v.ohms);
    // v_to - v_internal = E, with branch current j_k leaving `to` through the source.
    const Index cur = nodes + k;
    G(v.to, cur) += 1.0;
    G(internal, cur) -= 1.0;
    G(cur, v.to) = 1.0;
    G(cur, internal) = -1.0;
    rhs(cur) = v.volts;
  }
  for (size_t k = 0; k < c.resistors().size(); ++k)
    if (!replaced[k]) stamp_r(c.resistors()[k].from, c.resistors()[k].to, c.resistors()[k].ohms);

  // Ground: drop the ground node's KCL row and voltage column.
  std::vector<Index> keep;
  for (Index i = 0; i < size; ++i)
    if (i != c.ground()) keep.push_back(i);
  const Index r = size - 1;
  Eigen::MatrixXd Gr(r, r);
  Eigen::VectorXd rr(r);
  for (Index a = 0; a < r; ++a) {
    rr(a) = rhs(keep[static_cast<size_t>(a)]);
    for (Index b = 0; b < r; ++b) Gr(a, b) = G(keep[static_cast<size_t>(a)], keep[static_cast<size_t>(b)]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(Gr);
  if (!lu.isInvertible()) throw CircuitError("voltage-source form is singular");
  const Eigen::VectorXd x = lu.solve(rr);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  for (Index a = 0; a < r; ++a)
    if (keep[static_cast<size_t>(a)] < n) v(keep[static_cast<size_t>(a)]) = x(a);
  return v;
}

Eigen::VectorXd kcl_residuals(const EquivalentCircuit& c, const CircuitSolution& s) {
  Eigen::VectorXd res = -c.injections();
  for (const Resistor& r : c.resistors()) {
    const double i = (s.node_voltages(r.from) - s.node_voltages(r.to)) / r.ohms;
    res(r.from) += i;
    res(r.to) -= i;
  }
  return res;
}

std::vector<KclBalance> kcl_ledger(const EquivalentCircuit& c, const CircuitSolution& s, double zero_tol) {
  std::vector<KclBalance> ledger(static_cast<size_t>(c.num_nodes()));
  const Eigen::VectorXd residuals = kcl_residuals(c, s);
  for (Index i = 0; i < c.num_nodes(); ++i) {
    ledger[static_cast<size_t>(i)].node = i;
    ledger[static_cast<size_t>(i)].residual = residuals(i);
  }
  for (const Resistor& r : c.resistors()) {
    const double i = (s.node_voltages(r.from) - s.node_voltages(r.to)) / r.ohms;
    if (std::abs(i) <= zero_tol) continue;
    const Index hi = i > 0 ? r.from : r.to;
    const Index lo = i > 0 ? r.to : r.from;
    ledger[static_cast<size_t>(hi)].outflows.push_back(std::abs(i));
    ledger[static_cast<size_t>(lo)].inflows.push_back(std::abs(i));
  }
  for (const CurrentSource& src : c.sources()) {
    ledger[static_cast<size_t>(src.to)].inflows.push_back(src.amps);
    ledger[static_cast<size_t>(src.from)].outflows.push_back(src.amps);
  }
  return ledger;
}

double loop_sum(const std::vector<Index>& walk, const Eigen::VectorXd& prices) {
  double sum = 0;
  for (size_t k = 0; k < walk.size(); ++k) sum += prices(walk[k]) - prices(walk[(k + 1) % walk.size()]);
  return sum;
}

std::vector<LoopSum> kvl_loop_sums(Index num_nodes, const std::vector<std::pair<Index, Index>>& edges,
                                   const Eigen::VectorXd& prices) {
  std::vector<std::vector<Index>> adj(static_cast<size_t>(num_nodes));
  for (const auto& [u, v] : edges) {
    adj[static_cast<size_t>(u)].push_back(v);
    adj[static_cast<size_t>(v)].push_back(u);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());

  std::vector<Index> parent(static_cast<size_t>(num_nodes), -1), depth(static_cast<size_t>(num_nodes), -1);
  std::set<std::pair<Index, Index>> tree;
  for (Index root = 0; root < num_nodes; ++root) {
    if (depth[static_cast<size_t>(root)] >= 0) continue;
    depth[static_cast<size_t>(root)] = 0;
    std::queue<Index> q;
    q.push(root);
    while (!q.empty()) {
      const Index u = q.front();
      q.pop();
      for (Index v : adj[static_cast<size_t>(u)]) {
        if (depth[static_cast<size_t>(v)] >= 0) continue;
        depth[static_cast<size_t>(v)] = depth[static_cast<size_t>(u)] + 1;
        parent[static_cast<size_t>(v)] = u;
        tree.insert(std::minmax(u, v));
        q.push(v);
      }
    }
  }

  std::vector<LoopSum> loops;
  for (const auto& [u, v] : edges) {
    if (tree.count(std::minmax(u, v))) continue;
    // Tree path u -> lca -> v, closed by the chord v -> u.
    std::vector<Index> up, down;
    Index a = u, b = v;
    while (depth[static_cast<size_t>(a)] > depth[static_cast<size_t>(b)]) {
      up.push_back(a);
      a = parent[static_cast<size_t>(a)];
    }
    while (depth[static_cast<size_t>(b)] > depth[static_cast<size_t>(a)]) {
      down.push_back(b);
      b = parent[static_cast<size_t>(b)];
    }
    while (a != b) {
      up.push_back(a);
      down.push_back(b);
      a = parent[static_cast<size_t>(a)];
      b = parent[static_cast<size_t>(b)];
    }
    up.push_back(a);
    up.insert(up.end(), down.rbegin(), down.rend());
    loops.push_back({up, loop_sum(up, prices)});
  }
  return loops;
}

std::vector<LoopSum> kvl_loop_sums(const Network& net, const Eigen::VectorXd& prices) {
  std::vector<std::pair<Index, Index>> edges;
  for (const Line& l : net.lines()) edges.emplace_back(l.from, l.to);
  return kvl_loop_sums(net.num_buses(), edges, prices);
}

}  // namespace lmpc
