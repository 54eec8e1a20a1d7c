#include <lmpcirc/analysis.hpp>

#include <algorithm>
#include <set>

namespace lmpc {

NegativePriceReport predict_negative_prices(const EquivalentCircuit& c, const CircuitSolution& s, double tol) {
  NegativePriceReport r;
  const Eigen::VectorXd prices = s.prices(c.offset());
  for (Index i = 0; i < prices.size(); ++i) {
    if (prices(i) < -tol) {
      r.witnesses.push_back(i);
      r.witness_prices.push_back(prices(i));
    }
  }
  r.negative = !r.witnesses.empty();
  r.min_price = prices.minCoeff(&r.min_node);
  const double v_min = s.node_voltages.minCoeff();
  r.ground_is_minimum = s.node_voltages(c.ground()) <= v_min + tol;
  r.negative_voltages = !r.ground_is_minimum;
  return r;
}

Index LimitedInfo::num_buses() const {
  Index n = 0;
  for (const TopologyLine& l : lines) n = std::max({n, l.from + 1, l.to + 1});
  return n;
}

RecoveredPrices recover_lmps(const LimitedInfo& info) {
  const Index n = info.num_buses();
  if (n < 2) throw CircuitError("topology needs at least two buses");
  std::vector<Resistor> resistors;
  std::set<std::pair<Index, Index>> seen;
  for (const TopologyLine& l : info.lines) {
    if (l.from < 0 || l.to < 0) throw CircuitError("negative bus id in topology");
    if (!(l.susceptance > 0)) throw CircuitError("susceptance must be positive");
    if (!seen.insert(std::minmax(l.from, l.to)).second) throw CircuitError("parallel line in topology");
    resistors.push_back({l.from, l.to, 1.0 / l.susceptance});
  }
  std::vector<CurrentSource> sources;
  for (const KnownSource& s : info.sources) {
    const auto it = std::find_if(resistors.begin(), resistors.end(), [&](const Resistor& r) {
      return std::minmax(r.from, r.to) == std::minmax(s.from, s.to);
    });
    if (it == resistors.end()) throw CircuitError("source is not on a topology line");
    sources.push_back({s.from, s.to, s.mu, static_cast<Index>(it - resistors.begin())});
  }
  if (info.ground && (*info.ground < 0 || *info.ground >= n)) throw CircuitError("ground is not a topology bus");

  const Index ground = info.ground.value_or(0);
  const EquivalentCircuit circuit(n, std::move(resistors), std::move(sources), ground, info.offset.value_or(0.0));
  const CircuitSolution s = solve_circuit(circuit);

  RecoveredPrices out;
  const Eigen::VectorXd& v = s.node_voltages;
  out.differences = v.replicate(1, n) - v.transpose().replicate(n, 1);
  if (info.ground && info.offset) out.lmp = s.prices(*info.offset);
  return out;
}

CongestionImpact congestion_impact(const EquivalentCircuit& c, double tol) {
  const CircuitSolution s = superpose(c);
  CongestionImpact impact;
  impact.total = s.node_voltages;
  for (size_t k = 0; k < s.per_source_voltages.size(); ++k) {
    SourceImpact si;
    si.source = static_cast<Index>(k);
    si.contribution = s.per_source_voltages[k];
    si.min = si.contribution.minCoeff();
    si.max = si.contribution.maxCoeff();
    for (Index i = 0; i < si.contribution.size(); ++i)
      if (si.contribution(i) < -tol) si.negative_nodes.push_back(i);
    impact.sources.push_back(std::move(si));
  }
  return impact;
}

}  // namespace lmpc
