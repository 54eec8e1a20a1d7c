#include <lmpcirc/network.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>

namespace lmpc {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw NetworkError(what);
}

}  // namespace

bool is_connected(Index n, const std::vector<std::pair<Index, Index>>& edges) {
  if (n <= 1) return true;
  std::vector<Index> parent(static_cast<size_t>(n));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[static_cast<size_t>(x)] != x) {
      parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      x = parent[static_cast<size_t>(x)];
    }
    return x;
  };
  Index components = n;
  for (const auto& [u, v] : edges) {
    const Index ru = find(u), rv = find(v);
    if (ru != rv) {
      parent[static_cast<size_t>(ru)] = rv;
      --components;
    }
  }
  return components == 1;
}

Network::Network(std::vector<Bus> buses, std::vector<Line> lines, std::vector<Injector> injectors)
    : buses_(std::move(buses)), lines_(std::move(lines)), injectors_(std::move(injectors)) {
  const Index n = num_buses();
  require(n >= 2, "network needs at least two buses");
  std::sort(buses_.begin(), buses_.end(), [](const Bus& x, const Bus& y) { return x.id < y.id; });
  for (Index i = 0; i < n; ++i) {
    const Bus& bus = buses_[static_cast<size_t>(i)];
    require(bus.id == i, "bus ids must be unique and contiguous from 0 (missing or duplicate id " +
                             std::to_string(i) + ")");
    require(std::isfinite(bus.demand) && bus.demand >= 0,
            "bus " + std::to_string(i) + ": demand must be finite and >= 0");
  }

  std::set<std::pair<Index, Index>> seen;
  std::vector<std::pair<Index, Index>> edges;
  for (size_t k = 0; k < lines_.size(); ++k) {
    const Line& l = lines_[k];
    const std::string where = "line " + std::to_string(k);
    require(l.from >= 0 && l.from < n && l.to >= 0 && l.to < n, where + ": endpoint out of range");
    require(l.from != l.to, where + ": self loop");
    require(std::isfinite(l.susceptance) && l.susceptance > 0, where + ": susceptance must be > 0");
    if (l.flow_limit)
      require(std::isfinite(*l.flow_limit) && *l.flow_limit > 0, where + ": flow_limit must be > 0");
    const auto key = std::minmax(l.from, l.to);
    require(seen.insert(key).second, where + ": parallel line between buses " + std::to_string(key.first) +
                                         " and " + std::to_string(key.second) + " (merge it first)");
    edges.emplace_back(l.from, l.to);
    if (l.flow_limit) limited_.push_back(static_cast<Index>(k));
  }

  require(!injectors_.empty(), "network needs at least one injector");
  std::vector<int> gens(static_cast<size_t>(n), 0), loads(static_cast<size_t>(n), 0);
  for (size_t k = 0; k < injectors_.size(); ++k) {
    const Injector& g = injectors_[k];
    const std::string where = "injector " + std::to_string(k);
    require(g.bus >= 0 && g.bus < n, where + ": bus out of range");
    require(std::isfinite(g.cost) && std::isfinite(g.p_min) && std::isfinite(g.p_max),
            where + ": non-finite data");
    require(g.p_min <= g.p_max, where + ": p_min > p_max");
    auto& count = g.is_load() ? loads[static_cast<size_t>(g.bus)] : gens[static_cast<size_t>(g.bus)];
    require(++count == 1, where + ": bus " + std::to_string(g.bus) + " already has a " +
                              (g.is_load() ? "load" : "generator"));
  }

  require(is_connected(n, edges), "network is not connected");
}

Eigen::VectorXd Network::demands() const {
  Eigen::VectorXd a(num_buses());
  for (const Bus& b : buses_) a(b.id) = b.demand;
  return a;
}

double Network::total_demand() const { return demands().sum(); }

Eigen::MatrixXd build_b_matrix(const Network& net) {
  const Index n = net.num_buses();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  for (const Line& l : net.lines()) {
    B(l.from, l.from) += l.susceptance;
    B(l.to, l.to) += l.susceptance;
    B(l.from, l.to) -= l.susceptance;
    B(l.to, l.from) -= l.susceptance;
  }
  return B;
}

DcopfLp assemble_lp(const Network& net) {
  const Index n = net.num_buses();
  const Index m = net.num_injectors();
  const auto& limited = net.limited_lines();
  const Index nl = static_cast<Index>(limited.size());

  DcopfLp lp;
  lp.B = build_b_matrix(net);
  lp.a = net.demands();
  lp.A = Eigen::MatrixXd::Zero(n, m);
  lp.c = Eigen::VectorXd::Zero(m);
  lp.C = Eigen::MatrixXd::Zero(2 * m, m);
  lp.b = Eigen::VectorXd::Zero(2 * m);
  for (Index k = 0; k < m; ++k) {
    const Injector& g = net.injectors()[static_cast<size_t>(k)];
    const double sign = g.is_load() ? -1.0 : 1.0;
    lp.A(g.bus, k) = sign;
    lp.c(k) = sign * g.cost;
    lp.C(2 * k, k) = 1.0;
    lp.b(2 * k) = g.p_min;
    lp.C(2 * k + 1, k) = -1.0;
    lp.b(2 * k + 1) = -g.p_max;
  }

  lp.D = Eigen::MatrixXd::Zero(2 * nl, n);
  lp.d = Eigen::VectorXd::Zero(2 * nl);
  for (Index r = 0; r < nl; ++r) {
    const Line& l = net.lines()[static_cast<size_t>(limited[static_cast<size_t>(r)])];
    const double bound = -*l.flow_limit / l.susceptance;
    lp.D(2 * r, l.from) = 1.0;
    lp.D(2 * r, l.to) = -1.0;
    lp.D(2 * r + 1, l.from) = -1.0;
    lp.D(2 * r + 1, l.to) = 1.0;
    lp.d(2 * r) = bound;
    lp.d(2 * r + 1) = bound;
  }
  return lp;
}

Eigen::VectorXd line_flows(const Network& net, const Eigen::VectorXd& theta) {
  Eigen::VectorXd f(net.num_lines());
  for (Index k = 0; k < net.num_lines(); ++k) {
    const Line& l = net.lines()[static_cast<size_t>(k)];
    f(k) = l.susceptance * (theta(l.to) - theta(l.from));
  }
  return f;
}

namespace {

// mt19937_64's output sequence is fixed by the standard; the distributions are
// not, so the mapping to reals is done by hand.
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  Index index(Index n) { return std::min(n - 1, static_cast<Index>(uniform() * static_cast<double>(n))); }
  bool chance(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

double round_to(double x, double step) { return std::round(x / step) * step; }

}  // namespace

Network generate_random_network(std::uint64_t seed, Index n, double edge_prob) {
  if (n < 3) throw std::invalid_argument("generate_random_network: n must be >= 3");
  if (!(edge_prob > 0 && edge_prob <= 1))
    throw std::invalid_argument("generate_random_network: edge_prob must lie in (0, 1]");
  PortableRng rng(seed);

  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  for (Index i = n - 1; i > 0; --i) std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(rng.index(i + 1))]);

  std::set<std::pair<Index, Index>> edge_set;
  std::vector<std::pair<Index, Index>> edges;
  auto add_edge = [&](Index u, Index v) {
    const auto key = std::minmax(u, v);
    if (edge_set.insert(key).second) edges.emplace_back(key.first, key.second);
  };
  for (Index i = 1; i < n; ++i)
    add_edge(order[static_cast<size_t>(rng.index(i))], order[static_cast<size_t>(i)]);
  for (Index u = 0; u < n; ++u)
    for (Index v = u + 1; v < n; ++v)
      if (!edge_set.count({u, v}) && rng.chance(edge_prob)) add_edge(u, v);
  while (static_cast<Index>(edges.size()) < n) {
    const Index u = rng.index(n), v = rng.index(n);
    if (u != v) add_edge(u, v);
  }

  std::vector<Line> lines;
  for (const auto& [u, v] : edges) {
    Line l{u, v, round_to(rng.uniform(1.0, 10.0), 0.01), std::nullopt};
    if (rng.chance(0.6)) l.flow_limit = round_to(rng.uniform(5.0, 60.0), 0.1);
    lines.push_back(l);
  }

  std::vector<Bus> buses;
  std::vector<Injector> injectors;
  for (Index i = 0; i < n; ++i) {
    const double demand = rng.chance(0.6) ? round_to(rng.uniform(10.0, 80.0), 0.1) : 0.0;
    buses.push_back({i, demand});
    if (demand > 0 || rng.chance(0.5)) {
      const double p_max = round_to(demand + rng.uniform(10.0, 100.0), 0.1);
      injectors.push_back({i, InjectorKind::Generator, round_to(rng.uniform(5.0, 80.0), 1e-4), 0.0, p_max});
    }
    if (rng.chance(0.15))
      injectors.push_back({i, InjectorKind::Load, round_to(rng.uniform(20.0, 120.0), 1e-4), 0.0,
                           round_to(rng.uniform(5.0, 30.0), 0.1)});
  }
  if (injectors.empty()) injectors.push_back({0, InjectorKind::Generator, 10.0, 0.0, 100.0});

  // Half the networks carry one zero-cost unit.
  if (rng.chance(0.5)) {
    std::vector<size_t> gens;
    for (size_t k = 0; k < injectors.size(); ++k)
      if (!injectors[k].is_load()) gens.push_back(k);
    if (!gens.empty()) injectors[gens[static_cast<size_t>(rng.index(static_cast<Index>(gens.size())))]].cost = 0.0;
  }
  return Network(std::move(buses), std::move(lines), std::move(injectors));
}

}  // namespace lmpc
