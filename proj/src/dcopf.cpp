#include <lmpcirc/dcopf.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lmpc {

namespace {

// Drops the reference-bus angle column; θ_ref is pinned to zero.
LpProblem<double> to_solver_form(const DcopfLp& lp, Index ref) {
  const Index n = lp.B.rows();
  const Index m = lp.A.cols();
  const Index k = m + n - 1;
  auto keep_cols = [&](const Eigen::MatrixXd& M) {
    Eigen::MatrixXd out(M.rows(), n - 1);
    for (Index j = 0, c = 0; j < n; ++j)
      if (j != ref) out.col(c++) = M.col(j);
    return out;
  };

  LpProblem<double> p;
  p.cost = Eigen::VectorXd::Zero(k);
  p.cost.head(m) = lp.c;
  p.eq_matrix.resize(n, k);
  p.eq_matrix << lp.A, keep_cols(lp.B);
  p.eq_rhs = lp.a;
  const Index rc = lp.C.rows(), rd = lp.D.rows();
  p.ineq_matrix = Eigen::MatrixXd::Zero(rc + rd, k);
  p.ineq_matrix.topLeftCorner(rc, m) = lp.C;
  if (rd > 0) p.ineq_matrix.bottomRightCorner(rd, n - 1) = keep_cols(lp.D);
  p.ineq_rhs.resize(rc + rd);
  p.ineq_rhs << lp.b, lp.d;
  return p;
}

double inf_norm(const Eigen::VectorXd& v) { return v.size() > 0 ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

std::string InfeasibilityDiagnostics::summary() const {
  std::ostringstream os;
  os << "demand " << total_demand << " MW vs capacity " << total_capacity << " MW";
  if (unserved > 0) {
    os << "; " << unserved << " MW undeliverable";
    if (!short_buses.empty()) {
      os << " at bus";
      for (Index b : short_buses) os << ' ' << b;
    }
    if (!cut_lines.empty()) {
      os << "; cut by saturated line";
      for (Index l : cut_lines) os << ' ' << l;
    }
  }
  return os.str();
}

InfeasibilityDiagnostics diagnose_infeasibility(const Network& net) {
  InfeasibilityDiagnostics diag;
  diag.total_demand = net.total_demand();
  for (const Injector& g : net.injectors()) {
    if (g.is_load())
      diag.total_demand += std::max(0.0, g.p_min);
    else
      diag.total_capacity += g.p_max;
  }

  // Least-infeasible dispatch: add penalised shortfall and surplus columns per bus.
  const DcopfLp lp = assemble_lp(net);
  LpProblem<double> p = to_solver_form(lp, 0);
  const Index n = net.num_buses();
  const Index k = p.num_variables();
  const double penalty = 1e6;
  p.cost.conservativeResize(k + 2 * n);
  p.cost.tail(2 * n).setConstant(penalty);
  p.eq_matrix.conservativeResize(Eigen::NoChange, k + 2 * n);
  p.eq_matrix.rightCols(2 * n) << Eigen::MatrixXd::Identity(n, n), -Eigen::MatrixXd::Identity(n, n);
  const Index rows = p.ineq_matrix.rows();
  p.ineq_matrix.conservativeResize(rows + 2 * n, k + 2 * n);
  p.ineq_matrix.rightCols(2 * n).setZero();
  p.ineq_matrix.bottomRows(2 * n).setZero();
  p.ineq_matrix.bottomRightCorner(2 * n, 2 * n).setIdentity();
  p.ineq_rhs.conservativeResize(rows + 2 * n);
  p.ineq_rhs.tail(2 * n).setZero();

  const auto sol = solve_lp(p);
  if (sol.status != LpStatus::Optimal) return diag;
  const Eigen::VectorXd slack = sol.primal.tail(2 * n);
  for (Index i = 0; i < n; ++i) {
    const double s = slack(i) + slack(n + i);
    if (s > 1e-6) {
      diag.short_buses.push_back(i);
      diag.unserved += s;
    }
  }
  const Index m = net.num_injectors();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
  theta.tail(n - 1) = sol.primal.segment(m, n - 1);
  const Eigen::VectorXd flows = line_flows(net, theta);
  for (Index idx : net.limited_lines()) {
    const Line& l = net.lines()[static_cast<size_t>(idx)];
    if (std::abs(flows(idx)) >= *l.flow_limit - 1e-6) diag.cut_lines.push_back(idx);
  }
  return diag;
}

DcopfSolution solve_opf(const Network& net, const OpfOptions& opt) {
  const Index n = net.num_buses();
  const Index m = net.num_injectors();
  if (opt.reference_bus < 0 || opt.reference_bus >= n)
    throw std::invalid_argument("reference bus out of range");

  const DcopfLp lp = assemble_lp(net);
  const auto res = solve_lp(to_solver_form(lp, opt.reference_bus));
  if (res.status == LpStatus::Infeasible) throw OpfInfeasible(diagnose_infeasibility(net));
  if (res.status == LpStatus::Unbounded) throw OpfUnbounded("OPF unbounded: check injector costs and limits");

  DcopfSolution sol;
  sol.reference_bus = opt.reference_bus;
  sol.p = res.primal.head(m);
  sol.theta = Eigen::VectorXd::Zero(n);
  for (Index j = 0, c = 0; j < n; ++j)
    if (j != opt.reference_bus) sol.theta(j) = res.primal(m + c++);
  sol.objective = res.objective;
  sol.lmp = res.eq_duals;
  const Index rc = lp.C.rows();
  sol.gamma = res.ineq_duals.head(rc);
  sol.mu = res.ineq_duals.tail(lp.D.rows());
  sol.degenerate = res.degenerate;

  const auto& limited = net.limited_lines();
  for (size_t r = 0; r < limited.size(); ++r) {
    const Line& l = net.lines()[static_cast<size_t>(limited[r])];
    const double forward = sol.mu(2 * static_cast<Index>(r));
    const double backward = sol.mu(2 * static_cast<Index>(r) + 1);
    LineCongestion c;
    c.line = limited[r];
    c.value = std::max(0.0, forward) + std::max(0.0, backward);
    c.mw_basis = c.value / l.susceptance;
    const bool reversed = backward > forward;
    c.from = reversed ? l.to : l.from;
    c.to = reversed ? l.from : l.to;
    sol.congestion.push_back(c);
  }

  for (Index k = 0; k < m; ++k) {
    const Injector& g = net.injectors()[static_cast<size_t>(k)];
    if (std::min(sol.p(k) - g.p_min, g.p_max - sol.p(k)) > opt.marginal_tol) sol.marginal.push_back(k);
  }
  return sol;
}

bool CheckReport::all_pass() const {
  return gap_pass && std::all_of(blocks.begin(), blocks.end(), [](const ResidualBlock& b) { return b.pass; });
}

CheckReport verify_optimality(const Network& net, const DcopfSolution& sol, double tol) {
  const DcopfLp lp = assemble_lp(net);
  if (sol.p.size() != lp.A.cols() || sol.theta.size() != lp.B.rows() || sol.lmp.size() != lp.B.rows() ||
      sol.gamma.size() != lp.C.rows() || sol.mu.size() != lp.D.rows())
    throw std::invalid_argument("verify_optimality: solution does not match network dimensions");

  const Eigen::VectorXd slack_p = lp.C * sol.p - lp.b;
  const Eigen::VectorXd slack_theta = lp.D * sol.theta - lp.d;
  auto complementarity = [](const Eigen::VectorXd& slack, const Eigen::VectorXd& dual) {
    if (slack.size() == 0) return 0.0;
    return std::max(std::max(0.0, -slack.minCoeff()), slack.cwiseProduct(dual).cwiseAbs().maxCoeff());
  };
  double sign = 0;
  if (sol.gamma.size() > 0) sign = std::max(sign, -sol.gamma.minCoeff());
  if (sol.mu.size() > 0) sign = std::max(sign, -sol.mu.minCoeff());

  CheckReport r;
  r.tolerance = tol;
  r.blocks = {{
      {"primal balance", inf_norm(lp.A * sol.p + lp.B * sol.theta - lp.a), false},
      {"injection stationarity", inf_norm(lp.A.transpose() * sol.lmp + lp.C.transpose() * sol.gamma - lp.c), false},
      {"angle stationarity", inf_norm(lp.B.transpose() * sol.lmp + lp.D.transpose() * sol.mu), false},
      {"injection complementarity", complementarity(slack_p, sol.gamma), false},
      {"angle complementarity", complementarity(slack_theta, sol.mu), false},
      {"dual sign", std::max(0.0, sign), false},
  }};
  for (auto& b : r.blocks) b.pass = b.norm <= tol;

  const double primal = lp.c.dot(sol.p);
  double dual = lp.a.dot(sol.lmp) + lp.b.dot(sol.gamma);
  if (lp.d.size() > 0) dual += lp.d.dot(sol.mu);
  r.duality_gap = std::abs(primal - dual);
  r.gap_pass = r.duality_gap <= tol * (1 + std::abs(primal));
  return r;
}

MarginalUnit cheapest_marginal(const DcopfSolution& sol, const Network& net) {
  if (sol.marginal.empty()) throw NoMarginalInjector();
  MarginalUnit best;
  bool found = false;
  for (Index k : sol.marginal) {
    const Injector& g = net.injectors()[static_cast<size_t>(k)];
    if (!found || g.cost < best.cost || (g.cost == best.cost && g.bus < best.bus)) {
      best = {k, g.bus, g.cost};
      found = true;
    }
  }
  return best;
}

}  // namespace lmpc
