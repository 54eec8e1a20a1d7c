#include <doctest.h>

#include <lmpcirc/dcopf.hpp>

#include "oracle.hpp"

using namespace lmpc;

namespace {

Network fig1() {
  return Network({{0, 0}, {1, 0}, {2, 150}}, {{0, 1, 1, 30.0}, {0, 2, 1, {}}, {1, 2, 1, {}}},
                 {{0, InjectorKind::Generator, 0, 0, 200},
                  {1, InjectorKind::Generator, 40, 0, 200},
                  {2, InjectorKind::Generator, 20, 0, 200}});
}

Network fig4() {
  return Network({{0, 0}, {1, 0}, {2, 50}}, {{0, 1, 1, {}}, {0, 2, 1, 10.0}, {1, 2, 1, {}}},
                 {{0, InjectorKind::Generator, 10, 0, 1000},
                  {1, InjectorKind::Generator, 20, 0, 1000},
                  {2, InjectorKind::Generator, 100, 0, 1000}});
}

// The three-bus LP written out by hand, angle of bus 0 fixed at zero.
// Variables: p0 p1 p2 θ1 θ2. The limited line joins bus 0 and bus `far`.
LpProblem<double> hand_lp(const Eigen::Vector3d& cost, double pmax, double demand2, Index far, double limit) {
  LpProblem<double> lp;
  lp.cost.resize(5);
  lp.cost << cost, 0, 0;
  lp.eq_matrix.resize(3, 5);
  lp.eq_matrix << 1, 0, 0, -1, -1,
                  0, 1, 0, 2, -1,
                  0, 0, 1, -1, 2;
  lp.eq_rhs = Eigen::Vector3d(0, 0, demand2);
  lp.ineq_matrix = Eigen::MatrixXd::Zero(8, 5);
  lp.ineq_rhs = Eigen::VectorXd::Zero(8);
  for (Index k = 0; k < 3; ++k) {
    lp.ineq_matrix(2 * k, k) = 1;
    lp.ineq_matrix(2 * k + 1, k) = -1;
    lp.ineq_rhs(2 * k + 1) = -pmax;
  }
  const Index col = far == 1 ? 3 : 4;
  lp.ineq_matrix(6, col) = -1;  // θ0 - θfar >= -limit
  lp.ineq_matrix(7, col) = 1;
  lp.ineq_rhs(6) = -limit;
  lp.ineq_rhs(7) = -limit;
  return lp;
}

// Distinct dual vectors; several bases may share one.
std::vector<oracle::DualVertex> distinct(const std::vector<oracle::DualVertex>& all) {
  std::vector<oracle::DualVertex> out;
  for (const auto& v : all) {
    bool seen = false;
    for (const auto& u : out)
      seen = seen || ((u.eq_duals - v.eq_duals).cwiseAbs().maxCoeff() < 1e-9 &&
                      (u.ineq_duals - v.ineq_duals).cwiseAbs().maxCoeff() < 1e-9);
    if (!seen) out.push_back(v);
  }
  return out;
}

bool matches_some_optimum(const std::vector<oracle::DualVertex>& optima, const DcopfSolution& sol) {
  Eigen::VectorXd ineq(8);
  ineq << sol.gamma, sol.mu;
  for (const auto& v : optima)
    if ((v.eq_duals - sol.lmp).cwiseAbs().maxCoeff() < 1e-6 && (v.ineq_duals - ineq).cwiseAbs().maxCoeff() < 1e-6)
      return true;
  return false;
}

}  // namespace

TEST_CASE("three-bus congested case against enumeration") {
  const DcopfSolution sol = solve_opf(fig1());
  const LpProblem<double> lp = hand_lp(Eigen::Vector3d(0, 40, 20), 200, 150, 1, 30);
  const auto primal = oracle::enumerate_vertices(lp);
  REQUIRE(primal.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(primal.objective));
  CHECK(sol.objective == doctest::Approx(1200));

  const auto optima = distinct(oracle::enumerate_dual_optima(lp));
  REQUIRE(optima.size() == 1);
  CHECK(matches_some_optimum(optima, sol));
  CHECK(sol.lmp(0) == doctest::Approx(0).epsilon(1e-9));
  CHECK(sol.lmp(1) == doctest::Approx(40));
  CHECK(sol.lmp(2) == doctest::Approx(20));
  REQUIRE(sol.congestion.size() == 1);
  CHECK(sol.congestion[0].from == 0);
  CHECK(sol.congestion[0].to == 1);
  CHECK(sol.congestion[0].value == doctest::Approx(60));
  CHECK(sol.congestion[0].mw_basis == doctest::Approx(60));
  CHECK(sol.p(0) == doctest::Approx(120));
  CHECK(sol.p(1) == doctest::Approx(30));
  CHECK(sol.p(2) == doctest::Approx(0).epsilon(1e-9));
}

TEST_CASE("three-bus negative-price case against enumeration") {
  const DcopfSolution sol = solve_opf(fig4());
  const LpProblem<double> lp = hand_lp(Eigen::Vector3d(10, 20, 100), 1000, 50, 2, 10);
  const auto primal = oracle::enumerate_vertices(lp);
  REQUIRE(primal.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(primal.objective));
  const auto optima = distinct(oracle::enumerate_dual_optima(lp));
  REQUIRE(optima.size() == 1);
  CHECK(matches_some_optimum(optima, sol));
  CHECK(sol.lmp(0) == doctest::Approx(-60));
  CHECK(sol.lmp(1) == doctest::Approx(20));
  CHECK(sol.lmp(2) == doctest::Approx(100));
  REQUIRE(sol.congestion.size() == 1);
  CHECK(sol.congestion[0].from == 0);
  CHECK(sol.congestion[0].to == 2);
  CHECK(sol.congestion[0].value == doctest::Approx(240));
  const MarginalUnit m = cheapest_marginal(sol, fig4());
  CHECK(m.bus == 1);
  CHECK(m.cost == 20);
}

TEST_CASE("uncongested network has a uniform price") {
  const Network net({{0, 0}, {1, 0}, {2, 150}}, {{0, 1, 1, {}}, {0, 2, 1, {}}, {1, 2, 1, {}}},
                    {{0, InjectorKind::Generator, 30, 0, 100}, {1, InjectorKind::Generator, 40, 0, 200}});
  const DcopfSolution sol = solve_opf(net);
  CHECK((sol.lmp.array() - 40).abs().maxCoeff() < 1e-9);
  CHECK(sol.mu.size() == 0);
  CHECK(verify_optimality(net, sol).all_pass());
}

TEST_CASE("verify_optimality catches perturbed prices") {
  const Network net = fig1();
  DcopfSolution sol = solve_opf(net);
  CHECK(verify_optimality(net, sol).all_pass());
  sol.lmp(1) += 1.0;
  const CheckReport r = verify_optimality(net, sol);
  CHECK_FALSE(r.blocks[2].pass);
  CHECK_FALSE(r.all_pass());

  DcopfSolution neg = solve_opf(net);
  neg.mu(0) = -neg.mu(0);
  CHECK_FALSE(verify_optimality(net, neg).blocks[5].pass);

  DcopfSolution shape = solve_opf(net);
  shape.lmp.resize(2);
  CHECK_THROWS_AS(verify_optimality(net, shape), std::invalid_argument);
}

TEST_CASE("prices do not depend on the reference bus") {
  int compared = 0;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const Network net = generate_random_network(seed, 5 + static_cast<Index>(seed % 8), 0.3);
    const DcopfSolution base = solve_opf(net);
    for (Index ref = 1; ref < net.num_buses(); ++ref) {
      OpfOptions opt;
      opt.reference_bus = ref;
      const DcopfSolution other = solve_opf(net, opt);
      CHECK(other.objective == doctest::Approx(base.objective).epsilon(1e-9));
      CHECK(std::abs(other.theta(ref)) < 1e-12);
      CHECK(verify_optimality(net, other).all_pass());
      if (!base.degenerate && !other.degenerate) {
        CHECK((other.lmp - base.lmp).cwiseAbs().maxCoeff() < 1e-6);
        ++compared;
      }
    }
  }
  CHECK(compared > 0);
}

TEST_CASE("marginal injectors set the price at their bus") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const Network net = generate_random_network(seed, 6 + static_cast<Index>(seed % 10), 0.25);
    const DcopfSolution sol = solve_opf(net);
    for (Index k : sol.marginal) {
      const Injector& g = net.injectors()[static_cast<size_t>(k)];
      CHECK(sol.lmp(g.bus) == doctest::Approx(g.cost).epsilon(1e-9));
    }
  }
}

TEST_CASE("price-responsive load sets the price when it is marginal") {
  const Network net({{0, 0}, {1, 0}}, {{0, 1, 1, {}}},
                    {{0, InjectorKind::Generator, 10, 0, 50}, {1, InjectorKind::Load, 30, 0, 80}});
  const DcopfSolution sol = solve_opf(net);
  CHECK(sol.p(1) == doctest::Approx(50));
  CHECK(sol.lmp(1) == doctest::Approx(30));
  CHECK(sol.objective == doctest::Approx(50 * 10 - 50 * 30));
}

TEST_CASE("cheapest marginal injector breaks ties by bus id") {
  // Two zero-cost units at buses 1 and 5 are both marginal.
  const Network net({{0, 0}, {1, 0}, {2, 0}, {3, 370}, {4, 0}, {5, 0}, {6, 0}},
                    {{0, 1, 1, {}},
                     {0, 6, 1, {}},
                     {5, 0, 1, 10.0},
                     {2, 3, 1, {}},
                     {1, 3, 1, 150.0},
                     {1, 2, 1, {}},
                     {3, 4, 1, {}},
                     {4, 5, 1, {}},
                     {6, 5, 1, {}}},
                    {{0, InjectorKind::Generator, 45, 0, 200},
                     {1, InjectorKind::Generator, 0, 0, 200},
                     {2, InjectorKind::Generator, 20, 0, 10},
                     {5, InjectorKind::Generator, 0, 0, 200},
                     {6, InjectorKind::Generator, 10, 0, 10}});
  const DcopfSolution sol = solve_opf(net);
  CHECK(sol.marginal == std::vector<Index>{0, 1, 3});
  const MarginalUnit m = cheapest_marginal(sol, net);
  CHECK(m.bus == 1);
  CHECK(m.cost == 0);
}

TEST_CASE("every injector at a limit leaves no marginal unit") {
  const Network net({{0, 0}, {1, 10}}, {{0, 1, 1, {}}}, {{0, InjectorKind::Generator, 5, 10, 10}});
  const DcopfSolution sol = solve_opf(net);
  CHECK(sol.marginal.empty());
  CHECK_THROWS_AS(cheapest_marginal(sol, net), NoMarginalInjector);
}

TEST_CASE("infeasible network reports the cut") {
  const Network net({{0, 0}, {1, 0}, {2, 100}}, {{0, 1, 1, 10.0}, {0, 2, 1, 10.0}, {1, 2, 1, {}}},
                    {{0, InjectorKind::Generator, 5, 0, 500}});
  try {
    solve_opf(net);
    FAIL("expected OpfInfeasible");
  } catch (const OpfInfeasible& e) {
    CHECK(e.diagnostics.total_demand == doctest::Approx(100));
    CHECK(e.diagnostics.total_capacity == doctest::Approx(500));
    CHECK(e.diagnostics.unserved == doctest::Approx(85));
    CHECK(e.diagnostics.short_buses == std::vector<Index>{2});
    CHECK(e.diagnostics.cut_lines == std::vector<Index>{1});
  }

  const Network short_cap({{0, 0}, {1, 100}}, {{0, 1, 1, {}}}, {{0, InjectorKind::Generator, 5, 0, 40}});
  CHECK_THROWS_AS(solve_opf(short_cap), OpfInfeasible);
  CHECK(diagnose_infeasibility(short_cap).unserved == doctest::Approx(60));
}

TEST_CASE("reference bus out of range") {
  OpfOptions opt;
  opt.reference_bus = 7;
  CHECK_THROWS_AS(solve_opf(fig1(), opt), std::invalid_argument);
}
