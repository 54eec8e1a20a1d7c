#include <doctest.h>

#include <lmpcirc/lp.hpp>

#include "oracle.hpp"
#include "random_lp.hpp"

#include <random>

using namespace lmpc;

namespace {

LpProblem<double> single_bound(double lower) {
  LpProblem<double> lp;
  lp.cost = Eigen::VectorXd::Ones(1);
  lp.eq_matrix.resize(0, 1);
  lp.eq_rhs.resize(0);
  lp.ineq_matrix = Eigen::MatrixXd::Ones(1, 1);
  lp.ineq_rhs = Eigen::VectorXd::Constant(1, lower);
  return lp;
}

struct Certificate {
  double stationarity = 0, primal = 0, complementarity = 0, gap = 0, sign = 0;
};

Certificate certify(const LpProblem<double>& lp, const LpSolution<double>& s) {
  Certificate c;
  Eigen::VectorXd grad = -lp.cost;
  if (lp.eq_matrix.rows() > 0) {
    grad += lp.eq_matrix.transpose() * s.eq_duals;
    c.primal = (lp.eq_matrix * s.primal - lp.eq_rhs).cwiseAbs().maxCoeff();
  }
  double dual_obj = lp.eq_matrix.rows() > 0 ? lp.eq_rhs.dot(s.eq_duals) : 0.0;
  if (lp.ineq_matrix.rows() > 0) {
    grad += lp.ineq_matrix.transpose() * s.ineq_duals;
    const Eigen::VectorXd slack = lp.ineq_matrix * s.primal - lp.ineq_rhs;
    c.primal = std::max(c.primal, std::max(0.0, -slack.minCoeff()));
    c.complementarity = slack.cwiseProduct(s.ineq_duals).cwiseAbs().maxCoeff();
    c.sign = std::max(0.0, -s.ineq_duals.minCoeff());
    dual_obj += lp.ineq_rhs.dot(s.ineq_duals);
  }
  c.stationarity = grad.size() > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
  c.gap = std::abs(s.objective - dual_obj);
  return c;
}

}  // namespace

TEST_CASE("single lower bound") {
  const auto s = solve_lp(single_bound(3.0));
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.primal(0) == doctest::Approx(3.0));
  CHECK(s.objective == doctest::Approx(3.0));
  CHECK(s.ineq_duals(0) == doctest::Approx(1.0));
}

TEST_CASE("unbounded ray is reported") {
  LpProblem<double> lp;
  lp.cost = -Eigen::VectorXd::Ones(1);
  lp.eq_matrix.resize(0, 1);
  lp.eq_rhs.resize(0);
  lp.ineq_matrix = Eigen::MatrixXd::Ones(1, 1);  // x >= 0, no upper bound
  lp.ineq_rhs = Eigen::VectorXd::Zero(1);
  CHECK(solve_lp(lp).status == LpStatus::Unbounded);

  lp.ineq_matrix.resize(0, 1);
  lp.ineq_rhs.resize(0);
  CHECK(solve_lp(lp).status == LpStatus::Unbounded);
}

TEST_CASE("infeasible bounds are reported") {
  LpProblem<double> lp = single_bound(1.0);
  lp.ineq_matrix.conservativeResize(2, 1);
  lp.ineq_rhs.conservativeResize(2);
  lp.ineq_matrix(1, 0) = -1.0;  // -x >= 1  ->  x <= -1
  lp.ineq_rhs(1) = 1.0;
  CHECK(solve_lp(lp).status == LpStatus::Infeasible);
}

TEST_CASE("redundant equality rows get a zero dual") {
  LpProblem<double> lp;
  lp.cost = Eigen::Vector2d(1.0, 2.0);
  lp.eq_matrix.resize(2, 2);
  lp.eq_matrix << 1, 1, 2, 2;
  lp.eq_rhs = Eigen::Vector2d(4.0, 8.0);
  lp.ineq_matrix = Eigen::Matrix2d::Identity();
  lp.ineq_rhs = Eigen::Vector2d::Zero();
  const auto s = solve_lp(lp);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(4.0));
  const auto cert = certify(lp, s);
  CHECK(cert.stationarity < 1e-9);
  CHECK(cert.gap < 1e-9);
}

TEST_CASE("Beale's cycling example terminates") {
  // min -3/4 x1 + 20 x2 - 1/2 x3 + 6 x4 over the classic degenerate polytope.
  LpProblem<double> lp;
  lp.cost = Eigen::Vector4d(-0.75, 20.0, -0.5, 6.0);
  lp.eq_matrix.resize(0, 4);
  lp.eq_rhs.resize(0);
  lp.ineq_matrix.resize(7, 4);
  lp.ineq_matrix << -0.25, 8, 1, -9,  //
      -0.5, 12, 0.5, -3,              //
      0, 0, -1, 0,                    //
      1, 0, 0, 0,                     //
      0, 1, 0, 0,                     //
      0, 0, 1, 0,                     //
      0, 0, 0, 1;
  lp.ineq_rhs.setZero(7);
  lp.ineq_rhs(2) = -1.0;
  for (int threshold : {0, 3, 50}) {
    SimplexOptions opt;
    opt.stall_threshold = threshold;
    const auto s = solve_lp(lp, opt);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == doctest::Approx(-1.25));
  }
}

TEST_CASE("matches vertex enumeration on random small LPs") {
  std::mt19937_64 rng(20240611);
  int counts[3] = {0, 0, 0};
  for (int trial = 0; trial < 300; ++trial) {
    const auto lp = testing::random_small_lp(rng);
    const auto ref = oracle::enumerate_vertices(lp);
    const auto got = solve_lp(lp);
    INFO("trial " << trial);
    REQUIRE(got.status == ref.status);
    ++counts[static_cast<int>(got.status)];
    if (got.status != LpStatus::Optimal) continue;
    CHECK(std::abs(got.objective - ref.objective) <= 1e-6 * std::max(1.0, std::abs(ref.objective)));
    const auto cert = certify(lp, got);
    CHECK(cert.stationarity <= 1e-8);
    CHECK(cert.primal <= 1e-8);
    CHECK(cert.complementarity <= 1e-8);
    CHECK(cert.sign <= 1e-9);
    CHECK(cert.gap <= 1e-7 * (1 + std::abs(got.objective)));
  }
  // The generator should exercise every status.
  CHECK(counts[0] > 0);
  CHECK(counts[1] > 0);
  CHECK(counts[2] > 0);
}
