#pragma once

#include <lmpcirc/lp.hpp>

#include <Eigen/LU>

#include <random>

namespace lmpc::testing {

// Small random LPs whose feasible sets are pointed, so vertex enumeration is a
// complete reference. Integer data produces plenty of degenerate vertices.
inline LpProblem<double> random_small_lp(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nvars(1, 8);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> small_int(-4, 4);
  std::uniform_real_distribution<double> real(-5.0, 5.0);
  for (;;) {
    const Index k = nvars(rng);
    const Index me = std::uniform_int_distribution<Index>(0, std::min<Index>(2, k - 1))(rng);
    const Index mi = std::uniform_int_distribution<Index>(std::max<Index>(1, k - me), 10 - me)(rng);
    const bool integral = coin(rng) == 1;
    auto draw = [&]() { return integral ? static_cast<double>(small_int(rng)) : real(rng); };

    LpProblem<double> lp;
    lp.cost.resize(k);
    for (Index j = 0; j < k; ++j) lp.cost(j) = draw();
    lp.eq_matrix.resize(me, k);
    lp.eq_rhs.resize(me);
    for (Index i = 0; i < me; ++i) {
      for (Index j = 0; j < k; ++j) lp.eq_matrix(i, j) = draw();
      lp.eq_rhs(i) = draw();
    }
    lp.ineq_matrix.resize(mi, k);
    lp.ineq_rhs.resize(mi);
    for (Index i = 0; i < mi; ++i) {
      for (Index j = 0; j < k; ++j) lp.ineq_matrix(i, j) = draw();
      lp.ineq_rhs(i) = draw() - 3.0;
    }
    Eigen::MatrixXd stacked(me + mi, k);
    if (me > 0) stacked.topRows(me) = lp.eq_matrix;
    stacked.bottomRows(mi) = lp.ineq_matrix;
    Eigen::FullPivLU<Eigen::MatrixXd> full(stacked);
    full.setThreshold(1e-10);
    if (full.rank() < k) continue;
    if (me > 0) {
      Eigen::FullPivLU<Eigen::MatrixXd> eq(lp.eq_matrix);
      eq.setThreshold(1e-10);
      if (eq.rank() < me) continue;
    }
    return lp;
  }
}

}  // namespace lmpc::testing
