#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace lmpc {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal:
      return "optimal";
    case LpStatus::Infeasible:
      return "infeasible";
    case LpStatus::Unbounded:
      return "unbounded";
  }
  return "unknown";
}

/**
 * A linear program over free variables x:
 *
 *   min  cᵀx
 *   s.t. E x  = e
 *        G x >= g
 *
 * Either block may have zero rows.
 */
template <typename Scalar>
struct LpProblem {
  VectorX<Scalar> cost;
  MatrixX<Scalar> eq_matrix;
  VectorX<Scalar> eq_rhs;
  MatrixX<Scalar> ineq_matrix;
  VectorX<Scalar> ineq_rhs;

  Index num_variables() const { return cost.size(); }

  void validate() const {
    const Index n = cost.size();
    if (eq_matrix.rows() != eq_rhs.size() || (eq_matrix.rows() > 0 && eq_matrix.cols() != n))
      throw std::invalid_argument("LpProblem: equality block dimensions mismatch");
    if (ineq_matrix.rows() != ineq_rhs.size() ||
        (ineq_matrix.rows() > 0 && ineq_matrix.cols() != n))
      throw std::invalid_argument("LpProblem: inequality block dimensions mismatch");
    if (!cost.allFinite() || !eq_matrix.allFinite() || !eq_rhs.allFinite() ||
        !ineq_matrix.allFinite() || !ineq_rhs.allFinite())
      throw std::invalid_argument("LpProblem: non-finite entry");
  }
};

/// Primal vertex plus the basis duals. Stationarity reads Eᵀλ + Gᵀν = c with ν >= 0.
template <typename Scalar>
struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  VectorX<Scalar> primal;
  Scalar objective = 0;
  VectorX<Scalar> eq_duals;
  VectorX<Scalar> ineq_duals;
  // Some basic variable sits at its bound; duals may then depend on the basis.
  bool degenerate = false;
  int iterations = 0;
};

struct SimplexOptions {
  double pivot_tol = 1e-9;
  double optimality_tol = 1e-9;
  double feasibility_tol = 1e-7;
  // Consecutive degenerate pivots before switching to Bland's rule.
  int stall_threshold = 50;
  int refactor_interval = 100;
  int max_iterations = 200000;
};

namespace detail {

// Dense tableau over the standard form  min c̃ᵀz, M z = r, z >= 0, r >= 0.
// Column layout: [x⁺ (k) | x⁻ (k) | surplus (m_ineq) | artificial (m)].
template <typename Scalar>
class Tableau {
 public:
  using Matrix = MatrixX<Scalar>;
  using Vector = VectorX<Scalar>;

  Tableau(const LpProblem<Scalar>& lp, const SimplexOptions& opt) : opt_(opt) {
    k_ = lp.num_variables();
    m_eq_ = lp.eq_matrix.rows();
    m_in_ = lp.ineq_matrix.rows();
    m_ = m_eq_ + m_in_;
    n_struct_ = 2 * k_ + m_in_;
    n_ = n_struct_ + m_;

    M_ = Matrix::Zero(m_, n_);
    r_ = Vector::Zero(m_);
    row_sign_ = Vector::Ones(m_);
    if (m_eq_ > 0) {
      M_.block(0, 0, m_eq_, k_) = lp.eq_matrix;
      M_.block(0, k_, m_eq_, k_) = -lp.eq_matrix;
      r_.head(m_eq_) = lp.eq_rhs;
    }
    if (m_in_ > 0) {
      M_.block(m_eq_, 0, m_in_, k_) = lp.ineq_matrix;
      M_.block(m_eq_, k_, m_in_, k_) = -lp.ineq_matrix;
      M_.block(m_eq_, 2 * k_, m_in_, m_in_) = -Matrix::Identity(m_in_, m_in_);
      r_.tail(m_in_) = lp.ineq_rhs;
    }
    for (Index i = 0; i < m_; ++i) {
      if (r_(i) < 0) {
        M_.row(i) *= -1;
        r_(i) = -r_(i);
        row_sign_(i) = -1;
      }
    }
    M_.block(0, n_struct_, m_, m_) = Matrix::Identity(m_, m_);

    phase2_cost_ = Vector::Zero(n_);
    phase2_cost_.head(k_) = lp.cost;
    phase2_cost_.segment(k_, k_) = -lp.cost;

    // A flipped inequality row has a +1 surplus and can start with it basic.
    basis_.resize(m_);
    for (Index i = 0; i < m_; ++i) {
      basis_[i] = n_struct_ + i;
      if (i >= m_eq_ && row_sign_(i) < 0) basis_[i] = 2 * k_ + (i - m_eq_);
    }
    active_row_.assign(m_, true);
    blocked_.assign(n_, false);
    in_basis_.assign(n_, false);
    for (Index j : basis_) in_basis_[j] = true;
    for (Index i = 0; i < m_; ++i)
      if (!in_basis_[n_struct_ + i]) blocked_[n_struct_ + i] = true;
  }

  LpSolution<Scalar> solve() {
    LpSolution<Scalar> out;

    // Phase I: minimise the sum of artificials.
    Vector phase1_cost = Vector::Zero(n_);
    phase1_cost.tail(m_).setOnes();
    refactor(phase1_cost);
    if (run(phase1_cost, /*phase_one=*/true) != LpStatus::Optimal)
      throw std::logic_error("simplex: phase I cannot be unbounded");
    const Scalar infeasibility = objective_value(phase1_cost);
    const Scalar scale = 1 + (m_ > 0 ? r_.cwiseAbs().maxCoeff() : Scalar(0));
    if (infeasibility > opt_.feasibility_tol * scale) {
      out.status = LpStatus::Infeasible;
      out.iterations = iterations_;
      return out;
    }
    drive_out_artificials();
    for (Index j = n_struct_; j < n_; ++j) blocked_[j] = true;

    // Phase II.
    refactor(phase2_cost_);
    const LpStatus status = run(phase2_cost_, /*phase_one=*/false);
    out.iterations = iterations_;
    if (status == LpStatus::Unbounded) {
      out.status = LpStatus::Unbounded;
      return out;
    }
    out.status = LpStatus::Optimal;
    extract(out);
    return out;
  }

 private:
  Scalar objective_value(const Vector& cost) const {
    Scalar v = 0;
    for (Index i = 0; i < m_; ++i)
      if (active_row_[i]) v += cost(basis_[i]) * rhs_(i);
    return v;
  }

  std::vector<Index> active_rows() const {
    std::vector<Index> rows;
    for (Index i = 0; i < m_; ++i)
      if (active_row_[i]) rows.push_back(i);
    return rows;
  }

  // Rebuild T = B⁻¹M, rhs = B⁻¹r and reduced costs from the current basis.
  void refactor(const Vector& cost) {
    const auto rows = active_rows();
    const Index m = static_cast<Index>(rows.size());
    T_ = Matrix::Zero(m_, n_);
    rhs_ = Vector::Zero(m_);
    if (m > 0) {
      Matrix basis_matrix(m, m);
      Matrix M_active(m, n_);
      Vector r_active(m);
      for (Index a = 0; a < m; ++a) {
        M_active.row(a) = M_.row(rows[a]);
        r_active(a) = r_(rows[a]);
      }
      for (Index a = 0; a < m; ++a) basis_matrix.col(a) = M_active.col(basis_[rows[a]]);
      Eigen::PartialPivLU<Matrix> lu(basis_matrix);
      const Matrix T_active = lu.solve(M_active);
      const Vector rhs_active = lu.solve(r_active);
      for (Index a = 0; a < m; ++a) {
        T_.row(rows[a]) = T_active.row(a);
        rhs_(rows[a]) = std::max(Scalar(0), rhs_active(a));
      }
    }
    reduced_ = cost;
    for (Index i : rows) reduced_ -= cost(basis_[i]) * T_.row(i).transpose();
    since_refactor_ = 0;
  }

  Index choose_entering(bool bland) const {
    Index best = -1;
    Scalar best_value = -opt_.optimality_tol;
    for (Index j = 0; j < n_; ++j) {
      if (blocked_[j] || is_basic(j)) continue;
      if (reduced_(j) < best_value) {
        best = j;
        if (bland) return j;
        best_value = reduced_(j);
      }
    }
    return best;
  }

  Index choose_leaving(Index col) const {
    Index best = -1;
    Scalar best_ratio = std::numeric_limits<Scalar>::infinity();
    for (Index i = 0; i < m_; ++i) {
      if (!active_row_[i]) continue;
      const Scalar a = T_(i, col);
      if (a <= opt_.pivot_tol) continue;
      const Scalar ratio = rhs_(i) / a;
      const Scalar tie = Scalar(1e-12) * (1 + std::abs(best_ratio));
      if (best < 0 || ratio < best_ratio - tie ||
          (ratio <= best_ratio + tie && basis_[i] < basis_[best])) {
        best = i;
        best_ratio = std::min(best_ratio, ratio);
      }
    }
    return best;
  }

  void pivot(Index row, Index col) {
    const Scalar p = T_(row, col);
    T_.row(row) /= p;
    rhs_(row) /= p;
    for (Index i = 0; i < m_; ++i) {
      if (i == row || !active_row_[i]) continue;
      const Scalar f = T_(i, col);
      if (f == Scalar(0)) continue;
      T_.row(i) -= f * T_.row(row);
      rhs_(i) = std::max(Scalar(0), rhs_(i) - f * rhs_(row));
    }
    reduced_ -= reduced_(col) * T_.row(row).transpose();
    in_basis_[basis_[row]] = false;
    in_basis_[col] = true;
    basis_[row] = col;
    ++iterations_;
    ++since_refactor_;
  }

  bool is_basic(Index j) const { return in_basis_[j]; }

  LpStatus run(const Vector& cost, bool phase_one) {
    bool bland = false;
    int stall = 0;
    for (;;) {
      if (iterations_ > opt_.max_iterations)
        throw std::runtime_error("simplex: iteration limit exceeded");
      if (since_refactor_ >= opt_.refactor_interval) refactor(cost);

      Index col = choose_entering(bland);
      if (col < 0) {
        // Confirm optimality on a freshly factored tableau.
        refactor(cost);
        col = choose_entering(bland);
        if (col < 0) return LpStatus::Optimal;
      }
      const Index row = choose_leaving(col);
      if (row < 0) {
        if (phase_one) throw std::logic_error("simplex: unbounded phase I");
        return LpStatus::Unbounded;
      }
      const bool degenerate_step = rhs_(row) <= opt_.pivot_tol;
      stall = degenerate_step ? stall + 1 : 0;
      if (stall > opt_.stall_threshold) bland = true;
      if (phase_one && basis_[row] >= n_struct_) blocked_[basis_[row]] = true;
      pivot(row, col);
    }
  }

  void drive_out_artificials() {
    for (Index i = 0; i < m_; ++i) {
      if (!active_row_[i] || basis_[i] < n_struct_) continue;
      Index col = -1;
      Scalar best = opt_.pivot_tol * 1e3;
      for (Index j = 0; j < n_struct_; ++j) {
        if (is_basic(j)) continue;
        if (std::abs(T_(i, j)) > best) {
          best = std::abs(T_(i, j));
          col = j;
        }
      }
      if (col >= 0) {
        pivot(i, col);
      } else {
        // Redundant row: its dual is fixed at zero.
        active_row_[i] = false;
      }
    }
  }

  void extract(LpSolution<Scalar>& out) const {
    const auto rows = active_rows();
    const Index m = static_cast<Index>(rows.size());
    Vector z = Vector::Zero(n_);
    Vector y = Vector::Zero(m_);
    if (m > 0) {
      Matrix basis_matrix(m, m);
      Vector r_active(m), c_basic(m);
      for (Index a = 0; a < m; ++a) {
        for (Index b = 0; b < m; ++b) basis_matrix(a, b) = M_(rows[a], basis_[rows[b]]);
        r_active(a) = r_(rows[a]);
        c_basic(a) = phase2_cost_(basis_[rows[a]]);
      }
      Eigen::PartialPivLU<Matrix> lu(basis_matrix);
      const Vector zb = lu.solve(r_active);
      const Vector yb = lu.transpose().solve(c_basic);
      for (Index a = 0; a < m; ++a) {
        z(basis_[rows[a]]) = zb(a);
        y(rows[a]) = yb(a) * row_sign_(rows[a]);
      }
    }
    out.primal = z.head(k_) - z.segment(k_, k_);
    out.objective = phase2_cost_.head(k_).dot(out.primal);
    out.eq_duals = y.head(m_eq_);
    out.ineq_duals = y.tail(m_in_);
    out.degenerate = false;
    for (Index i : rows) {
      const Index j = basis_[i];
      if (j >= 2 * k_ && std::abs(z(j)) <= Scalar(1e-9)) out.degenerate = true;
    }
  }

  SimplexOptions opt_;
  Index k_ = 0, m_eq_ = 0, m_in_ = 0, m_ = 0, n_struct_ = 0, n_ = 0;
  Matrix M_;
  Vector r_, row_sign_, phase2_cost_;
  Matrix T_;
  Vector rhs_, reduced_;
  std::vector<Index> basis_;
  std::vector<bool> active_row_;
  std::vector<bool> blocked_;
  std::vector<bool> in_basis_;
  int iterations_ = 0;
  int since_refactor_ = 0;
};

}  // namespace detail

/**
 * Solves an LpProblem with a two-phase dense primal simplex.
 *
 * Entering columns follow Dantzig's rule with lowest-index tie-breaking and
 * switch to Bland's rule after `stall_threshold` consecutive degenerate
 * pivots. The returned primal and duals are recomputed from the final basis
 * with a fresh LU factorisation.
 */
template <typename Scalar>
LpSolution<Scalar> solve_lp(const LpProblem<Scalar>& lp, const SimplexOptions& opt = {}) {
  lp.validate();
  detail::Tableau<Scalar> tableau(lp, opt);
  return tableau.solve();
}

}  // namespace lmpc
