#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "atmpc/solver.hpp"

namespace atmpc {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::MaxIter: return "max_iter";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-11;
constexpr int kDegenerateSwitch = 50;

// Variable substitution x = offset + map * y with y >= 0.
struct Standardization {
  Vec offset;
  Mat map;
  // Extra rows y_k <= width for doubly bounded variables.
  std::vector<std::pair<int, double>> upper_rows;
};

Standardization standardize_vars(const LPProblem& p) {
  const Eigen::Index n = p.num_vars();
  Standardization s;
  s.offset = Vec::Zero(n);
  std::vector<std::pair<Eigen::Index, double>> cols;  // (original var, sign)
  for (Eigen::Index j = 0; j < n; ++j) {
    const double lo = p.lower.size() ? p.lower(j) : -kInf;
    const double hi = p.upper.size() ? p.upper(j) : kInf;
    if (std::isfinite(lo)) {
      s.offset(j) = lo;
      cols.emplace_back(j, 1.0);
      if (std::isfinite(hi)) s.upper_rows.emplace_back(static_cast<int>(cols.size() - 1), hi - lo);
    } else if (std::isfinite(hi)) {
      s.offset(j) = hi;
      cols.emplace_back(j, -1.0);
    } else {
      cols.emplace_back(j, 1.0);
      cols.emplace_back(j, -1.0);
    }
  }
  s.map = Mat::Zero(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) s.map(cols[k].first, static_cast<Eigen::Index>(k)) = cols[k].second;
  return s;
}

class Simplex {
 public:
  // initial_slack[i] is the slack column basic in row i, or -1 when the row
  // needs an artificial.
  Simplex(const Mat& rows, const Vec& rhs, const std::vector<int>& initial_slack, int num_struct,
          int num_slack)
      : m_(static_cast<int>(rows.rows())), num_struct_(num_struct), num_slack_(num_slack) {
    // Columns: structural | slack | artificial (one per row needing it).
    std::vector<int> art_of_row(m_, -1);
    int num_art = 0;
    for (int i = 0; i < m_; ++i)
      if (initial_slack[i] < 0) art_of_row[i] = num_art++;
    num_art_ = num_art;
    ncols_ = num_struct_ + num_slack_ + num_art_;
    T_ = Mat::Zero(m_ + 1, ncols_ + 1);
    T_.block(0, 0, m_, num_struct_ + num_slack_) = rows;
    T_.block(0, ncols_, m_, 1) = rhs;
    basis_.assign(m_, -1);
    identity_col_.assign(m_, -1);
    for (int i = 0; i < m_; ++i) {
      if (art_of_row[i] >= 0) {
        const int c = num_struct_ + num_slack_ + art_of_row[i];
        T_(i, c) = 1.0;
        basis_[i] = c;
      } else {
        basis_[i] = initial_slack[i];
      }
      identity_col_[i] = basis_[i];
    }
  }

  SolveStatus phase1(int& budget) {
    if (num_art_ == 0) return SolveStatus::Optimal;
    T_.row(m_).setZero();
    for (int c = num_struct_ + num_slack_; c < ncols_; ++c) T_(m_, c) = 1.0;
    for (int i = 0; i < m_; ++i)
      if (is_artificial(basis_[i])) T_.row(m_) -= T_.row(i);
    const SolveStatus st = iterate(budget, /*allow_art=*/true);
    if (st == SolveStatus::MaxIter) return st;
    const double scale = 1.0 + T_.col(ncols_).head(m_).cwiseAbs().maxCoeff();
    if (-T_(m_, ncols_) > 1e-9 * scale) return SolveStatus::Infeasible;
    // Drive remaining artificials out of the basis where possible.
    for (int i = 0; i < m_; ++i) {
      if (!is_artificial(basis_[i])) continue;
      int best = -1;
      double best_abs = 1e-9;
      for (int c = 0; c < num_struct_ + num_slack_; ++c) {
        if (std::abs(T_(i, c)) > best_abs) {
          best_abs = std::abs(T_(i, c));
          best = c;
        }
      }
      if (best >= 0) pivot(i, best);
    }
    return SolveStatus::Optimal;
  }

  SolveStatus phase2(const Vec& cost, int& budget) {
    T_.row(m_).setZero();
    for (int c = 0; c < num_struct_; ++c) T_(m_, c) = cost(c);
    for (int i = 0; i < m_; ++i) {
      const int b = basis_[i];
      if (b < num_struct_ && cost(b) != 0.0) T_.row(m_) -= cost(b) * T_.row(i);
    }
    return iterate(budget, /*allow_art=*/false);
  }

  Vec structural_solution() const {
    Vec y = Vec::Zero(num_struct_);
    for (int i = 0; i < m_; ++i)
      if (basis_[i] < num_struct_) y(basis_[i]) = T_(i, ncols_);
    return y;
  }

  // Multiplier of each standardized row (y = B^{-T} c_B).
  Vec row_multipliers() const {
    Vec y(m_);
    for (int i = 0; i < m_; ++i) y(i) = -T_(m_, identity_col_[i]);
    return y;
  }

  double dual_infeasibility() const {
    double worst = 0.0;
    for (int c = 0; c < num_struct_ + num_slack_; ++c) worst = std::max(worst, -T_(m_, c));
    return worst;
  }

  int pivots() const { return pivots_; }

 private:
  bool is_artificial(int c) const { return c >= num_struct_ + num_slack_; }

  void pivot(int r, int c) {
    T_.row(r) /= T_(r, c);
    for (int i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = T_(i, c);
      if (f != 0.0) T_.row(i) -= f * T_.row(r);
    }
    basis_[r] = c;
    ++pivots_;
  }

  SolveStatus iterate(int& budget, bool allow_art) {
    const int limit = allow_art ? ncols_ : num_struct_ + num_slack_;
    const double cost_scale = 1.0 + T_.row(m_).head(limit).cwiseAbs().maxCoeff();
    const double opt_tol = 1e-11 * cost_scale;
    int degenerate_run = 0;
    bool bland = false;
    while (true) {
      int enter = -1;
      double most_negative = -opt_tol;
      for (int c = 0; c < limit; ++c) {
        if (T_(m_, c) < most_negative) {
          enter = c;
          if (bland) break;
          most_negative = T_(m_, c);
        }
      }
      if (enter < 0) return SolveStatus::Optimal;
      if (budget-- <= 0) return SolveStatus::MaxIter;
      int leave = -1;
      double best_ratio = kInf;
      for (int i = 0; i < m_; ++i) {
        const double a = T_(i, enter);
        if (a <= kPivotTol) continue;
        const double ratio = T_(i, ncols_) / a;
        if (ratio < best_ratio - 1e-14 ||
            (std::abs(ratio - best_ratio) <= 1e-14 && leave >= 0 && basis_[i] < basis_[leave])) {
          best_ratio = ratio;
          leave = i;
        }
      }
      if (leave < 0) return SolveStatus::Unbounded;
      if (best_ratio <= 1e-12) {
        if (++degenerate_run > kDegenerateSwitch) bland = true;
      } else {
        degenerate_run = 0;
      }
      pivot(leave, enter);
    }
  }

  int m_;
  int num_struct_;
  int num_slack_;
  int num_art_ = 0;
  int ncols_ = 0;
  Mat T_;
  std::vector<int> basis_;
  std::vector<int> identity_col_;
  int pivots_ = 0;
};

}  // namespace

SolveOutcome solve_lp(const LPProblem& p, int max_iterations) {
  const Eigen::Index n = p.num_vars();
  const Eigen::Index m_in = p.A_ineq.rows();
  const Eigen::Index m_eq = p.A_eq.rows();
  if ((m_in && p.A_ineq.cols() != n) || (m_eq && p.A_eq.cols() != n) || p.b_ineq.size() != m_in ||
      p.b_eq.size() != m_eq || (p.lower.size() && p.lower.size() != n) ||
      (p.upper.size() && p.upper.size() != n)) {
    throw SolverError(SolverError::Kind::DimensionMismatch, "solve_lp: inconsistent problem dimensions");
  }

  SolveOutcome out;
  if (p.lower.size() && p.upper.size() && (p.lower.array() > p.upper.array()).any()) {
    out.status = SolveStatus::Infeasible;
    return out;
  }

  const Standardization st = standardize_vars(p);
  const int ny = static_cast<int>(st.map.cols());
  const int m_ub = static_cast<int>(st.upper_rows.size());
  const int m_slack = static_cast<int>(m_in) + m_ub;
  const int m = m_slack + static_cast<int>(m_eq);

  Mat rows = Mat::Zero(m, ny + m_slack);
  Vec rhs(m);
  if (m_in) {
    rows.block(0, 0, m_in, ny) = p.A_ineq * st.map;
    rhs.head(m_in) = p.b_ineq - p.A_ineq * st.offset;
  }
  for (int k = 0; k < m_ub; ++k) {
    rows(m_in + k, st.upper_rows[k].first) = 1.0;
    rhs(m_in + k) = st.upper_rows[k].second;
  }
  for (int i = 0; i < m_slack; ++i) rows(i, ny + i) = 1.0;
  if (m_eq) {
    rows.block(m_slack, 0, m_eq, ny) = p.A_eq * st.map;
    rhs.tail(m_eq) = p.b_eq - p.A_eq * st.offset;
  }

  std::vector<double> sigma(m, 1.0);
  std::vector<int> identity(m, -1);
  for (int i = 0; i < m; ++i) {
    if (rhs(i) < 0.0) {
      sigma[i] = -1.0;
      rows.row(i) *= -1.0;
      rhs(i) = -rhs(i);
    }
    identity[i] = (i < m_slack && sigma[i] > 0.0) ? ny + i : -1;
  }
  Simplex simplex(rows, rhs, identity, ny, m_slack);

  int budget = max_iterations;
  SolveStatus s1 = simplex.phase1(budget);
  if (s1 != SolveStatus::Optimal) {
    out.status = s1;
    out.iterations = simplex.pivots();
    return out;
  }
  Vec cost_y = st.map.transpose() * p.cost;
  SolveStatus s2 = simplex.phase2(cost_y, budget);
  out.iterations = simplex.pivots();
  if (s2 != SolveStatus::Optimal) {
    out.status = s2;
    return out;
  }

  const Vec y = simplex.structural_solution();
  out.x = st.offset + st.map * y;
  out.objective = p.cost.dot(out.x);
  out.status = SolveStatus::Optimal;

  const Vec mult = simplex.row_multipliers();
  out.dual_ineq = Vec::Zero(m_in);
  out.dual_eq = Vec::Zero(m_eq);
  for (Eigen::Index i = 0; i < m_in; ++i) out.dual_ineq(i) = -sigma[i] * mult(i);
  for (Eigen::Index i = 0; i < m_eq; ++i) out.dual_eq(i) = -sigma[m_slack + i] * mult(m_slack + i);

  double primal = 0.0;
  double bscale = 1.0;
  if (m_in) {
    primal = std::max(primal, (p.A_ineq * out.x - p.b_ineq).maxCoeff());
    bscale = std::max(bscale, p.b_ineq.cwiseAbs().maxCoeff());
  }
  if (m_eq) {
    primal = std::max(primal, (p.A_eq * out.x - p.b_eq).cwiseAbs().maxCoeff());
    bscale = std::max(bscale, p.b_eq.cwiseAbs().maxCoeff());
  }
  if (p.lower.size()) primal = std::max(primal, (p.lower - out.x).maxCoeff());
  if (p.upper.size()) primal = std::max(primal, (out.x - p.upper).maxCoeff());
  const double cscale = 1.0 + (p.cost.size() ? p.cost.cwiseAbs().maxCoeff() : 0.0);
  out.kkt_residual = std::max(std::max(primal, 0.0) / bscale, simplex.dual_infeasibility() / cscale);
  return out;
}

}  // namespace atmpc
