#include "lp_oracle.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace mtd::testing {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-10;

struct Tableau {
  Eigen::MatrixXd t;  // rows x (cols + 1), last column is the right-hand side
  std::vector<int> basis;
  Eigen::VectorXd reduced;
  int cols = 0;

  double& rhs(int i) { return t(i, cols); }

  void pivot(int r, int q) {
    t.row(r) /= t(r, q);
    for (int i = 0; i < t.rows(); ++i) {
      if (i != r && t(i, q) != 0.0) t.row(i) -= t(i, q) * t.row(r);
    }
    if (reduced[q] != 0.0) reduced -= reduced[q] * t.row(r).head(cols).transpose();
    basis[r] = q;
  }

  void price(const Eigen::VectorXd& cost) {
    reduced = cost;
    for (int i = 0; i < t.rows(); ++i) {
      const double cb = cost[basis[i]];
      if (cb != 0.0) reduced -= cb * t.row(i).head(cols).transpose();
    }
  }

  // Returns false when the objective is unbounded along the entering column.
  bool run(int allowed_cols, int max_pivots, int& pivots, bool& limit) {
    int degenerate = 0;
    std::vector<bool> in_basis(cols, false);
    for (int bcol : basis) in_basis[bcol] = true;
    while (true) {
      const bool bland = degenerate > 50;
      int q = -1;
      double best = -kCostTol;
      for (int j = 0; j < allowed_cols; ++j) {
        if (in_basis[j] || reduced[j] >= -kCostTol) continue;
        if (bland) {
          q = j;
          break;
        }
        if (reduced[j] < best) {
          best = reduced[j];
          q = j;
        }
      }
      if (q < 0) return true;
      int r = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < t.rows(); ++i) {
        const double a = t(i, q);
        if (a <= kPivotTol) continue;
        const double value = std::max(0.0, rhs(i)) / a;
        const bool tie = r >= 0 && std::abs(value - ratio) <= 1e-12 * (1.0 + ratio);
        if (value < ratio && !tie) {
          ratio = value;
          r = i;
        } else if (tie) {
          const bool better = bland ? basis[i] < basis[r] : a > t(r, q);
          if (better) r = i;
        }
      }
      if (r < 0) return false;
      degenerate = ratio <= 1e-12 ? degenerate + 1 : 0;
      in_basis[basis[r]] = false;
      pivot(r, q);
      in_basis[q] = true;
      if (++pivots >= max_pivots) {
        limit = true;
        return true;
      }
    }
  }
};

}  // namespace

OracleResult solve_dense_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                            const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, int max_pivots) {
  const int n = static_cast<int>(c.size());
  const int m = static_cast<int>(a.rows());
  std::vector<int> bounded;
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(upper[j])) bounded.push_back(j);
  }
  const int nu = static_cast<int>(bounded.size());
  const int rows = m + nu;
  const int structural = n + m + nu;  // u | surplus | upper slack
  const int cols = structural + rows;

  // Standard form over z = [u, s, t, artificial] with x = lower + u.
  Eigen::MatrixXd std_a = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::VectorXd std_b(rows);
  std_a.block(0, 0, m, n) = a;
  std_a.block(0, n, m, m) = -Eigen::MatrixXd::Identity(m, m);
  std_b.head(m) = b - a * lower;
  for (int k = 0; k < nu; ++k) {
    std_a(m + k, bounded[k]) = 1.0;
    std_a(m + k, n + m + k) = 1.0;
    std_b[m + k] = upper[bounded[k]] - lower[bounded[k]];
  }
  for (int i = 0; i < rows; ++i) {
    if (std_b[i] < 0.0) {
      std_a.row(i) *= -1.0;
      std_b[i] = -std_b[i];
    }
    std_a(i, structural + i) = 1.0;
  }

  Tableau tab;
  tab.cols = cols;
  tab.t.resize(rows, cols + 1);
  tab.t.leftCols(cols) = std_a;
  tab.t.col(cols) = std_b;
  tab.basis.resize(rows);
  for (int i = 0; i < rows; ++i) tab.basis[i] = structural + i;

  OracleResult result;
  bool limit = false;

  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(cols);
  phase1.tail(rows).setOnes();
  tab.price(phase1);
  tab.run(cols, max_pivots, result.pivots, limit);
  if (limit) return result;
  double infeasibility = 0.0;
  for (int i = 0; i < rows; ++i) {
    if (tab.basis[i] >= structural) infeasibility += std::max(0.0, tab.rhs(i));
  }
  if (infeasibility > 1e-7 * (1.0 + std_b.lpNorm<Eigen::Infinity>())) {
    result.status = OracleStatus::kInfeasible;
    return result;
  }
  for (int i = 0; i < rows; ++i) {
    if (tab.basis[i] < structural) continue;
    int q = -1;
    for (int j = 0; j < structural && q < 0; ++j) {
      if (std::abs(tab.t(i, j)) > 1e-7) q = j;
    }
    if (q >= 0) tab.pivot(i, q);
  }

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(cols);
  phase2.head(n) = c;
  tab.price(phase2);
  if (!tab.run(structural, max_pivots, result.pivots, limit)) {
    result.status = OracleStatus::kUnbounded;
    return result;
  }
  if (limit) return result;

  // Refine on the final basis with the original data.
  Eigen::MatrixXd basis_matrix(rows, rows);
  Eigen::VectorXd basis_cost(rows);
  for (int i = 0; i < rows; ++i) {
    basis_matrix.col(i) = std_a.col(tab.basis[i]);
    basis_cost[i] = phase2[tab.basis[i]];
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix);
  const Eigen::VectorXd z_basic = lu.solve(std_b);
  const Eigen::VectorXd duals = lu.transpose().solve(basis_cost);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(cols);
  for (int i = 0; i < rows; ++i) z[tab.basis[i]] = z_basic[i];
  const Eigen::VectorXd reduced = phase2 - std_a.transpose() * duals;
  result.worst_reduced_cost = reduced.head(structural).minCoeff();
  result.worst_basic_value = z_basic.minCoeff();
  result.x = lower + z.head(n);
  result.objective = c.dot(result.x);
  result.status = OracleStatus::kOptimal;
  return result;
}

double brute_force_vertex_minimum(const Eigen::VectorXd& c, const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                  const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  const int n = static_cast<int>(c.size());
  // Every constraint as g'x >= h.
  std::vector<Eigen::VectorXd> g;
  std::vector<double> h;
  for (int i = 0; i < a.rows(); ++i) {
    g.push_back(a.row(i).transpose());
    h.push_back(b[i]);
  }
  for (int j = 0; j < n; ++j) {
    g.push_back(Eigen::VectorXd::Unit(n, j));
    h.push_back(lower[j]);
    if (std::isfinite(upper[j])) {
      g.push_back(-Eigen::VectorXd::Unit(n, j));
      h.push_back(-upper[j]);
    }
  }
  const int total = static_cast<int>(g.size());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(n);
  for (int k = 0; k < n; ++k) pick[k] = k;
  Eigen::MatrixXd sys(n, n);
  Eigen::VectorXd rhs(n);
  while (true) {
    for (int k = 0; k < n; ++k) {
      sys.row(k) = g[pick[k]].transpose();
      rhs[k] = h[pick[k]];
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
    if (lu.rank() == n) {
      const Eigen::VectorXd x = lu.solve(rhs);
      bool feasible = true;
      for (int i = 0; i < total && feasible; ++i) {
        feasible = g[i].dot(x) >= h[i] - 1e-9 * (1.0 + std::abs(h[i]));
      }
      if (feasible) best = std::min(best, c.dot(x));
    }
    int k = n - 1;
    while (k >= 0 && pick[k] == total - n + k) --k;
    if (k < 0) break;
    ++pick[k];
    for (int i = k + 1; i < n; ++i) pick[i] = pick[i - 1] + 1;
  }
  return best;
}

OracleResult solve_dense_lp(const BlockLP& lp, int max_pivots) {
  const Eigen::MatrixXd a(lp.full_matrix());
  return solve_dense_lp(lp.cost, a, lp.rhs, lp.lower, lp.upper, max_pivots);
}

}  // namespace mtd::testing
