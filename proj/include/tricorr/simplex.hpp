#pragma once

// Dense phase-1 simplex with Bland's anti-cycling rule, sized for the vertex
// feasibility problems of this project (<= ~100 rows x ~250 columns).
// Solves: find w >= 0 with A w = b, by minimizing the sum of artificial
// variables. b is made nonnegative row-wise before the artificials are added.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace tricorr::lp {

enum class SolveStatus { feasible, infeasible, iteration_limit };

struct FeasibilityResult {
  SolveStatus status = SolveStatus::infeasible;
  std::vector<double> solution;   // w, when feasible
  double objective = 0;           // residual mass left in artificials
  std::size_t iterations = 0;
};

inline FeasibilityResult solve_equality_feasibility(
    const std::vector<std::vector<double>>& A, const std::vector<double>& b,
    double tol = 1e-9, std::size_t max_iterations = 20000) {
  const std::size_t m = A.size();
  const std::size_t n = m ? A[0].size() : 0;
  const std::size_t total = n + m;  // structural + artificial

  // Tableau: m rows x (total + 1); last column is the RHS.
  std::vector<std::vector<double>> t(m, std::vector<double>(total + 1, 0.0));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    double s = b[i] < 0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) t[i][j] = s * A[i][j];
    t[i][n + i] = 1.0;
    t[i][total] = s * b[i];
    basis[i] = n + i;
  }

  // Reduced costs for min sum(artificials): cost row = -(sum of rows), with
  // artificial columns zeroed out by the initial basis.
  std::vector<double> cost(total + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j <= total; ++j) cost[j] -= t[i][j];
  for (std::size_t i = 0; i < m; ++i) cost[n + i] = 0.0;

  FeasibilityResult res;
  for (res.iterations = 0; res.iterations < max_iterations; ++res.iterations) {
    // Bland: entering variable = smallest index with negative reduced cost.
    std::size_t enter = total;
    for (std::size_t j = 0; j < total; ++j)
      if (cost[j] < -tol) {
        enter = j;
        break;
      }
    if (enter == total) break;  // optimal

    // Bland: leaving row = min ratio, ties by smallest basis index.
    std::size_t leave = m;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      if (t[i][enter] > tol) {
        double ratio = t[i][total] / t[i][enter];
        if (ratio < best_ratio - tol ||
            (ratio < best_ratio + tol && (leave == m || basis[i] < basis[leave]))) {
          best_ratio = ratio;
          leave = i;
        }
      }
    }
    if (leave == m) break;  // unbounded; cannot happen for phase 1

    double piv = t[leave][enter];
    for (std::size_t j = 0; j <= total; ++j) t[leave][j] /= piv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == leave) continue;
      double f = t[i][enter];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= total; ++j) t[i][j] -= f * t[leave][j];
    }
    double cf = cost[enter];
    if (cf != 0.0)
      for (std::size_t j = 0; j <= total; ++j) cost[j] -= cf * t[leave][j];
    basis[leave] = enter;
  }

  double obj = 0;
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] >= n) obj += t[i][total];
  res.objective = obj;

  if (res.iterations >= max_iterations) {
    res.status = SolveStatus::iteration_limit;
    return res;
  }
  if (obj > 1e-7) {
    res.status = SolveStatus::infeasible;
    return res;
  }

  res.status = SolveStatus::feasible;
  res.solution.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) res.solution[basis[i]] = std::max(0.0, t[i][total]);
  return res;
}

}  // namespace tricorr::lp
