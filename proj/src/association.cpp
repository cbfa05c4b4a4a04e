#include "mint/association.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mint {

namespace {

// Hungarian algorithm with potentials for a rectangular cost matrix,
// rows <= cols. Returns col index per row. Ties resolve to the lowest column
// index (strict < scans).
std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  if (n == 0) return {};
  const int m = static_cast<int>(cost[0].size());
  const double inf = std::numeric_limits<double>::infinity();

  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = -1;
      double delta = inf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

double cutoff_metric(double d, double z, double dc) {
  if (dc <= 0.0) throw std::invalid_argument("cutoff_metric: dc <= 0");
  return std::min(std::abs(d - z), dc);
}

Correspondences assign(const AssociationProblem& problem) {
  const auto k_exp = problem.expected.size();
  const auto k_meas = problem.measured.size();
  const double dc = problem.cutoff;
  if (dc <= 0.0) throw std::invalid_argument("assign: cutoff <= 0");

  Correspondences out;
  if (k_exp == 0) {
    for (std::size_t j = 0; j < k_meas; ++j) out.clutter.push_back(static_cast<int>(j));
    return out;
  }

  // Columns beyond the real measurements are dummy clutter at cost dc.
  const std::size_t cols = std::max(k_exp, k_meas);
  std::vector<std::vector<double>> cost(k_exp, std::vector<double>(cols, dc));
  for (std::size_t i = 0; i < k_exp; ++i)
    for (std::size_t j = 0; j < k_meas; ++j)
      cost[i][j] = cutoff_metric(problem.expected[i].second, problem.measured[j], dc);

  auto row_to_col = solve_assignment(cost);

  std::vector<char> taken(k_meas, 0);
  for (std::size_t i = 0; i < k_exp; ++i) {
    int j = row_to_col[i];
    if (j < 0 || static_cast<std::size_t>(j) >= k_meas) continue;  // dummy
    if (cost[i][j] >= dc - 1e-12) continue;  // rejected at the cutoff
    out.assignments.emplace_back(j, problem.expected[i].first);
    taken[j] = 1;
  }
  std::sort(out.assignments.begin(), out.assignments.end());
  for (std::size_t j = 0; j < k_meas; ++j)
    if (!taken[j]) out.clutter.push_back(static_cast<int>(j));
  return out;
}

Correspondences associate_at(const Point2D& position,
                             const std::vector<VirtualAnchor>& vas,
                             const FloorPlan& plan,
                             const std::vector<double>& measured, double cutoff) {
  FloorPlan known = plan.without_obstructions();
  VisibleSet vs = expected_visible_set(position, -1, vas, known);

  AssociationProblem problem;
  problem.measured = measured;
  problem.cutoff = cutoff;
  problem.expected.reserve(vs.vas.size());
  for (std::size_t j = 0; j < vs.vas.size(); ++j)
    problem.expected.emplace_back(vs.vas[j].id, vs.distances[j]);
  return assign(problem);
}

}  // namespace mint
