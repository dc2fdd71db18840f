#include "linefix/matching.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace linefix {

void MatchCostConfig::validate() const {
  for (double w : {lambda_cls, lambda_box, lambda_l1, lambda_iou, focal_gamma})
    if (!std::isfinite(w) || w < 0.0)
      throw std::invalid_argument("match cost weights must be finite and >= 0");
  if (!(focal_alpha > 0.0 && focal_alpha < 1.0))
    throw std::invalid_argument("focal_alpha must lie in (0, 1)");
}

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols,
                       std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols)
    throw std::invalid_argument("cost matrix data size mismatch");
}

double focal_cls_cost(double prob_of_gt_class, const MatchCostConfig& cfg) {
  if (!(prob_of_gt_class >= 0.0 && prob_of_gt_class <= 1.0))
    throw std::invalid_argument("probability outside [0,1]");
  const double p = std::max(prob_of_gt_class, 1e-12);
  return -cfg.focal_alpha * std::pow(1.0 - p, cfg.focal_gamma) * std::log(p);
}

double box_cost(const BoundingBox& b, const BoundingBox& b_hat,
                const MatchCostConfig& cfg) {
  return cfg.lambda_l1 * l1_box(b, b_hat) +
         cfg.lambda_iou * (1.0 - giou(b, b_hat));
}

namespace {

double class_prob(const Detection& query, ClassIndex cls) {
  if (!query.class_probs)
    throw std::invalid_argument("query has no class-probability vector");
  if (cls >= query.class_probs->size())
    throw std::invalid_argument(fmt::format("class {} out of range", cls));
  return (*query.class_probs)[cls];
}

}  // namespace

double pair_cost(const Detection& query, const GroundTruthChar& gt,
                 const MatchCostConfig& cfg) {
  return cfg.lambda_cls * focal_cls_cost(class_prob(query, gt.class_index), cfg) +
         cfg.lambda_box * box_cost(gt.box, query.box, cfg);
}

double no_object_cost(const Detection& query, ClassIndex no_object_index,
                      const MatchCostConfig& cfg) {
  return cfg.lambda_cls *
         focal_cls_cost(class_prob(query, no_object_index), cfg);
}

CostMatrix cost_matrix(std::span<const Detection> queries,
                       std::span<const GroundTruthChar> gts,
                       const MatchCostConfig& cfg) {
  CostMatrix m(queries.size(), gts.size());
  for (std::size_t q = 0; q < queries.size(); ++q)
    for (std::size_t n = 0; n < gts.size(); ++n)
      m(q, n) = pair_cost(queries[q], gts[n], cfg);
  return m;
}

namespace {

void check_assignable(const CostMatrix& costs) {
  if (costs.rows() < costs.cols())
    throw std::invalid_argument(fmt::format(
        "need at least as many queries ({}) as ground truths ({})",
        costs.rows(), costs.cols()));
  for (std::size_t r = 0; r < costs.rows(); ++r)
    for (std::size_t c = 0; c < costs.cols(); ++c)
      if (!std::isfinite(costs(r, c)))
        throw std::invalid_argument("cost matrix has non-finite entries");
}

Assignment finish(std::vector<std::size_t> query_of_gt, std::size_t n_queries) {
  Assignment out;
  std::vector<bool> used(n_queries, false);
  for (std::size_t n = 0; n < query_of_gt.size(); ++n) {
    out.pairs.emplace_back(query_of_gt[n], n);
    used[query_of_gt[n]] = true;
  }
  for (std::size_t q = 0; q < n_queries; ++q)
    if (!used[q]) out.unmatched_queries.push_back(q);
  return out;
}

}  // namespace

// Shortest augmenting path with potentials; ground truths are the rows of
// the internal problem, queries the columns. Columns are scanned in
// ascending order with strict comparisons, so ties resolve to the lowest
// query index.
Assignment hungarian_assign(const CostMatrix& costs) {
  check_assignable(costs);
  const std::size_t n = costs.cols();
  const std::size_t m = costs.rows();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const auto a = [&](std::size_t i, std::size_t j) { return costs(j - 1, i - 1); };

  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
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
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> query_of_gt(n, 0);
  for (std::size_t j = 1; j <= m; ++j)
    if (p[j] != 0) query_of_gt[p[j] - 1] = j - 1;
  return finish(std::move(query_of_gt), m);
}

Assignment brute_force_assign(const CostMatrix& costs) {
  check_assignable(costs);
  if (costs.cols() > 8)
    throw std::invalid_argument("brute_force_assign supports at most 8 ground truths");
  const std::size_t n = costs.cols();
  std::vector<std::size_t> current(n), best(n);
  std::vector<bool> used(costs.rows(), false);
  double best_cost = std::numeric_limits<double>::infinity();

  const auto search = [&](auto&& self, std::size_t gt, double acc) -> void {
    if (gt == n) {
      if (acc < best_cost) {
        best_cost = acc;
        best = current;
      }
      return;
    }
    for (std::size_t q = 0; q < costs.rows(); ++q) {
      if (used[q]) continue;
      used[q] = true;
      current[gt] = q;
      self(self, gt + 1, acc + costs(q, gt));
      used[q] = false;
    }
  };
  search(search, 0, 0.0);
  return finish(std::move(best), costs.rows());
}

double assignment_cost(const CostMatrix& costs, const Assignment& assignment) {
  double total = 0.0;
  for (const auto& [q, n] : assignment.pairs) total += costs(q, n);
  return total;
}

double set_loss(std::span<const Detection> queries,
                std::span<const GroundTruthChar> gts,
                const Assignment& assignment, ClassIndex no_object_index,
                const MatchCostConfig& cfg) {
  double total = 0.0;
  for (const auto& [q, n] : assignment.pairs) {
    if (q >= queries.size() || n >= gts.size())
      throw std::invalid_argument("assignment index out of range");
    total += pair_cost(queries[q], gts[n], cfg);
  }
  for (std::size_t q : assignment.unmatched_queries) {
    if (q >= queries.size())
      throw std::invalid_argument("assignment index out of range");
    total += no_object_cost(queries[q], no_object_index, cfg);
  }
  return total / static_cast<double>(std::max<std::size_t>(1, gts.size()));
}

}  // namespace linefix
