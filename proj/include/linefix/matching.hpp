#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "linefix/detections.hpp"

namespace linefix {

// Weights of the set-prediction matching cost. Defaults follow the usual
// DETR-family values; all are overridable from the pipeline config.
struct MatchCostConfig {
  double lambda_cls = 2.0;
  double lambda_box = 1.0;
  double lambda_l1 = 5.0;
  double lambda_iou = 2.0;
  double focal_alpha = 0.25;
  double focal_gamma = 2.0;

  void validate() const;
};

// Row-major |rows| x |cols| matrix; rows are queries, columns ground truth.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Assignment {
  // (query_index, gt_index), ordered by gt_index.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  // Ascending.
  std::vector<std::size_t> unmatched_queries;
};

// -alpha * (1-p)^gamma * log(p), with p floored at 1e-12.
double focal_cls_cost(double prob_of_gt_class, const MatchCostConfig& cfg);

// lambda_l1 * |b - b_hat|_1 + lambda_iou * (1 - GIoU(b, b_hat)).
double box_cost(const BoundingBox& b, const BoundingBox& b_hat,
                const MatchCostConfig& cfg);

// Cost of pairing a query with a ground-truth character. The query must
// carry its class-probability vector (std::invalid_argument otherwise).
double pair_cost(const Detection& query, const GroundTruthChar& gt,
                 const MatchCostConfig& cfg);
// Cost of pairing a query with the no-object target: classification only.
double no_object_cost(const Detection& query, ClassIndex no_object_index,
                      const MatchCostConfig& cfg);

CostMatrix cost_matrix(std::span<const Detection> queries,
                       std::span<const GroundTruthChar> gts,
                       const MatchCostConfig& cfg);

// Minimum-cost assignment of every column (ground truth) to a distinct row
// (query). Requires rows >= cols and finite entries.
Assignment hungarian_assign(const CostMatrix& costs);

// Exhaustive search over all injections; test oracle for hungarian_assign.
// Requires cols <= 8.
Assignment brute_force_assign(const CostMatrix& costs);

double assignment_cost(const CostMatrix& costs, const Assignment& assignment);

// Matched pair costs plus the no-object classification cost of every
// unmatched query, divided by max(1, |gts|).
double set_loss(std::span<const Detection> queries,
                std::span<const GroundTruthChar> gts,
                const Assignment& assignment, ClassIndex no_object_index,
                const MatchCostConfig& cfg);

}  // namespace linefix
