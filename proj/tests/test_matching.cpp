#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "linefix/matching.hpp"

using namespace linefix;

namespace {

// Minimum over every ordering of the rows; the first `cols` rows of each
// ordering are the assignment.
double permutation_minimum(const CostMatrix& m) {
  std::vector<std::size_t> rows(m.rows());
  std::iota(rows.begin(), rows.end(), 0);
  double best = INFINITY;
  do {
    double total = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) total += m(rows[c], c);
    best = std::min(best, total);
  } while (std::next_permutation(rows.begin(), rows.end()));
  return best;
}

CostMatrix random_matrix(std::mt19937_64& gen, std::size_t rows, std::size_t cols,
                         bool integer) {
  CostMatrix m(rows, cols);
  std::uniform_real_distribution<double> real(-5.0, 10.0);
  std::uniform_int_distribution<int> small(0, 4);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = integer ? small(gen) : real(gen);
  return m;
}

void expect_valid(const Assignment& a, const CostMatrix& m) {
  ASSERT_EQ(a.pairs.size(), m.cols());
  std::set<std::size_t> used;
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    EXPECT_EQ(a.pairs[i].second, i);
    EXPECT_LT(a.pairs[i].first, m.rows());
    EXPECT_TRUE(used.insert(a.pairs[i].first).second);
  }
  EXPECT_EQ(a.unmatched_queries.size(), m.rows() - m.cols());
  EXPECT_TRUE(std::is_sorted(a.unmatched_queries.begin(), a.unmatched_queries.end()));
  for (auto q : a.unmatched_queries) EXPECT_FALSE(used.count(q));
}

Detection query(std::vector<double> probs, BoundingBox b) {
  const auto best = std::max_element(probs.begin(), probs.end()) - probs.begin();
  const double score = probs[best];
  return Detection{b, static_cast<ClassIndex>(best), score, std::move(probs)};
}

}  // namespace

TEST(Hungarian, MatchesPermutationSearchOnRandomMatrices) {
  std::mt19937_64 gen(5);
  for (int t = 0; t < 600; ++t) {
    const std::size_t cols = 1 + gen() % 6;
    const std::size_t rows = cols + gen() % (7 - cols);
    const CostMatrix m = random_matrix(gen, rows, cols, t % 3 == 0);
    const Assignment a = hungarian_assign(m);
    expect_valid(a, m);
    ASSERT_NEAR(assignment_cost(m, a), permutation_minimum(m), 1e-9) << rows << "x" << cols;
    ASSERT_NEAR(assignment_cost(m, brute_force_assign(m)), permutation_minimum(m), 1e-9);
  }
}

TEST(Hungarian, KnownSquareInstance) {
  CostMatrix m(3, 3, {4, 1, 3, 2, 0, 5, 3, 2, 2});
  const Assignment a = hungarian_assign(m);
  EXPECT_DOUBLE_EQ(assignment_cost(m, a), 5.0);
  expect_valid(a, m);
}

TEST(Hungarian, EmptyGroundTruthLeavesEveryQueryUnmatched) {
  CostMatrix m(3, 0);
  const Assignment a = hungarian_assign(m);
  EXPECT_TRUE(a.pairs.empty());
  EXPECT_EQ(a.unmatched_queries, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Hungarian, RejectsMoreTruthsThanQueriesAndNonFiniteCosts) {
  EXPECT_THROW(hungarian_assign(CostMatrix(2, 3)), std::invalid_argument);
  CostMatrix m(2, 2, 1.0);
  m(0, 1) = NAN;
  EXPECT_THROW(hungarian_assign(m), std::invalid_argument);
}

TEST(MatchCost, FocalAndBoxTerms) {
  const MatchCostConfig cfg;
  const double p = 0.5;
  EXPECT_NEAR(focal_cls_cost(p, cfg), -0.25 * 0.25 * std::log(0.5), 1e-15);
  EXPECT_DOUBLE_EQ(focal_cls_cost(1.0, cfg), 0.0);
  EXPECT_TRUE(std::isfinite(focal_cls_cost(0.0, cfg)));
  EXPECT_GT(focal_cls_cost(0.1, cfg), focal_cls_cost(0.9, cfg));

  const BoundingBox a = BoundingBox::from_corners(0.3, 0.3, 0.7, 0.7);
  const BoundingBox b = BoundingBox::from_corners(0.4, 0.3, 0.8, 0.7);
  // |b - b_hat|_1 = 0.1 on cx only; GIoU = IoU = 0.6 since the hull is the union.
  EXPECT_NEAR(box_cost(a, b, cfg), 5.0 * 0.1 + 2.0 * 0.4, 1e-12);
  EXPECT_NEAR(box_cost(a, a, cfg), 0.0, 1e-15);

  MatchCostConfig bad;
  bad.focal_alpha = 1.5;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(MatchCost, PairCostAndSetLoss) {
  const MatchCostConfig cfg;
  const BoundingBox b(0.5, 0.5, 0.2, 0.5);
  const Detection good = query({0.8, 0.1, 0.1}, b);
  const Detection bad = query({0.1, 0.1, 0.8}, b);
  const GroundTruthChar gt{0, b};
  EXPECT_NEAR(pair_cost(good, gt, cfg), 2.0 * focal_cls_cost(0.8, cfg), 1e-12);
  EXPECT_NEAR(no_object_cost(bad, 2, cfg), 2.0 * focal_cls_cost(0.8, cfg), 1e-12);

  std::vector<Detection> qs{bad, good};
  std::vector<GroundTruthChar> gts{gt};
  const CostMatrix m = cost_matrix(qs, gts, cfg);
  const Assignment a = hungarian_assign(m);
  ASSERT_EQ(a.pairs.size(), 1u);
  EXPECT_EQ(a.pairs[0].first, 1u);
  EXPECT_NEAR(set_loss(qs, gts, a, 2, cfg),
              pair_cost(good, gt, cfg) + no_object_cost(bad, 2, cfg), 1e-12);

  Detection bare{b, 0, 0.9, std::nullopt};
  EXPECT_THROW(pair_cost(bare, gt, cfg), std::invalid_argument);
}
