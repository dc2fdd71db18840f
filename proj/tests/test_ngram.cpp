#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "linefix/ngram.hpp"

using namespace linefix;

namespace {

std::vector<std::vector<Symbol>> random_corpus(std::mt19937_64& gen, std::size_t symbols) {
  std::vector<std::vector<Symbol>> out(30);
  for (auto& s : out) {
    s.resize(gen() % 12);
    for (auto& x : s) x = static_cast<Symbol>(gen() % symbols);
  }
  return out;
}

}  // namespace

TEST(NGram, BigramWittenBellByHand) {
  // "ab ab ab" with a=0, b=1, space=2.
  const std::vector<Symbol> seq{0, 1, 2, 0, 1, 2, 0, 1};
  const NGramModel lm = NGramModel::train({seq}, 2, 3, 0.1);
  // Unigram counts per outcome a, b, space, EOS: 3, 3, 2, 1.
  const double uni_b = (3 + 0.1) / (9 + 4 * 0.1);
  // Context "a": 3 tokens, 1 distinct follower.
  const double expected = (3 + 1 * uni_b) / (3 + 1);
  const auto ctx = lm.advance(lm.start(), 0);
  EXPECT_NEAR(std::exp(lm.log_prob(ctx, 1)), expected, 1e-12);

  // Context "b": followers space x2 and EOS x1, two distinct types.
  const double uni_space = (2 + 0.1) / 9.4;
  const auto after_b = lm.advance(ctx, 1);
  EXPECT_NEAR(std::exp(lm.log_prob(after_b, 2)), (2 + 2 * uni_space) / (3 + 2), 1e-12);
}

TEST(NGram, UnigramIsAddK) {
  const NGramModel lm = NGramModel::train({{0, 0, 1}}, 1, 3, 0.5);
  EXPECT_NEAR(std::exp(lm.log_prob(lm.start(), 2)), 0.5 / (4 + 4 * 0.5), 1e-12);
  EXPECT_NEAR(std::exp(lm.log_prob(lm.start(), 0)), 2.5 / 6.0, 1e-12);
}

TEST(NGram, EveryConditionalSumsToOne) {
  std::mt19937_64 gen(12);
  for (int order = 1; order <= NGramModel::kMaxOrder; ++order) {
    const NGramModel lm = NGramModel::train(random_corpus(gen, 6), order, 6, 0.1);
    std::vector<double> dist;
    for (int t = 0; t < 50; ++t) {
      auto ctx = lm.start();
      const std::size_t len = gen() % 6;
      for (std::size_t i = 0; i < len; ++i) ctx = lm.advance(ctx, static_cast<Symbol>(gen() % 6));
      lm.log_distribution(ctx, dist);
      ASSERT_EQ(dist.size(), lm.outcome_count());
      double total = 0.0;
      for (std::size_t s = 0; s < dist.size(); ++s) {
        total += std::exp(dist[s]);
        ASSERT_NEAR(dist[s], lm.log_prob(ctx, static_cast<Symbol>(s)), 1e-12);
      }
      ASSERT_NEAR(total, 1.0, 1e-9) << "order " << order;
    }
  }
}

TEST(NGram, SequenceScoreIncludesEndOfSequence) {
  std::mt19937_64 gen(2);
  const NGramModel lm = NGramModel::train(random_corpus(gen, 4), 3, 4);
  const std::vector<Symbol> seq{1, 2, 3, 0};
  double manual = 0.0;
  auto ctx = lm.start();
  for (Symbol s : seq) {
    manual += lm.log_prob(ctx, s);
    ctx = lm.advance(ctx, s);
  }
  manual += lm.log_prob(ctx, lm.eos());
  EXPECT_NEAR(lm.sequence_log_prob(seq), manual, 1e-12);
}

TEST(NGram, HigherOrderFitsTrainingTextBetter) {
  const std::vector<Symbol> seq{0, 1, 2, 3, 0, 1, 2, 3, 0, 1, 2, 3};
  const double uni = NGramModel::train({seq}, 1, 4).sequence_log_prob(seq);
  const double tri = NGramModel::train({seq}, 3, 4).sequence_log_prob(seq);
  EXPECT_GT(tri, uni);
}

TEST(NGram, SerializationRoundTripAndArgumentChecks) {
  std::mt19937_64 gen(5);
  const NGramModel lm = NGramModel::train(random_corpus(gen, 5), 4, 5, 0.2);
  std::stringstream ss;
  lm.write(ss);
  const NGramModel back = NGramModel::parse(ss);
  EXPECT_EQ(back.order(), 4);
  const std::vector<Symbol> probe{4, 3, 2, 2, 1};
  EXPECT_DOUBLE_EQ(back.sequence_log_prob(probe), lm.sequence_log_prob(probe));

  EXPECT_THROW(NGramModel::train({{0}}, 0, 2), std::invalid_argument);
  EXPECT_THROW(NGramModel::train({{0}}, 6, 2), std::invalid_argument);
  EXPECT_THROW(NGramModel::train({}, 2, 2), std::invalid_argument);
  EXPECT_THROW(NGramModel::train({{3}}, 2, 2), std::invalid_argument);
}
