#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "linefix/channel.hpp"
#include "linefix/metrics.hpp"
#include "linefix/text.hpp"

using namespace linefix;
using Kind = EditOp::Kind;

namespace {

std::vector<std::pair<std::string, std::string>> pairs() {
  return {{"tbe whale", "the whale"}, {"corn and com", "corn and corn"},
          {"whitc sea", "white sea"}, {"the shlp", "the ship"},
          {"a lttle boat", "a little boat"}, {"thhe end", "the end"}};
}

// Best alignment score by direct recursion over the generative story: an
// insertion slot, then per clean character one of match/substitute/drop
// followed by another slot.
double viterbi_oracle(const ConfusionModel& m, const std::u32string& noisy,
                      const std::u32string& clean) {
  std::function<double(std::size_t, std::size_t)> slot, step;
  slot = [&](std::size_t i, std::size_t j) {
    double best = m.log_stop() + step(i, j);
    if (j < noisy.size()) best = std::max(best, m.log_insert(noisy[j]) + slot(i, j + 1));
    return best;
  };
  step = [&](std::size_t i, std::size_t j) -> double {
    if (i == clean.size()) return j == noisy.size() ? 0.0 : -INFINITY;
    double best = m.log_remove(clean[i]) + slot(i + 1, j);
    if (j < noisy.size()) best = std::max(best, m.log_emit(clean[i], noisy[j]) + slot(i + 1, j + 1));
    return best;
  };
  return slot(0, 0);
}

std::size_t cost(const std::vector<EditOp>& ops) {
  std::size_t c = 0;
  for (const auto& op : ops) c += op.kind != Kind::match;
  return c;
}

}  // namespace

TEST(AlignPair, WorkedExample) {
  const auto ops = align_pair("com", "corn");
  const std::vector<EditOp> expected{{Kind::match, U'c', U'c'},
                                     {Kind::match, U'o', U'o'},
                                     {Kind::insert, 0, U'r'},
                                     {Kind::substitute, U'm', U'n'}};
  EXPECT_EQ(ops, expected);
  EXPECT_EQ(align_pair("", "ab").size(), 2u);
  EXPECT_EQ(align_pair("ab", "").front().kind, Kind::remove);
}

TEST(AlignPair, IsAnOptimalAlignmentThatRebuildsBothSides) {
  std::mt19937_64 gen(6);
  for (int t = 0; t < 500; ++t) {
    std::u32string a, b;
    for (std::size_t i = gen() % 9; i > 0; --i) a += U"abcſ"[gen() % 4];
    for (std::size_t i = gen() % 9; i > 0; --i) b += U"abcſ"[gen() % 4];
    const auto ops = align_pair(std::u32string_view(a), std::u32string_view(b));
    std::u32string noisy, clean;
    for (const auto& op : ops) {
      if (op.kind != Kind::insert) noisy += op.noisy;
      if (op.kind != Kind::remove) clean += op.clean;
      if (op.kind == Kind::match) ASSERT_EQ(op.noisy, op.clean);
      if (op.kind == Kind::substitute) ASSERT_NE(op.noisy, op.clean);
    }
    ASSERT_EQ(noisy, a);
    ASSERT_EQ(clean, b);
    ASSERT_EQ(cost(ops), levenshtein(a, b));
  }
}

TEST(ConfusionModel, DistributionsAreNormalized) {
  const ConfusionModel m = ConfusionModel::train(pairs(), 0.1);
  const std::u32string inv = m.inventory();
  const std::u32string sources = inv + U"Q";  // Q is never seen
  for (char32_t c : sources) {
    double total = std::exp(m.log_match(c)) + std::exp(m.log_remove(c));
    for (char32_t x : inv)
      if (x != c) total += std::exp(m.log_substitute(c, x));
    if (c != U'Q') total += std::exp(m.log_substitute(c, U'Q'));
    EXPECT_NEAR(total, 1.0, 1e-12) << static_cast<std::uint32_t>(c);
  }
  double slot = std::exp(m.log_stop()) + std::exp(m.log_insert(U'Q'));
  for (char32_t x : inv) slot += std::exp(m.log_insert(x));
  EXPECT_NEAR(slot, 1.0, 1e-12);
}

TEST(ConfusionModel, LearnsTheObservedConfusions) {
  const ConfusionModel m = ConfusionModel::train(pairs(), 0.1);
  EXPECT_GT(m.log_substitute(U'h', U'b'), m.log_substitute(U'h', U'c'));
  EXPECT_GT(m.log_match(U'e'), m.log_substitute(U'e', U'c'));
  const auto src = m.likely_sources(U'l', 2);
  ASSERT_EQ(src.size(), 2u);
  EXPECT_EQ(src[0], U'l');
  EXPECT_EQ(src[1], U'i');
  EXPECT_THROW(ConfusionModel::train({}, 0.1), std::invalid_argument);
  EXPECT_THROW(ConfusionModel::train(pairs(), 0.0), std::invalid_argument);
}

TEST(ConfusionModel, ViterbiMatchesRecursiveOracle) {
  const ConfusionModel m = ConfusionModel::train(pairs(), 0.1);
  std::mt19937_64 gen(10);
  const std::u32string letters = U"theQwa s";
  for (int t = 0; t < 300; ++t) {
    std::u32string a, b;
    for (std::size_t i = gen() % 6; i > 0; --i) a += letters[gen() % letters.size()];
    for (std::size_t i = gen() % 6; i > 0; --i) b += letters[gen() % letters.size()];
    ASSERT_NEAR(m.viterbi(std::u32string_view(a), std::u32string_view(b)), viterbi_oracle(m, a, b),
                1e-9);
  }
  EXPECT_GT(m.viterbi("tbe", "the"), m.viterbi("tbe", "toe"));
}

TEST(ConfusionModel, SerializationRoundTrip) {
  const ConfusionModel m = ConfusionModel::train(pairs(), 0.3);
  std::stringstream ss;
  m.write(ss);
  const ConfusionModel back = ConfusionModel::parse(ss);
  EXPECT_EQ(back.inventory(), m.inventory());
  EXPECT_DOUBLE_EQ(back.smoothing(), 0.3);
  EXPECT_DOUBLE_EQ(back.viterbi("tbe shlp", "the ship"), m.viterbi("tbe shlp", "the ship"));
  std::stringstream again;
  back.write(again);
  ss.clear();
  ss.seekg(0);
  EXPECT_EQ(again.str(), ss.str());
}
