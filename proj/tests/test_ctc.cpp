#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "linefix/ctc.hpp"
#include "linefix/error.hpp"

using namespace linefix;

namespace {

const Alphabet& small_alphabet() {
  static const Alphabet a({"a", "b", "o", "k"}, "test4");
  return a;
}

FrameLogProbs random_frames(std::mt19937_64& gen, std::size_t frames, std::size_t classes) {
  std::gamma_distribution<double> g(0.7, 1.0);
  std::vector<double> p(frames * classes);
  for (std::size_t m = 0; m < frames; ++m) {
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) z += p[m * classes + c] = g(gen) + 1e-9;
    for (std::size_t c = 0; c < classes; ++c) p[m * classes + c] /= z;
  }
  return FrameLogProbs::from_probs(frames, classes, p);
}

// Probability mass of every collapsed string, by walking all class^M paths
// with an odometer and collapsing each path by hand.
std::map<std::string, double> path_mass(const FrameLogProbs& f, const Alphabet& a) {
  std::map<std::string, double> mass;
  std::vector<std::size_t> path(f.frames(), 0);
  const std::size_t blank = a.no_object_index();
  while (true) {
    double lp = 0.0;
    std::string s;
    std::size_t prev = blank;
    for (std::size_t m = 0; m < path.size(); ++m) {
      lp += f(m, path[m]);
      if (path[m] != blank && path[m] != prev) s += a.symbol_at(path[m]);
      prev = path[m];
    }
    mass[s] += std::exp(lp);
    std::size_t i = 0;
    while (i < path.size() && ++path[i] == f.classes()) path[i++] = 0;
    if (i == path.size()) break;
  }
  return mass;
}

std::string random_target(std::mt19937_64& gen, std::size_t max_len) {
  static const std::string letters = "abok";
  std::string s;
  const std::size_t n = gen() % (max_len + 1);
  for (std::size_t i = 0; i < n; ++i) s += letters[gen() % letters.size()];
  return s;
}

}  // namespace

TEST(Ctc, ForwardMatchesPathEnumeration) {
  const Alphabet& a = small_alphabet();
  std::mt19937_64 gen(3);
  for (int t = 0; t < 120; ++t) {
    const std::size_t frames = 1 + gen() % 6;
    const FrameLogProbs f = random_frames(gen, frames, a.class_count());
    const auto mass = path_mass(f, a);
    for (int k = 0; k < 4; ++k) {
      const std::string target = random_target(gen, frames);
      const auto it = mass.find(target);
      const double ll = ctc_log_likelihood(f, target, a);
      if (it == mass.end()) {
        EXPECT_TRUE(std::isinf(ll) && ll < 0) << target;
      } else {
        ASSERT_NEAR(std::exp(ll), it->second, 1e-9) << target;
        ASSERT_NEAR(ll, ctc_brute_force(f, target, a), 1e-9);
        ASSERT_NEAR(ctc_loss(f, target, a), -ll, 1e-12);
      }
    }
  }
}

TEST(Ctc, LikelihoodsOverAllTargetsSumToOne) {
  const Alphabet& a = small_alphabet();
  std::mt19937_64 gen(8);
  for (std::size_t frames = 1; frames <= 4; ++frames) {
    const FrameLogProbs f = random_frames(gen, frames, a.class_count());
    double total = 0.0;
    for (const auto& [target, p] : path_mass(f, a)) total += std::exp(ctc_log_likelihood(f, target, a));
    EXPECT_NEAR(total, 1.0, 1e-9) << frames;
  }
}

TEST(Ctc, RepeatsNeedASeparatingBlank) {
  const Alphabet& a = small_alphabet();
  const ClassIndex b = *a.index_of(U'b'), o = *a.index_of(U'o'), k = *a.index_of(U'k');
  const ClassIndex blank = a.no_object_index();
  const LabelSeq book{b, o, o, k};
  EXPECT_EQ(ctc_collapse(book, a), "bok");
  EXPECT_EQ(ctc_collapse(interleave_blanks(book, blank), a), "book");
  EXPECT_EQ(interleave_blanks(book, blank).size(), 7u);
  EXPECT_TRUE(interleave_blanks({}, blank).empty());
  EXPECT_EQ(ctc_collapse({blank, blank}, a), "");

  // Two frames cannot produce "oo": the shortest path needs o, blank, o.
  std::mt19937_64 gen(1);
  EXPECT_TRUE(std::isinf(ctc_log_likelihood(random_frames(gen, 2, a.class_count()), "oo", a)));
  EXPECT_TRUE(std::isfinite(ctc_log_likelihood(random_frames(gen, 3, a.class_count()), "oo", a)));
}

TEST(Ctc, BestPathDecodeCollapsesArgmax) {
  const Alphabet& a = small_alphabet();
  const std::size_t C = a.class_count();
  std::vector<double> p(5 * C, 0.01);
  const ClassIndex seq[] = {*a.index_of(U'o'), *a.index_of(U'o'), a.no_object_index(),
                            *a.index_of(U'o'), *a.index_of(U'k')};
  for (std::size_t m = 0; m < 5; ++m) p[m * C + seq[m]] = 1.0 - 0.01 * (C - 1);
  EXPECT_EQ(best_path_decode(FrameLogProbs::from_probs(5, C, p), a), "ook");
}

TEST(Ctc, RejectsBadInput) {
  const Alphabet& a = small_alphabet();
  std::mt19937_64 gen(2);
  const FrameLogProbs f = random_frames(gen, 3, a.class_count());
  EXPECT_THROW(ctc_log_likelihood(f, "z", a), DataError);
  EXPECT_THROW(ctc_log_likelihood(random_frames(gen, 3, 9), "a", a), std::invalid_argument);
  EXPECT_THROW(FrameLogProbs(1, 2, {std::log(0.9), std::log(0.9)}), std::invalid_argument);
  EXPECT_NEAR(log_sum_exp(std::log(0.25), std::log(0.5)), std::log(0.75), 1e-15);
  EXPECT_EQ(log_sum_exp(-INFINITY, -INFINITY), -INFINITY);
}
