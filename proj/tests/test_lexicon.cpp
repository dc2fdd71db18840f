#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "linefix/error.hpp"
#include "linefix/lexicon.hpp"
#include "linefix/text.hpp"

using namespace linefix;

namespace {

std::size_t edit_distance(const std::u32string& a, const std::u32string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] != b[j - 1])});
      diag = up;
    }
  }
  return row[b.size()];
}

// Every word within `d` edits, by exhaustive comparison.
std::vector<std::string> brute(const Lexicon& lex, const std::string& q, std::size_t d) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < lex.size(); ++i)
    if (edit_distance(utf8_to_u32(q), utf8_to_u32(lex.word(i))) <= d) out.push_back(lex.word(i));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> words_of(const Lexicon& lex, const std::vector<Lexicon::Candidate>& cs) {
  std::vector<std::string> out;
  for (const auto& c : cs) out.push_back(lex.word(c.id));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Lexicon, CandidatesAndScanMatchExhaustiveSearch) {
  std::mt19937_64 gen(3);
  const std::u32string letters = U"abcdeſ";
  auto word = [&](std::size_t max) {
    std::u32string w;
    for (std::size_t n = 1 + gen() % max; n > 0; --n) w += letters[gen() % letters.size()];
    return u32_to_utf8(w);
  };
  std::vector<std::string> lines;
  for (int i = 0; i < 300; ++i) lines.push_back(word(7) + " " + word(7));
  const Lexicon lex = Lexicon::build(lines, 2);
  for (int t = 0; t < 300; ++t) {
    const std::string q = word(8);
    for (std::size_t d = 0; d <= 2; ++d)
      ASSERT_EQ(words_of(lex, lex.candidates(q, d)), brute(lex, q, d)) << q << " d=" << d;
    ASSERT_EQ(words_of(lex, lex.scan(q, 3)), brute(lex, q, 3)) << q;
    // The index never reaches past its radius.
    ASSERT_EQ(words_of(lex, lex.candidates(q, 3)), brute(lex, q, 2)) << q;
  }
}

TEST(Lexicon, RankingIsDistanceThenFrequencyThenBytes) {
  const Lexicon lex = Lexicon::build({"cat cat cat bat bat hat cart"}, 2);
  const auto cs = lex.scan("cat", 1);
  std::vector<std::string> order;
  for (const auto& c : cs) order.push_back(lex.word(c.id));
  EXPECT_EQ(order, (std::vector<std::string>{"cat", "bat", "cart", "hat"}));
  EXPECT_EQ(cs[0].distance, 0u);
  EXPECT_EQ(cs[1].distance, 1u);
}

TEST(Lexicon, SerializationRoundTrip) {
  const Lexicon lex = Lexicon::build({"the whale the sea", "ſea ye olde"}, 1);
  std::stringstream ss;
  lex.write(ss);
  const Lexicon back = Lexicon::parse(ss);
  ASSERT_EQ(back.size(), lex.size());
  EXPECT_EQ(back.radius(), 1);
  for (std::size_t i = 0; i < lex.size(); ++i) {
    EXPECT_EQ(back.word(i), lex.word(i));
    EXPECT_EQ(back.frequency(i), lex.frequency(i));
  }
  EXPECT_EQ(words_of(back, back.candidates("whales", 1)), words_of(lex, lex.candidates("whales", 1)));
  std::istringstream bad("lexicon-v1\nradius 1\nwords 2\n1\tb\n1\ta\n");
  EXPECT_THROW(Lexicon::parse(bad), DataError);
  EXPECT_THROW(Lexicon::build({"   "}, 1), std::invalid_argument);
  EXPECT_THROW(Lexicon::build({"a"}, 4), std::invalid_argument);
}
