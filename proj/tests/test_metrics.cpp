#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "linefix/error.hpp"
#include "linefix/metrics.hpp"
#include "linefix/text.hpp"

using namespace linefix;

namespace {

// Textbook recursion without memoization; only usable on short inputs.
std::size_t naive_distance(std::u32string_view a, std::u32string_view b) {
  if (a.empty()) return b.size();
  if (b.empty()) return a.size();
  const std::size_t tail = naive_distance(a.substr(1), b.substr(1)) + (a[0] == b[0] ? 0 : 1);
  if (a[0] == b[0]) return tail;
  return std::min({tail, naive_distance(a.substr(1), b) + 1, naive_distance(a, b.substr(1)) + 1});
}

}  // namespace

TEST(Levenshtein, ClassicExamples) {
  EXPECT_EQ(char_distance("kitten", "sitting"), 3u);
  EXPECT_EQ(char_distance("", "abc"), 3u);
  EXPECT_EQ(char_distance("ſhip", "ship"), 1u);
  EXPECT_EQ(word_distance("the white whale", "the whale"), 1u);
}

TEST(Levenshtein, AgreesWithNaiveRecursion) {
  std::mt19937_64 gen(14);
  const std::u32string letters = U"abcſ ";
  for (int t = 0; t < 400; ++t) {
    std::u32string a, b;
    for (std::size_t i = gen() % 9; i > 0; --i) a += letters[gen() % letters.size()];
    for (std::size_t i = gen() % 9; i > 0; --i) b += letters[gen() % letters.size()];
    ASSERT_EQ(levenshtein(a, b), naive_distance(a, b));
    ASSERT_EQ(char_distance(u32_to_utf8(a), u32_to_utf8(b)), naive_distance(a, b));
    ASSERT_EQ(levenshtein(a, b), levenshtein(b, a));
  }
}

TEST(Rates, LineLevelExamples) {
  const double expected = static_cast<double>(naive_distance(U"plys on a qunte", U"plays on a quote")) /
                          16.0;
  ASSERT_DOUBLE_EQ(expected, 0.125);
  EXPECT_DOUBLE_EQ(*cer("plys on a qunte", "plays on a quote"), 0.125);
  EXPECT_DOUBLE_EQ(*wer("plys on a qunte", "plays on a quote"), 0.5);
  EXPECT_EQ(matched_words("plys on a qunte", "plays on a quote"), 2u);
  EXPECT_FALSE(cer("abc", "").has_value());
  EXPECT_FALSE(wer("abc", "  ").has_value());
}

TEST(Rates, MicroWeightsByLengthMacroByLine) {
  const std::vector<std::string> refs{"abcdefghij", "ab", ""};
  const std::vector<std::string> hyps{"abcdefghij", "xy", "zz"};
  const CorpusRates r = corpus_cer(hyps, refs);
  EXPECT_EQ(r.edits, 2u);  // empty references are not scored
  EXPECT_EQ(r.ref_units, 12u);
  EXPECT_EQ(r.scored_lines, 2u);
  EXPECT_DOUBLE_EQ(r.micro, 2.0 / 12.0);
  EXPECT_DOUBLE_EQ(r.macro, 0.5);
  EXPECT_THROW(corpus_cer(hyps, std::vector<std::string>{"a"}), std::invalid_argument);
  EXPECT_DOUBLE_EQ(word_accuracy(std::vector<std::string>{"a b c"}, std::vector<std::string>{"a x c d"}),
                   0.5);
}

TEST(CorrectionRatio, LineAndEditLevel) {
  const std::vector<std::string> refs{"the whale", "the sea", "a ship", "ahoy"};
  const std::vector<std::string> noisy{"tbe whalc", "the sea", "a shlp", "ahoy"};
  const std::vector<std::string> fixed{"the whale", "tha sea", "a shop", "ahoy"};
  const CorrectionCounts line = correction_ratio(noisy, fixed, refs);
  EXPECT_EQ(line.fixes, 1u);
  EXPECT_EQ(line.degradations, 1u);
  EXPECT_EQ(line.unchanged, 2u);
  const CorrectionCounts edits = correction_ratio_edits(noisy, fixed, refs);
  EXPECT_EQ(edits.fixes, 2u);
  EXPECT_EQ(edits.degradations, 1u);
}

TEST(Normalization, ComposesCombiningMarks) {
  EXPECT_EQ(nfc_normalize("e\xCC\x81"), "\xC3\xA9");
  EXPECT_EQ(char_distance("e\xCC\x81", "\xC3\xA9"), 2u);
  const std::vector<std::string> h{"e\xCC\x81t\xC3\xA9"}, r{"\xC3\xA9t\xC3\xA9"};
  EXPECT_GT(corpus_cer(h, r).micro, 0.0);
  EXPECT_DOUBLE_EQ(corpus_cer(h, r, true).micro, 0.0);
  EXPECT_THROW(nfc_normalize("\xC3"), DataError);
}

TEST(Report, KeyValueRoundTripAndTable) {
  const std::vector<std::string> refs{"the whale", "the sea"};
  const std::vector<std::string> noisy{"tbe whalc", "the sea"};
  const std::vector<std::string> hyps{"the whale", "tha sea"};
  EvalReport report;
  report.systems.push_back(evaluate("noisy", noisy, refs));
  report.systems.push_back(evaluate("byte corrector", hyps, refs, noisy));
  report.systems.back().seconds = 1.25;
  report.digests["corpus"] = "abc123";

  std::istringstream in(format_key_values(report));
  EXPECT_EQ(parse_key_values(in), report);

  const std::string table = format_table(report);
  EXPECT_NE(table.find("byte corrector"), std::string::npos);
  EXPECT_EQ(table.find("Adapt"), std::string::npos);
  EXPECT_NE(format_table(report, true).find("1.250"), std::string::npos);

  const std::string empty = format_table(EvalReport{});
  EXPECT_EQ(std::count(empty.begin(), empty.end(), '\n'), 1);
  EXPECT_EQ(empty.rfind("System", 0), 0u);
}
