#pragma once

#include <algorithm>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace linefix {

// Unit-cost edit distance; two-row DP.
template <typename Seq>
std::size_t levenshtein(const Seq& a, const Seq& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// Code-point distance between UTF-8 strings.
std::size_t char_distance(std::string_view a, std::string_view b);
// Distance between whitespace-word sequences.
std::size_t word_distance(std::string_view a, std::string_view b);
std::size_t char_length(std::string_view text);
std::size_t word_count(std::string_view text);

// Per-line ratios. Empty references yield std::nullopt.
std::optional<double> cer(std::string_view hyp, std::string_view ref);
std::optional<double> wer(std::string_view hyp, std::string_view ref);
// Matched words on an optimal word alignment over reference words.
std::size_t matched_words(std::string_view hyp, std::string_view ref);

struct CorpusRates {
  double micro = 0.0;  // edit sum over reference length sum
  double macro = 0.0;  // mean of per-line ratios over non-empty references
  std::size_t edits = 0;
  std::size_t ref_units = 0;
  std::size_t scored_lines = 0;

  bool operator==(const CorpusRates&) const = default;
};

CorpusRates corpus_cer(std::span<const std::string> hyps, std::span<const std::string> refs,
                       bool nfc = false);
CorpusRates corpus_wer(std::span<const std::string> hyps, std::span<const std::string> refs,
                       bool nfc = false);
double word_accuracy(std::span<const std::string> hyps, std::span<const std::string> refs,
                     bool nfc = false);

struct CorrectionCounts {
  std::size_t fixes = 0;
  std::size_t degradations = 0;
  std::size_t unchanged = 0;

  bool operator==(const CorrectionCounts&) const = default;
};

// Line level: a line is a fix when its edit distance to the reference strictly
// drops, a degradation when it strictly rises. Lines with empty references
// compare raw distances as well. Throws std::invalid_argument on length
// mismatch.
CorrectionCounts correction_ratio(std::span<const std::string> noisy,
                                  std::span<const std::string> corrected,
                                  std::span<const std::string> refs);
// Edit level: summed per-line distance decreases versus increases.
CorrectionCounts correction_ratio_edits(std::span<const std::string> noisy,
                                        std::span<const std::string> corrected,
                                        std::span<const std::string> refs);

// NFC normalization through ICU. Throws DataError on invalid UTF-8.
std::string nfc_normalize(std::string_view text);

struct SystemResult {
  std::string name;
  std::size_t lines = 0;
  std::size_t empty_refs = 0;
  CorpusRates cer;
  CorpusRates wer;
  double word_accuracy = 0.0;
  std::optional<CorrectionCounts> line_ratio;
  std::optional<CorrectionCounts> edit_ratio;
  std::optional<double> seconds;  // adaptation wall-clock, kept out of the main report

  bool operator==(const SystemResult&) const = default;
};

struct EvalReport {
  std::vector<SystemResult> systems;
  std::map<std::string, std::string> digests;

  bool operator==(const EvalReport&) const = default;
};

struct EvalOptions {
  bool nfc = false;
};

// Throws std::invalid_argument when the line counts differ.
SystemResult evaluate(std::string name, std::span<const std::string> hyps,
                      std::span<const std::string> refs,
                      std::span<const std::string> noisy = {},
                      const EvalOptions& opts = {});

// Aligned text table, CER and WER as percentages to two decimals. The
// adaptation-time column appears only when include_timing is set.
std::string format_table(const EvalReport& report, bool include_timing = false);
// One `key<TAB>value` line per quantity; parse_key_values inverts it
// exactly.
std::string format_key_values(const EvalReport& report);
EvalReport parse_key_values(std::istream& in);

}  // namespace linefix
