#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace linefix {

// Edit operations read as "rewrite noisy into clean": insert supplies a clean
// character missing from the noisy text; delete drops a noisy character.
struct EditOp {
  enum class Kind { match, substitute, insert, remove };
  Kind kind;
  char32_t noisy = 0;  // unset for insert
  char32_t clean = 0;  // unset for remove

  bool operator==(const EditOp&) const = default;
};

// Unit-cost Levenshtein alignment. Traceback from the end prefers
// match > substitute > remove > insert.
std::vector<EditOp> align_pair(std::u32string_view noisy, std::u32string_view clean);
std::vector<EditOp> align_pair(std::string_view noisy, std::string_view clean);

// Generative channel P(noisy | clean) over code points. Each clean character
// is matched, substituted or dropped; before the first and after every clean
// character sits an insertion slot emitting inserted characters until a stop.
// Characters outside the training inventory share one "other" class.
class ConfusionModel {
 public:
  ConfusionModel() = default;

  // Add-k smoothed maximum likelihood over align_pair operations. Throws
  // std::invalid_argument on empty input or k <= 0.
  static ConfusionModel train(const std::vector<std::pair<std::string, std::string>>& pairs,
                              double k = 0.1);

  double log_match(char32_t clean) const { return match_[id(clean)]; }
  double log_remove(char32_t clean) const { return remove_[id(clean)]; }
  double log_substitute(char32_t clean, char32_t noisy) const;
  // Match when equal, substitution otherwise.
  double log_emit(char32_t clean, char32_t noisy) const;
  double log_insert(char32_t noisy) const { return insert_[id(noisy)]; }
  double log_stop() const { return stop_; }

  // Best single alignment log P(noisy | clean), slot stops included.
  double viterbi(std::u32string_view noisy, std::u32string_view clean) const;
  double viterbi(std::string_view noisy, std::string_view clean) const;

  // Clean characters ordered by decreasing P(noisy | clean) for this noisy
  // character, ties by code point. The "other" class is never proposed.
  std::vector<char32_t> likely_sources(char32_t noisy, std::size_t k) const;

  const std::u32string& inventory() const { return symbols_; }
  double smoothing() const { return k_; }

  // Plain-text block of raw counts; probabilities are rebuilt on parse.
  void write(std::ostream& out) const;
  static ConfusionModel parse(std::istream& in);

 private:
  struct Counts {
    std::vector<std::uint64_t> match, remove, inserts;  // per class
    std::vector<std::uint64_t> subs;                    // [clean * n + noisy]
    std::uint64_t stops = 0;
  };

  std::size_t id(char32_t cp) const {
    const auto it = index_.find(cp);
    return it == index_.end() ? symbols_.size() : it->second;
  }
  void build(Counts counts, double k);

  std::u32string symbols_;
  std::unordered_map<char32_t, std::size_t> index_;
  double k_ = 0.1;
  Counts counts_;
  std::vector<double> match_, remove_, insert_, sub_;
  double stop_ = 0.0;
};

}  // namespace linefix
