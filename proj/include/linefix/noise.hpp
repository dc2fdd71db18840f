#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "linefix/rng.hpp"

namespace linefix {

// Character-level random edit channel. Per input character one draw decides
// deletion (p_del) or substitution (p_sub); every surviving character is
// followed by an insertion with probability p_ins.
struct NoiseChannelConfig {
  double p_sub = 0.05;
  double p_ins = 0.03;
  double p_del = 0.03;
  // Substitution and insertion alphabet; empty means the printable classes
  // of Alphabet::latin167().
  std::u32string alphabet;

  void validate() const;
};

struct EditTally {
  std::size_t chars = 0;
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t survivors = 0;

  EditTally& operator+=(const EditTally& o);
};

std::string random_perturb(std::string_view text, const NoiseChannelConfig& cfg,
                           Rng& rng, EditTally* tally = nullptr);

enum class RuleKind { merge, split, shape, archaic };
// Where in a word a rule may fire. Words are maximal runs of letters.
enum class RulePosition { any, initial, medial, final, nonfinal, word };

struct RewriteRule {
  std::u32string source;
  std::u32string target;
  double probability = 1.0;
  RuleKind kind = RuleKind::shape;
  RulePosition position = RulePosition::any;
};

// Ordered rewrite rules; order is scan precedence.
class ConfusionTable {
 public:
  ConfusionTable() = default;
  explicit ConfusionTable(std::vector<RewriteRule> rules);

  // Merges rn->m cl->d vv->w ii->u, splits m->nn w->uu u->rn, and the shape
  // pairs l/1 e/c a/o as one-directional rules.
  static ConfusionTable cursive_default();
  // Long s, u/v and i/y interchange, "&" and "ye", -ick, -ey, -ie, -'d and
  // a few flattened superscript abbreviations. Illustrative, not a
  // historical inventory.
  static ConfusionTable archaic_default();

  // Rule file: source<TAB>target<TAB>probability[<TAB>kind[<TAB>position]],
  // '#' comments and blank lines ignored. Throws DataError with line numbers.
  static ConfusionTable parse(std::istream& in);
  static ConfusionTable load(const std::string& path);
  void write(std::ostream& out) const;

  const std::vector<RewriteRule>& rules() const { return rules_; }
  bool empty() const { return rules_.empty(); }
  // Every rule's probability multiplied by `factor`, clamped to [0, 1].
  ConfusionTable scaled(double factor) const;

 private:
  std::vector<RewriteRule> rules_;
};

std::string_view to_string(RuleKind kind);
std::string_view to_string(RulePosition pos);

// Single left-to-right scan. At each position the matching rules are tried
// in table order, each firing with its own probability; the first that fires
// rewrites its span, which is not rescanned. Otherwise one character is
// copied.
std::string apply_rules(std::string_view text, const ConfusionTable& table,
                        Rng& rng);
std::string cursive_collapse(std::string_view text, const ConfusionTable& table,
                             Rng& rng);
std::string archaic_variant(std::string_view text, const ConfusionTable& table,
                            Rng& rng);

// Visually confusable replacements used by augment_pair substitutions.
const std::map<char32_t, std::u32string>& default_confusion_sets();

struct AugmentedPair {
  std::string noisy;
  std::string clean;
  bool augmented = false;
};

// With probability p_augment, one extra edit (confusion-set substitution,
// insertion or deletion, chosen uniformly) on the noisy side. The clean side
// is returned untouched.
AugmentedPair augment_pair(std::string_view noisy, std::string_view clean,
                           double p_augment, Rng& rng);

enum class ChannelKind { identity, random, cursive, archaic };

std::string_view to_string(ChannelKind kind);
ChannelKind parse_channel_kind(std::string_view name);

struct NoiseChannel {
  ChannelKind kind = ChannelKind::random;
  NoiseChannelConfig random;
  ConfusionTable table;  // used by cursive and archaic channels
  double p_augment = 0.0;

  std::string apply(std::string_view clean, Rng& rng) const;
  // Stable description of every parameter, for manifests and hashing.
  std::string describe() const;
};

struct PairedCorpus {
  std::vector<std::pair<std::string, std::string>> pairs;  // (noisy, clean)
  std::map<std::string, std::string> manifest;
};

// Applies `channel` to each clean line with the stream (seed, line index);
// augmentation draws from a separate stream. Pairs come back in input order
// regardless of `jobs`.
PairedCorpus build_corpus(const std::vector<std::string>& clean_lines,
                          const NoiseChannel& channel, std::uint64_t seed,
                          std::size_t jobs = 1);

}  // namespace linefix
