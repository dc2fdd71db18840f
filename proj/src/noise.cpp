#include "linefix/noise.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "linefix/detections.hpp"
#include "linefix/digest.hpp"
#include "linefix/error.hpp"
#include "linefix/parallel.hpp"
#include "linefix/text.hpp"

namespace linefix {
namespace {

constexpr std::uint64_t kChannelSalt = 0x6368616e6e656cULL;
constexpr std::uint64_t kAugmentSalt = 0x6175676d656e74ULL;

const std::u32string& default_noise_alphabet() {
  return Alphabet::latin167().codepoints();
}

char32_t draw_other(const std::u32string& alphabet, char32_t self, Rng& rng) {
  const auto pos = alphabet.find(self);
  if (pos == std::u32string::npos || alphabet.size() < 2)
    return alphabet[uniform_index(rng, alphabet.size())];
  const std::size_t k = uniform_index(rng, alphabet.size() - 1);
  return alphabet[k >= pos ? k + 1 : k];
}

bool is_letter(char32_t cp) {
  return (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z') ||
         (cp >= 0xC0 && cp != 0xD7 && cp != 0xF7);
}

bool position_ok(const std::u32string& text, std::size_t start, std::size_t len,
                 RulePosition pos) {
  const bool initial = start == 0 || !is_letter(text[start - 1]);
  const bool final = start + len >= text.size() || !is_letter(text[start + len]);
  switch (pos) {
    case RulePosition::any: return true;
    case RulePosition::initial: return initial;
    case RulePosition::medial: return !initial && !final;
    case RulePosition::final: return final;
    case RulePosition::nonfinal: return !final;
    case RulePosition::word: return initial && final;
  }
  return false;
}

RewriteRule rule(std::u32string src, std::u32string dst, double p, RuleKind kind,
                 RulePosition pos = RulePosition::any) {
  return {std::move(src), std::move(dst), p, kind, pos};
}

}  // namespace

void NoiseChannelConfig::validate() const {
  for (double p : {p_sub, p_ins, p_del})
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("channel probabilities must lie in [0, 1]");
  if (p_sub + p_del > 1.0)
    throw std::invalid_argument("p_sub + p_del must not exceed 1");
}

EditTally& EditTally::operator+=(const EditTally& o) {
  chars += o.chars;
  substitutions += o.substitutions;
  deletions += o.deletions;
  insertions += o.insertions;
  survivors += o.survivors;
  return *this;
}

std::string random_perturb(std::string_view text, const NoiseChannelConfig& cfg,
                           Rng& rng, EditTally* tally) {
  cfg.validate();
  const std::u32string& alphabet =
      cfg.alphabet.empty() ? default_noise_alphabet() : cfg.alphabet;
  const std::u32string in = utf8_to_u32(text);
  std::u32string out;
  out.reserve(in.size() + in.size() / 8);
  EditTally local;
  for (char32_t c : in) {
    ++local.chars;
    const double u = uniform01(rng);
    if (u < cfg.p_del) {
      ++local.deletions;
      continue;
    }
    if (u < cfg.p_del + cfg.p_sub) {
      out.push_back(draw_other(alphabet, c, rng));
      ++local.substitutions;
    } else {
      out.push_back(c);
    }
    ++local.survivors;
    if (bernoulli(rng, cfg.p_ins)) {
      out.push_back(alphabet[uniform_index(rng, alphabet.size())]);
      ++local.insertions;
    }
  }
  if (tally) *tally += local;
  return u32_to_utf8(out);
}

ConfusionTable::ConfusionTable(std::vector<RewriteRule> rules)
    : rules_(std::move(rules)) {
  for (const auto& r : rules_) {
    if (r.source.empty()) throw std::invalid_argument("rule source is empty");
    if (!(r.probability >= 0.0 && r.probability <= 1.0))
      throw std::invalid_argument("rule probability must lie in [0, 1]");
  }
}

ConfusionTable ConfusionTable::cursive_default() {
  using K = RuleKind;
  return ConfusionTable({
      rule(U"rn", U"m", 0.5, K::merge),  rule(U"cl", U"d", 0.5, K::merge),
      rule(U"vv", U"w", 0.5, K::merge),  rule(U"ii", U"u", 0.5, K::merge),
      rule(U"m", U"nn", 0.2, K::split),  rule(U"w", U"uu", 0.2, K::split),
      rule(U"u", U"rn", 0.2, K::split),  rule(U"l", U"1", 0.08, K::shape),
      rule(U"1", U"l", 0.08, K::shape),  rule(U"e", U"c", 0.08, K::shape),
      rule(U"c", U"e", 0.08, K::shape),  rule(U"a", U"o", 0.08, K::shape),
      rule(U"o", U"a", 0.08, K::shape),
  });
}

ConfusionTable ConfusionTable::archaic_default() {
  using K = RuleKind;
  using P = RulePosition;
  return ConfusionTable({
      rule(U"and", U"&", 0.5, K::archaic, P::word),
      rule(U"the", U"ye", 0.4, K::archaic, P::word),
      rule(U"Servant", U"Sert", 1.0, K::archaic, P::word),
      rule(U"which", U"wch", 0.5, K::archaic, P::word),
      rule(U"your", U"yr", 0.5, K::archaic, P::word),
      rule(U"with", U"wth", 0.3, K::archaic, P::word),
      rule(U"ic", U"ick", 1.0, K::archaic, P::final),
      rule(U"ei", U"ey", 1.0, K::archaic, P::final),
      rule(U"ed", U"'d", 0.3, K::archaic, P::final),
      rule(U"y", U"ie", 0.8, K::archaic, P::final),
      rule(U"u", U"v", 1.0, K::archaic, P::initial),
      rule(U"v", U"u", 1.0, K::archaic, P::medial),
      rule(U"i", U"y", 0.5, K::archaic, P::medial),
      rule(U"s", U"ſ", 0.9, K::archaic, P::nonfinal),
  });
}

std::string_view to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::merge: return "merge";
    case RuleKind::split: return "split";
    case RuleKind::shape: return "shape";
    case RuleKind::archaic: return "archaic";
  }
  return "shape";
}

std::string_view to_string(RulePosition pos) {
  switch (pos) {
    case RulePosition::any: return "any";
    case RulePosition::initial: return "initial";
    case RulePosition::medial: return "medial";
    case RulePosition::final: return "final";
    case RulePosition::nonfinal: return "nonfinal";
    case RulePosition::word: return "word";
  }
  return "any";
}

namespace {

RuleKind parse_kind(std::string_view s) {
  for (RuleKind k : {RuleKind::merge, RuleKind::split, RuleKind::shape,
                     RuleKind::archaic})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown rule kind '" + std::string(s) + "'");
}

RulePosition parse_position(std::string_view s) {
  for (RulePosition p : {RulePosition::any, RulePosition::initial,
                         RulePosition::medial, RulePosition::final,
                         RulePosition::nonfinal, RulePosition::word})
    if (to_string(p) == s) return p;
  throw std::invalid_argument("unknown rule position '" + std::string(s) + "'");
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return cols;
}

}  // namespace

ConfusionTable ConfusionTable::parse(std::istream& in) {
  std::vector<RewriteRule> rules;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    try {
      const auto cols = split_tabs(line);
      if (cols.size() < 3 || cols.size() > 5)
        throw std::invalid_argument("expected 3 to 5 tab-separated columns");
      RewriteRule r;
      r.source = utf8_to_u32(cols[0]);
      r.target = utf8_to_u32(cols[1]);
      std::size_t used = 0;
      r.probability = std::stod(cols[2], &used);
      if (used != cols[2].size()) throw std::invalid_argument("bad probability");
      if (cols.size() > 3) r.kind = parse_kind(cols[3]);
      if (cols.size() > 4) r.position = parse_position(cols[4]);
      if (r.source.empty()) throw std::invalid_argument("empty source");
      if (!(r.probability >= 0.0 && r.probability <= 1.0))
        throw std::invalid_argument("probability outside [0, 1]");
      rules.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw DataError(fmt::format("rule file line {}: {}", lineno, e.what()));
    }
  }
  return ConfusionTable(std::move(rules));
}

ConfusionTable ConfusionTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open rule file " + path);
  return parse(in);
}

void ConfusionTable::write(std::ostream& out) const {
  for (const auto& r : rules_)
    out << u32_to_utf8(r.source) << '\t' << u32_to_utf8(r.target) << '\t'
        << fmt::format("{}", r.probability) << '\t' << to_string(r.kind) << '\t'
        << to_string(r.position) << '\n';
}

ConfusionTable ConfusionTable::scaled(double factor) const {
  auto rules = rules_;
  for (auto& r : rules) r.probability = std::clamp(r.probability * factor, 0.0, 1.0);
  return ConfusionTable(std::move(rules));
}

std::string apply_rules(std::string_view text, const ConfusionTable& table,
                        Rng& rng) {
  const std::u32string in = utf8_to_u32(text);
  std::u32string out;
  out.reserve(in.size() + in.size() / 4);
  std::size_t i = 0;
  while (i < in.size()) {
    const RewriteRule* fired = nullptr;
    for (const auto& r : table.rules()) {
      if (in.compare(i, r.source.size(), r.source) != 0) continue;
      if (!position_ok(in, i, r.source.size(), r.position)) continue;
      if (bernoulli(rng, r.probability)) {
        fired = &r;
        break;
      }
    }
    if (fired) {
      out += fired->target;
      i += fired->source.size();
    } else {
      out.push_back(in[i]);
      ++i;
    }
  }
  return u32_to_utf8(out);
}

std::string cursive_collapse(std::string_view text, const ConfusionTable& table,
                             Rng& rng) {
  return apply_rules(text, table, rng);
}

std::string archaic_variant(std::string_view text, const ConfusionTable& table,
                            Rng& rng) {
  return apply_rules(text, table, rng);
}

const std::map<char32_t, std::u32string>& default_confusion_sets() {
  static const std::map<char32_t, std::u32string> kSets = {
      {U'l', U"1I|"}, {U'1', U"lI7"}, {U'I', U"l1"},  {U'O', U"0Q"},
      {U'0', U"O"},   {U'o', U"ae0"}, {U'a', U"oe"},  {U'e', U"co"},
      {U'c', U"eo"},  {U'u', U"vn"},  {U'v', U"u"},   {U'n', U"uh"},
      {U'h', U"bn"},  {U'b', U"h"},   {U'i', U"lj"},  {U'j', U"i"},
      {U't', U"f"},   {U'f', U"t"},   {U'r', U"n"},   {U'g', U"q"},
      {U'q', U"g"},   {U'S', U"5"},   {U'5', U"S"},   {U'B', U"8"},
      {U'8', U"B"},   {U',', U"."},   {U'.', U","},
  };
  return kSets;
}

AugmentedPair augment_pair(std::string_view noisy, std::string_view clean,
                           double p_augment, Rng& rng) {
  if (!(p_augment >= 0.0 && p_augment <= 1.0))
    throw std::invalid_argument("p_augment must lie in [0, 1]");
  AugmentedPair out{std::string(noisy), std::string(clean), false};
  if (!bernoulli(rng, p_augment)) return out;
  std::u32string text = utf8_to_u32(noisy);
  const auto& alphabet = default_noise_alphabet();
  std::size_t op = uniform_index(rng, 3);
  if (text.empty()) op = 1;
  switch (op) {
    case 0: {
      const std::size_t pos = uniform_index(rng, text.size());
      const auto& sets = default_confusion_sets();
      const auto it = sets.find(text[pos]);
      text[pos] = it != sets.end()
                      ? it->second[uniform_index(rng, it->second.size())]
                      : draw_other(alphabet, text[pos], rng);
      break;
    }
    case 1: {
      const std::size_t pos = uniform_index(rng, text.size() + 1);
      text.insert(text.begin() + static_cast<std::ptrdiff_t>(pos),
                  alphabet[uniform_index(rng, alphabet.size())]);
      break;
    }
    default: {
      const std::size_t pos = uniform_index(rng, text.size());
      text.erase(pos, 1);
      break;
    }
  }
  out.noisy = u32_to_utf8(text);
  out.augmented = true;
  return out;
}

std::string_view to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::identity: return "identity";
    case ChannelKind::random: return "random";
    case ChannelKind::cursive: return "cursive";
    case ChannelKind::archaic: return "archaic";
  }
  return "random";
}

ChannelKind parse_channel_kind(std::string_view name) {
  for (ChannelKind k : {ChannelKind::identity, ChannelKind::random,
                        ChannelKind::cursive, ChannelKind::archaic})
    if (to_string(k) == name) return k;
  throw UsageError("unknown noise channel '" + std::string(name) + "'");
}

std::string NoiseChannel::apply(std::string_view clean, Rng& rng) const {
  switch (kind) {
    case ChannelKind::identity: return std::string(clean);
    case ChannelKind::random: return random_perturb(clean, random, rng);
    case ChannelKind::cursive: return cursive_collapse(clean, table, rng);
    case ChannelKind::archaic: return archaic_variant(clean, table, rng);
  }
  return std::string(clean);
}

std::string NoiseChannel::describe() const {
  std::ostringstream os;
  os << "channel=" << to_string(kind) << '\n';
  if (kind == ChannelKind::random) {
    os << fmt::format("p_sub={}\np_ins={}\np_del={}\n", random.p_sub,
                      random.p_ins, random.p_del);
    if (!random.alphabet.empty())
      os << "alphabet=" << u32_to_utf8(random.alphabet) << '\n';
  }
  if (kind == ChannelKind::cursive || kind == ChannelKind::archaic) table.write(os);
  os << fmt::format("p_augment={}\n", p_augment);
  return os.str();
}

PairedCorpus build_corpus(const std::vector<std::string>& clean_lines,
                          const NoiseChannel& channel, std::uint64_t seed,
                          std::size_t jobs) {
  PairedCorpus corpus;
  corpus.pairs.resize(clean_lines.size());
  parallel_for(clean_lines.size(), jobs, [&](std::size_t i) {
    Rng rng = make_rng(seed, i, kChannelSalt);
    std::string noisy = channel.apply(clean_lines[i], rng);
    if (channel.p_augment > 0.0) {
      Rng aug_rng = make_rng(seed, i, kAugmentSalt);
      noisy = augment_pair(noisy, clean_lines[i], channel.p_augment, aug_rng).noisy;
    }
    corpus.pairs[i] = {std::move(noisy), clean_lines[i]};
  });
  const std::string description = channel.describe();
  corpus.manifest["channel"] = std::string(to_string(channel.kind));
  corpus.manifest["channel_config_sha256"] = sha256_hex(description);
  corpus.manifest["seed"] = std::to_string(seed);
  corpus.manifest["lines"] = std::to_string(clean_lines.size());
  return corpus;
}

}  // namespace linefix
