#include "linefix/corrector.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "linefix/digest.hpp"
#include "linefix/error.hpp"
#include "linefix/metrics.hpp"
#include "linefix/parallel.hpp"
#include "linefix/text.hpp"

namespace linefix {

std::string_view to_string(CorrectorMode mode) {
  return mode == CorrectorMode::byte ? "byte" : "token";
}

CorrectorMode parse_corrector_mode(std::string_view name) {
  if (name == "byte") return CorrectorMode::byte;
  if (name == "token") return CorrectorMode::token;
  throw UsageError("unknown corrector mode '" + std::string(name) + "'");
}

void CorrectorParams::validate() const {
  if (order < 1 || order > NGramModel::kMaxOrder)
    throw std::invalid_argument(fmt::format("LM order {} outside [1, {}]", order,
                                            NGramModel::kMaxOrder));
  if (!(smoothing_k > 0.0)) throw std::invalid_argument("smoothing_k must be positive");
  if (!(lm_weight >= 0.0) || !std::isfinite(lm_weight))
    throw std::invalid_argument("lm_weight must be finite and non-negative");
  if (beam_width < 1) throw std::invalid_argument("beam_width must be at least 1");
  if (edit_radius < 0 || edit_radius > 3)
    throw std::invalid_argument("edit_radius must lie in [0, 3]");
  if (candidates < 1) throw std::invalid_argument("candidates must be at least 1");
  if (max_deletions < 0) throw std::invalid_argument("max_deletions must be non-negative");
}

CorrectorParams CorrectorParams::defaults(CorrectorMode mode) {
  CorrectorParams p;
  p.mode = mode;
  p.order = mode == CorrectorMode::byte ? 5 : 3;
  return p;
}

Symbol LanguageModel::char_symbol(char32_t cp) const {
  const auto it = std::lower_bound(chars.begin(), chars.end(), cp);
  return static_cast<Symbol>(it != chars.end() && *it == cp ? it - chars.begin()
                                                            : static_cast<std::ptrdiff_t>(chars.size()));
}

std::vector<Symbol> LanguageModel::symbols(std::string_view text) const {
  std::vector<Symbol> out;
  if (mode == CorrectorMode::byte) {
    for (char32_t cp : utf8_to_u32(text)) out.push_back(char_symbol(cp));
  } else {
    for (TokenId id : tokenizer.encode(text)) out.push_back(id);
  }
  return out;
}

double LanguageModel::score(std::string_view text) const {
  return ngram.sequence_log_prob(symbols(text));
}

LanguageModel train_lm(const std::vector<std::string>& clean_corpus, int order,
                       CorrectorMode mode, double unigram_k, const BpeTokenizer* tokenizer,
                       std::size_t bpe_vocab) {
  if (order < 1) throw std::invalid_argument("train_lm: order must be at least 1");
  if (clean_corpus.empty()) throw std::invalid_argument("train_lm: empty corpus");
  LanguageModel lm;
  lm.mode = mode;
  std::size_t num_symbols = 0;
  if (mode == CorrectorMode::byte) {
    std::set<char32_t> seen;
    for (const auto& line : clean_corpus)
      for (char32_t cp : utf8_to_u32(line)) seen.insert(cp);
    lm.chars.assign(seen.begin(), seen.end());
    num_symbols = lm.chars.size() + 1;
  } else {
    if (tokenizer) {
      lm.tokenizer = *tokenizer;
    } else {
      std::set<unsigned char> bytes;
      for (const auto& line : clean_corpus) bytes.insert(line.begin(), line.end());
      lm.tokenizer = bpe_train(clean_corpus, std::max(bpe_vocab, bytes.size()));
    }
    num_symbols = lm.tokenizer.vocab_size() + 1;
  }
  std::vector<std::vector<Symbol>> seqs;
  seqs.reserve(clean_corpus.size());
  for (const auto& line : clean_corpus) seqs.push_back(lm.symbols(line));
  lm.ngram = NGramModel::train(seqs, order, num_symbols, unigram_k);
  return lm;
}

ConfusionModel train_confusion(const std::vector<TextPair>& pairs, double k) {
  return ConfusionModel::train(pairs, k);
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
using Context = NGramModel::Context;

// Keeps the best hypothesis per recombination key within one level. Ties in
// score go to the earlier-created hypothesis.
template <typename Hyp, typename Key>
class Level {
 public:
  void push(const Key& key, const Hyp& h) {
    const auto [it, inserted] = index_.emplace(key, items_.size());
    if (inserted) {
      items_.emplace_back(key, h);
    } else if (h.score > items_[it->second].second.score) {
      items_[it->second].second = h;
    }
  }
  void prune_to(std::size_t width) {
    std::sort(items_.begin(), items_.end(), [](const auto& a, const auto& b) {
      return a.second.score > b.second.score ||
             (a.second.score == b.second.score && a.second.seq < b.second.seq);
    });
    if (items_.size() > width) items_.resize(width);
    index_.clear();
    for (std::size_t i = 0; i < items_.size(); ++i) index_.emplace(items_[i].first, i);
  }
  std::vector<Hyp> hyps() const {
    std::vector<Hyp> out;
    for (const auto& item : items_) out.push_back(item.second);
    return out;
  }
  const std::vector<std::pair<Key, Hyp>>& items() const { return items_; }

 private:
  std::vector<std::pair<Key, Hyp>> items_;
  std::map<Key, std::size_t> index_;
};

class ByteDecoder {
 public:
  ByteDecoder(const CorrectorCheckpoint& ckpt, int beam)
      : ch_(ckpt.channel), lm_(ckpt.lm), p_(ckpt.params), beam_(static_cast<std::size_t>(beam)) {
    stop_ = ch_.log_stop();
    unk_ = static_cast<Symbol>(lm_.chars.size());
  }

  std::string run(const std::u32string& noisy) {
    struct Hyp {
      double score;
      Context ctx;
      int chain;
      std::uint32_t node;
      std::uint64_t seq;
    };
    using Key = std::pair<Context, int>;
    const std::size_t n = noisy.size();
    std::vector<Level<Hyp, Key>> levels(n + 1);
    nodes_.assign(1, {0, 0});
    std::uint64_t seq = 0;
    levels[0].push({lm_.ngram.start(), 0}, {0.0, lm_.ngram.start(), 0, 0, seq++});

    for (std::size_t i = 0;; ++i) {
      auto& cur = levels[i];
      cur.prune_to(beam_);
      std::vector<Hyp> frontier = cur.hyps();
      for (int d = 1; d <= p_.max_deletions && !frontier.empty(); ++d) {
        std::vector<Hyp> added;
        for (const auto& h : frontier) {
          const auto& e = entry(h.ctx);
          for (Symbol s : e.top) {
            const char32_t c = lm_.chars[s];
            Hyp nh{h.score + ch_.log_remove(c) + stop_ + p_.lm_weight * e.logp[s],
                   lm_.ngram.advance(h.ctx, s), d, node(h.node, c), seq++};
            added.push_back(nh);
          }
        }
        for (const auto& h : added) cur.push({h.ctx, h.chain}, h);
        frontier = std::move(added);
      }
      cur.prune_to(beam_);
      if (i == n) break;

      const char32_t x = noisy[i];
      auto& next = levels[i + 1];
      const auto& src = sources(x);
      for (const auto& [key, h] : cur.items()) {
        const auto& e = entry(h.ctx);
        next.push({h.ctx, 0}, {h.score + ch_.log_insert(x), h.ctx, 0, h.node, seq++});
        cands_.clear();
        cands_.push_back(x);
        for (Symbol s : e.top) cands_.push_back(lm_.chars[s]);
        cands_.insert(cands_.end(), src.begin(), src.end());
        std::sort(cands_.begin(), cands_.end());
        cands_.erase(std::unique(cands_.begin(), cands_.end()), cands_.end());
        for (char32_t c : cands_) {
          const Symbol s = lm_.char_symbol(c);
          if (s == unk_ && c != x) continue;
          const double score =
              h.score + ch_.log_emit(c, x) + stop_ + p_.lm_weight * e.logp[s];
          next.push({lm_.ngram.advance(h.ctx, s), 0},
                    {score, lm_.ngram.advance(h.ctx, s), 0, node(h.node, c), seq++});
        }
      }
    }

    double best = kNegInf;
    std::uint32_t best_node = 0;
    std::uint64_t best_seq = 0;
    for (const auto& [key, h] : levels[n].items()) {
      const double total = h.score + p_.lm_weight * entry(h.ctx).logp[lm_.ngram.eos()];
      if (total > best || (total == best && h.seq < best_seq)) {
        best = total;
        best_node = h.node;
        best_seq = h.seq;
      }
    }
    std::u32string out;
    for (std::uint32_t k = best_node; k != 0; k = nodes_[k].parent) out.push_back(nodes_[k].ch);
    std::reverse(out.begin(), out.end());
    return u32_to_utf8(out);
  }

 private:
  struct Entry {
    std::vector<double> logp;
    std::vector<Symbol> top;
  };
  struct Node {
    std::uint32_t parent;
    char32_t ch;
  };

  std::uint32_t node(std::uint32_t parent, char32_t ch) {
    nodes_.push_back({parent, ch});
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

  const Entry& entry(Context ctx) {
    auto [it, inserted] = cache_.try_emplace(ctx);
    if (inserted) {
      Entry& e = it->second;
      lm_.ngram.log_distribution(ctx, e.logp);
      std::vector<Symbol> order;
      for (Symbol s = 0; s < unk_; ++s) order.push_back(s);
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(p_.candidates), order.size());
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                        [&](Symbol a, Symbol b) {
                          return e.logp[a] > e.logp[b] || (e.logp[a] == e.logp[b] && a < b);
                        });
      order.resize(k);
      e.top = std::move(order);
    }
    return it->second;
  }

  const std::vector<char32_t>& sources(char32_t x) {
    auto [it, inserted] = source_cache_.try_emplace(x);
    if (inserted) {
      for (char32_t c : ch_.likely_sources(x, 4))
        if (lm_.char_symbol(c) != unk_) it->second.push_back(c);
    }
    return it->second;
  }

  const ConfusionModel& ch_;
  const LanguageModel& lm_;
  const CorrectorParams& p_;
  std::size_t beam_;
  double stop_;
  Symbol unk_;
  std::vector<Node> nodes_;
  std::vector<char32_t> cands_;
  std::unordered_map<Context, Entry> cache_;
  std::unordered_map<char32_t, std::vector<char32_t>> source_cache_;
};

class TokenDecoder {
 public:
  TokenDecoder(const CorrectorCheckpoint& ckpt, int beam)
      : ckpt_(ckpt), ch_(ckpt.channel), lm_(ckpt.lm), p_(ckpt.params),
        beam_(static_cast<std::size_t>(beam)) {
    boundary_ = ch_.log_emit(U' ', U' ');
  }

  std::string run(std::string_view noisy_line) {
    for (auto w : split_words(noisy_line)) words_.emplace_back(w);
    const std::size_t m = words_.size();
    if (m == 0) return {};

    struct Hyp {
      double score;
      Context ctx;
      std::uint32_t node;
      std::uint64_t seq;
    };
    std::vector<Level<Hyp, Context>> levels(m + 1);
    nodes_.assign(1, {0, {}});
    std::uint64_t seq = 0;
    levels[0].push(lm_.ngram.start(), {0.0, lm_.ngram.start(), 0, seq++});

    for (std::size_t j = 0; j < m; ++j) {
      auto& cur = levels[j];
      cur.prune_to(beam_);
      for (const auto& [key, h] : cur.items()) {
        const double base = h.score + (j > 0 ? boundary_ : 0.0);
        for (std::size_t span = 1; span <= 2 && j + span <= m; ++span) {
          for (const auto& opt : options(j, span)) {
            Context ctx = h.ctx;
            double lm_score = 0.0;
            std::uint32_t nd = h.node;
            for (std::size_t w = 0; w < opt.words.size(); ++w) {
              lm_score += word_lm(opt.words[w], j > 0 || w > 0, ctx);
              nd = node(nd, opt.words[w]);
            }
            levels[j + span].push(
                ctx, {base + opt.channel + p_.lm_weight * lm_score, ctx, nd, seq++});
          }
        }
      }
    }
    auto& last = levels[m];
    double best = kNegInf;
    std::uint32_t best_node = 0;
    std::uint64_t best_seq = 0;
    for (const auto& [key, h] : last.items()) {
      const double total = h.score + p_.lm_weight * lm_.ngram.log_prob(h.ctx, lm_.ngram.eos());
      if (total > best || (total == best && h.seq < best_seq)) {
        best = total;
        best_node = h.node;
        best_seq = h.seq;
      }
    }
    std::vector<std::string> out;
    for (std::uint32_t k = best_node; k != 0; k = nodes_[k].parent) out.push_back(nodes_[k].word);
    std::reverse(out.begin(), out.end());
    return join(out, " ");
  }

 private:
  struct Option {
    std::vector<std::string> words;
    double channel;
  };
  struct Node {
    std::uint32_t parent;
    std::string word;
  };

  std::uint32_t node(std::uint32_t parent, const std::string& word) {
    nodes_.push_back({parent, word});
    return static_cast<std::uint32_t>(nodes_.size() - 1);
  }

  double word_lm(const std::string& word, bool spaced, Context& ctx) {
    auto [it, inserted] = token_cache_.try_emplace({word, spaced});
    if (inserted) it->second = lm_.symbols(spaced ? " " + word : word);
    double total = 0.0;
    for (Symbol s : it->second) {
      total += lm_.ngram.log_prob(ctx, s);
      ctx = lm_.ngram.advance(ctx, s);
    }
    return total;
  }

  std::size_t keep() const {
    return std::max<std::size_t>(beam_, static_cast<std::size_t>(p_.candidates));
  }

  static void trim(std::vector<Option>& opts, std::size_t k) {
    std::stable_sort(opts.begin(), opts.end(),
                     [](const Option& a, const Option& b) { return a.channel > b.channel; });
    if (opts.size() > k) opts.resize(k);
  }

  struct Piece {
    std::string word;
    double channel;
  };

  // Lexicon words for noisy[a, b); the radius grows with the piece so short
  // fragments do not match half the inventory.
  const std::vector<Piece>& pieces(const std::u32string& noisy, std::size_t a, std::size_t b) {
    auto [it, inserted] = piece_cache_.try_emplace(noisy.substr(a, b - a));
    if (!inserted) return it->second;
    const std::size_t len = b - a;
    const std::size_t radius = std::min<std::size_t>(
        static_cast<std::size_t>(p_.edit_radius), len <= 2 ? 0 : len <= 5 ? 1 : 2);
    auto found = ckpt_.lexicon.candidates(u32_to_utf8(it->first), radius);
    if (found.size() > 3) found.resize(3);
    for (const auto& c : found) {
      const std::string& w = ckpt_.lexicon.word(c.id);
      it->second.push_back({w, ch_.viterbi(it->first, utf8_to_u32(w))});
    }
    return it->second;
  }

  // Noise may have deleted or replaced the spaces inside a run: read it as
  // two or three lexicon words. Combinations are ranked by their per-piece
  // channel scores, and only the best are rescored as a whole.
  std::vector<Option> segmentations(const std::u32string& noisy) {
    const std::size_t n = noisy.size();
    std::vector<Option> rough;
    for (std::size_t a = 1; a < n; ++a) {
      const auto& left = pieces(noisy, 0, a);
      if (left.empty()) continue;
      for (const auto& l : left)
        for (const auto& r : pieces(noisy, a, n))
          rough.push_back({{l.word, r.word}, l.channel + r.channel});
      for (std::size_t b = a + 1; b < n; ++b) {
        const auto& mid = pieces(noisy, a, b);
        if (mid.empty()) continue;
        const auto& right = pieces(noisy, b, n);
        for (const auto& l : left)
          for (const auto& m : mid)
            for (const auto& r : right)
              rough.push_back({{l.word, m.word, r.word}, l.channel + m.channel + r.channel});
      }
    }
    trim(rough, 2 * keep());
    for (auto& o : rough) o.channel = ch_.viterbi(noisy, utf8_to_u32(join(o.words, " ")));
    trim(rough, keep());
    return rough;
  }

  const std::vector<Option>& options(std::size_t j, std::size_t span) {
    auto [it, inserted] = option_cache_.try_emplace({j, span});
    if (!inserted) return it->second;
    auto& opts = it->second;
    const std::string unit = span == 1 ? words_[j] : words_[j] + " " + words_[j + 1];
    const std::u32string unit32 = utf8_to_u32(unit);
    const auto radius = static_cast<std::size_t>(p_.edit_radius);
    for (const auto& c : ckpt_.lexicon.candidates(unit, radius))
      opts.push_back({{ckpt_.lexicon.word(c.id)},
                      ch_.viterbi(unit32, utf8_to_u32(ckpt_.lexicon.word(c.id)))});
    if (span == 1) {
      const bool known = ckpt_.lexicon.contains(unit);
      // Heavily damaged long words: one edit past the index radius.
      if (opts.empty() && unit32.size() >= 2 * (radius + 1))
        for (const auto& c : ckpt_.lexicon.scan(unit, radius + 1))
          opts.push_back({{ckpt_.lexicon.word(c.id)},
                          ch_.viterbi(unit32, utf8_to_u32(ckpt_.lexicon.word(c.id)))});
      if (opts.empty()) opts.push_back({{unit}, ch_.viterbi(unit32, unit32)});
      if (!known && unit32.size() >= 2) {
        auto splits = segmentations(unit32);
        opts.insert(opts.end(), splits.begin(), splits.end());
      }
    }
    trim(opts, keep());
    return opts;
  }

  const CorrectorCheckpoint& ckpt_;
  const ConfusionModel& ch_;
  const LanguageModel& lm_;
  const CorrectorParams& p_;
  std::size_t beam_;
  double boundary_;
  std::vector<std::string> words_;
  std::vector<Node> nodes_;
  std::map<std::pair<std::string, bool>, std::vector<Symbol>> token_cache_;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<Option>> option_cache_;
  std::unordered_map<std::u32string, std::vector<Piece>> piece_cache_;
};

void put_params(std::ostream& out, const CorrectorParams& p) {
  out << "mode " << to_string(p.mode) << '\n'
      << fmt::format("order {}\nsmoothing_k {}\nlm_weight {}\nbeam_width {}\n", p.order,
                     p.smoothing_k, p.lm_weight, p.beam_width)
      << fmt::format("edit_radius {}\ncandidates {}\nmax_deletions {}\nbpe_vocab {}\n",
                     p.edit_radius, p.candidates, p.max_deletions, p.bpe_vocab);
}

}  // namespace

std::string CorrectorCheckpoint::body() const {
  std::ostringstream out;
  out << "linefix-checkpoint-v1\n";
  put_params(out, params);
  out << "confusion\n";
  channel.write(out);
  out << "lm\n" << "chars " << lm.chars.size();
  for (char32_t c : lm.chars) out << fmt::format(" {:X}", static_cast<std::uint32_t>(c));
  out << '\n';
  lm.ngram.write(out);
  if (params.mode == CorrectorMode::token) {
    out << "tokenizer\n";
    lm.tokenizer.write(out);
    out << "lexicon\n";
    lexicon.write(out);
  }
  out << "end\n";
  return out.str();
}

std::string CorrectorCheckpoint::digest() const { return sha256_hex(body()); }

void CorrectorCheckpoint::write(std::ostream& out) const {
  out << body();
  if (validation_cer) out << fmt::format("validation_cer {}\n", *validation_cer);
}

CorrectorCheckpoint CorrectorCheckpoint::parse(std::istream& in) {
  std::string line;
  auto next = [&]() -> std::string& {
    if (!std::getline(in, line)) throw DataError("checkpoint truncated");
    return line;
  };
  auto field = [&](const std::string& key) -> std::string {
    next();
    if (line.rfind(key + ' ', 0) != 0) throw DataError("checkpoint: expected '" + key + "'");
    return line.substr(key.size() + 1);
  };
  auto marker = [&](const std::string& key) {
    if (next() != key) throw DataError("checkpoint: expected section '" + key + "'");
  };
  if (next() != "linefix-checkpoint-v1") throw DataError("not a linefix checkpoint");
  CorrectorCheckpoint ck;
  auto& p = ck.params;
  try {
    p.mode = parse_corrector_mode(field("mode"));
    p.order = std::stoi(field("order"));
    p.smoothing_k = std::stod(field("smoothing_k"));
    p.lm_weight = std::stod(field("lm_weight"));
    p.beam_width = std::stoi(field("beam_width"));
    p.edit_radius = std::stoi(field("edit_radius"));
    p.candidates = std::stoi(field("candidates"));
    p.max_deletions = std::stoi(field("max_deletions"));
    p.bpe_vocab = std::stoul(field("bpe_vocab"));
    p.validate();
  } catch (const DataError&) {
    throw;
  } catch (const std::exception& e) {
    throw DataError(std::string("checkpoint: bad parameter: ") + e.what());
  }
  marker("confusion");
  ck.channel = ConfusionModel::parse(in);
  marker("lm");
  ck.lm.mode = p.mode;
  {
    std::istringstream cs(field("chars"));
    std::size_t n = 0;
    cs >> n;
    for (std::size_t i = 0; i < n; ++i) {
      std::string hex;
      if (!(cs >> hex)) throw DataError("checkpoint: short chars line");
      ck.lm.chars.push_back(static_cast<char32_t>(std::stoul(hex, nullptr, 16)));
    }
    if (!std::is_sorted(ck.lm.chars.begin(), ck.lm.chars.end()))
      throw DataError("checkpoint: chars not sorted");
  }
  ck.lm.ngram = NGramModel::parse(in);
  if (p.mode == CorrectorMode::token) {
    marker("tokenizer");
    ck.lm.tokenizer = BpeTokenizer::parse(in);
    marker("lexicon");
    ck.lexicon = Lexicon::parse(in);
    if (ck.lm.ngram.num_symbols() != ck.lm.tokenizer.vocab_size() + 1)
      throw DataError("checkpoint: LM and tokenizer disagree");
  } else if (ck.lm.ngram.num_symbols() != ck.lm.chars.size() + 1) {
    throw DataError("checkpoint: LM and character table disagree");
  }
  marker("end");
  if (std::getline(in, line) && !line.empty()) {
    if (line.rfind("validation_cer ", 0) != 0) throw DataError("checkpoint: trailing data");
    ck.validation_cer = std::stod(line.substr(15));
  }
  return ck;
}

void CorrectorCheckpoint::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path);
  write(out);
  if (!out) throw DataError("failed writing checkpoint " + path);
}

CorrectorCheckpoint CorrectorCheckpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path);
  return parse(in);
}

CorrectorCheckpoint train_corrector(const std::vector<TextPair>& pairs,
                                    const CorrectorParams& params, const Lexicon* lexicon,
                                    const BpeTokenizer* tokenizer) {
  params.validate();
  if (pairs.empty()) throw std::invalid_argument("train_corrector: no pairs");
  CorrectorCheckpoint ck;
  ck.params = params;
  ck.channel = train_confusion(pairs, params.smoothing_k);
  std::vector<std::string> clean;
  clean.reserve(pairs.size());
  for (const auto& pr : pairs) clean.push_back(pr.second);
  if (params.mode == CorrectorMode::token) {
    ck.lexicon = lexicon ? *lexicon : Lexicon::build(clean, params.edit_radius);
    ck.lm = train_lm(clean, params.order, params.mode, params.smoothing_k, tokenizer,
                     params.bpe_vocab);
  } else {
    ck.lm = train_lm(clean, params.order, params.mode, params.smoothing_k);
  }
  return ck;
}

CorrectorCheckpoint with_params(const CorrectorCheckpoint& base, const CorrectorParams& params) {
  params.validate();
  CorrectorCheckpoint ck = base;
  ck.params.lm_weight = params.lm_weight;
  ck.params.beam_width = params.beam_width;
  ck.params.edit_radius = params.edit_radius;
  ck.params.candidates = params.candidates;
  ck.params.max_deletions = params.max_deletions;
  ck.validation_cer.reset();
  return ck;
}

std::string correct(std::string_view noisy, const CorrectorCheckpoint& ckpt, int beam_width) {
  if (beam_width < 1) throw std::invalid_argument("beam_width must be at least 1");
  if (ckpt.params.mode == CorrectorMode::byte) {
    ByteDecoder dec(ckpt, beam_width);
    return dec.run(utf8_to_u32(noisy));
  }
  if (ckpt.lexicon.size() == 0) throw std::invalid_argument("token mode needs a lexicon");
  TokenDecoder dec(ckpt, beam_width);
  return dec.run(noisy);
}

std::vector<std::string> correct_lines(const std::vector<std::string>& noisy,
                                       const CorrectorCheckpoint& ckpt, std::size_t jobs) {
  std::vector<std::string> out(noisy.size());
  parallel_for(noisy.size(), jobs, [&](std::size_t i) { out[i] = correct(noisy[i], ckpt); });
  return out;
}

std::size_t select_checkpoint(std::vector<CorrectorCheckpoint>& candidates,
                              const std::vector<TextPair>& validation, std::size_t jobs) {
  if (candidates.empty()) throw std::invalid_argument("select_checkpoint: no candidates");
  if (validation.empty()) throw std::invalid_argument("select_checkpoint: no validation pairs");
  std::vector<std::string> noisy, clean;
  for (const auto& [n, c] : validation) {
    noisy.push_back(n);
    clean.push_back(c);
  }
  std::size_t best = 0;
  std::string best_digest;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto hyps = correct_lines(noisy, candidates[i], jobs);
    candidates[i].validation_cer = corpus_cer(hyps, clean).micro;
    const std::string d = candidates[i].digest();
    if (i == 0 || *candidates[i].validation_cer < *candidates[best].validation_cer ||
        (*candidates[i].validation_cer == *candidates[best].validation_cer && d < best_digest)) {
      best = i;
      best_digest = d;
    }
  }
  return best;
}

}  // namespace linefix
