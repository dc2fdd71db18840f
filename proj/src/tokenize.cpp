#include "linefix/tokenize.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "linefix/digest.hpp"
#include "linefix/error.hpp"
#include "linefix/text.hpp"

namespace linefix {
namespace {

bool is_space_byte(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::uint64_t pair_key(TokenId a, TokenId b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

std::string escape(const std::string& bytes) {
  std::string out;
  for (unsigned char c : bytes) {
    if (c < 0x21 || c > 0x7E || c == '\\')
      out += fmt::format("\\x{:02X}", c);
    else
      out.push_back(static_cast<char>(c));
  }
  return out;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

std::string unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out.push_back(s[i]);
      continue;
    }
    if (i + 3 >= s.size() || s[i + 1] != 'x')
      throw DataError("bad escape in tokenizer file");
    const int hi = hex_value(s[i + 2]);
    const int lo = hex_value(s[i + 3]);
    if (hi < 0 || lo < 0) throw DataError("bad escape in tokenizer file");
    out.push_back(static_cast<char>(hi * 16 + lo));
    i += 3;
  }
  if (out.empty()) throw DataError("empty token in tokenizer file");
  return out;
}

struct TrainWord {
  std::vector<TokenId> syms;
  std::int64_t count;
};

}  // namespace

std::vector<std::uint8_t> byte_encode(std::string_view text) {
  return {text.begin(), text.end()};
}

std::string byte_decode(std::span<const std::uint8_t> bytes) {
  std::string out(bytes.begin(), bytes.end());
  if (!is_valid_utf8(out)) throw DataError("byte sequence is not valid UTF-8");
  return out;
}

std::vector<std::string_view> pretokenize(std::string_view text) {
  std::vector<std::string_view> chunks;
  std::size_t i = 0;
  while (i < text.size()) {
    const bool space = is_space_byte(text[i]);
    std::size_t j = i + 1;
    while (j < text.size() && is_space_byte(text[j]) == space) ++j;
    chunks.push_back(text.substr(i, j - i));
    i = j;
  }
  return chunks;
}

BpeTokenizer BpeTokenizer::train(const std::vector<std::string>& corpus,
                                 std::size_t target_vocab_size) {
  std::map<std::string, std::int64_t> chunk_counts;
  bool present[256] = {};
  for (const auto& line : corpus)
    for (auto chunk : pretokenize(line)) {
      ++chunk_counts[std::string(chunk)];
      for (unsigned char c : chunk) present[c] = true;
    }
  if (chunk_counts.empty()) throw std::invalid_argument("bpe_train: empty corpus");

  BpeTokenizer tok;
  for (int b = 0; b < 256; ++b)
    if (present[b]) {
      tok.base_.push_back(static_cast<std::uint8_t>(b));
      tok.tokens_.emplace_back(1, static_cast<char>(b));
    }
  if (target_vocab_size < tok.base_.size())
    throw std::invalid_argument(
        fmt::format("bpe_train: target {} below base inventory size {}",
                    target_vocab_size, tok.base_.size()));
  tok.index();

  std::vector<TrainWord> words;
  words.reserve(chunk_counts.size());
  for (const auto& [chunk, count] : chunk_counts) {
    TrainWord w{{}, count};
    for (unsigned char c : chunk) w.syms.push_back(tok.byte_to_id_[c]);
    words.push_back(std::move(w));
  }

  std::unordered_map<std::uint64_t, std::int64_t> pair_counts;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> where;
  auto add_pairs = [&](std::uint32_t wi, std::int64_t sign) {
    const auto& s = words[wi].syms;
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
      const auto key = pair_key(s[k], s[k + 1]);
      pair_counts[key] += sign * words[wi].count;
      if (sign > 0) where[key].push_back(wi);
    }
  };
  for (std::uint32_t wi = 0; wi < words.size(); ++wi) add_pairs(wi, +1);

  std::unordered_set<std::string> known(tok.tokens_.begin(), tok.tokens_.end());
  std::vector<std::uint32_t> stamp(words.size(), 0);
  std::uint32_t epoch = 0;

  while (tok.tokens_.size() < target_vocab_size) {
    std::uint64_t best = 0;
    std::int64_t best_count = 1;
    bool found = false;
    for (auto it = pair_counts.begin(); it != pair_counts.end();) {
      if (it->second <= 0) {
        where.erase(it->first);
        it = pair_counts.erase(it);
        continue;
      }
      const auto [key, count] = *it;
      ++it;
      if (count < best_count) continue;
      const TokenId a = static_cast<TokenId>(key >> 32);
      const TokenId b = static_cast<TokenId>(key & 0xffffffffu);
      if (known.count(tok.tokens_[a] + tok.tokens_[b])) continue;
      if (found && count == best_count) {
        const TokenId ba = static_cast<TokenId>(best >> 32);
        const TokenId bb = static_cast<TokenId>(best & 0xffffffffu);
        const int c = tok.tokens_[a].compare(tok.tokens_[ba]);
        if (c > 0 || (c == 0 && tok.tokens_[b] >= tok.tokens_[bb])) continue;
      }
      if (count < 2) continue;
      best = key;
      best_count = count;
      found = true;
    }
    if (!found) break;

    const TokenId a = static_cast<TokenId>(best >> 32);
    const TokenId b = static_cast<TokenId>(best & 0xffffffffu);
    const TokenId merged = static_cast<TokenId>(tok.tokens_.size());
    tok.tokens_.push_back(tok.tokens_[a] + tok.tokens_[b]);
    known.insert(tok.tokens_.back());
    tok.merges_.emplace_back(a, b);

    ++epoch;
    const auto affected = std::move(where[best]);
    where.erase(best);
    for (std::uint32_t wi : affected) {
      if (stamp[wi] == epoch) continue;
      stamp[wi] = epoch;
      auto& s = words[wi].syms;
      bool hit = false;
      for (std::size_t k = 0; k + 1 < s.size(); ++k)
        if (s[k] == a && s[k + 1] == b) hit = true;
      if (!hit) continue;
      add_pairs(wi, -1);
      std::vector<TokenId> next;
      next.reserve(s.size());
      for (std::size_t k = 0; k < s.size(); ++k) {
        if (k + 1 < s.size() && s[k] == a && s[k + 1] == b) {
          next.push_back(merged);
          ++k;
        } else {
          next.push_back(s[k]);
        }
      }
      s = std::move(next);
      add_pairs(wi, +1);
    }
  }
  tok.index();
  return tok;
}

void BpeTokenizer::index() {
  byte_to_id_.assign(256, unk_id());
  for (std::size_t i = 0; i < base_.size(); ++i)
    byte_to_id_[base_[i]] = static_cast<TokenId>(i);
  ranks_.clear();
  for (std::size_t r = 0; r < merges_.size(); ++r)
    ranks_.emplace_back(pair_key(merges_[r].first, merges_[r].second),
                        static_cast<std::uint32_t>(r));
  std::sort(ranks_.begin(), ranks_.end());
}

void BpeTokenizer::encode_chunk(std::string_view chunk,
                                std::vector<TokenId>& out) const {
  std::vector<TokenId> s;
  s.reserve(chunk.size());
  for (unsigned char c : chunk) s.push_back(byte_to_id_[c]);
  const TokenId unk = unk_id();
  auto rank_of = [&](TokenId x, TokenId y) -> std::uint32_t {
    if (x == unk || y == unk) return UINT32_MAX;
    const auto key = pair_key(x, y);
    auto it = std::lower_bound(ranks_.begin(), ranks_.end(),
                               std::make_pair(key, std::uint32_t{0}));
    return (it != ranks_.end() && it->first == key) ? it->second : UINT32_MAX;
  };
  while (s.size() > 1) {
    std::uint32_t best = UINT32_MAX;
    for (std::size_t k = 0; k + 1 < s.size(); ++k)
      best = std::min(best, rank_of(s[k], s[k + 1]));
    if (best == UINT32_MAX) break;
    const auto [a, b] = merges_[best];
    const TokenId merged = static_cast<TokenId>(base_.size() + best);
    std::size_t w = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (k + 1 < s.size() && s[k] == a && s[k + 1] == b) {
        s[w++] = merged;
        ++k;
      } else {
        s[w++] = s[k];
      }
    }
    s.resize(w);
  }
  out.insert(out.end(), s.begin(), s.end());
}

std::vector<TokenId> BpeTokenizer::encode(std::string_view text) const {
  std::vector<TokenId> out;
  for (auto chunk : pretokenize(text)) encode_chunk(chunk, out);
  return out;
}

std::string BpeTokenizer::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId id : ids) {
    if (id == unk_id())
      out += "\xEF\xBF\xBD";
    else
      out += tokens_.at(id);
  }
  return out;
}

void BpeTokenizer::write(std::ostream& out) const {
  out << "bpe-v1\n" << "base " << base_.size() << '\n';
  for (std::size_t i = 0; i < base_.size(); ++i) out << escape(tokens_[i]) << '\n';
  out << "merges " << merges_.size() << '\n';
  for (const auto& [a, b] : merges_)
    out << escape(tokens_[a]) << ' ' << escape(tokens_[b]) << '\n';
}

std::string BpeTokenizer::serialize() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

std::string BpeTokenizer::digest() const { return sha256_hex(serialize()); }

BpeTokenizer BpeTokenizer::parse(std::istream& in) {
  auto read_line = [&](const char* what) {
    std::string line;
    if (!std::getline(in, line))
      throw DataError(fmt::format("tokenizer file truncated before {}", what));
    return line;
  };
  auto read_count = [&](const std::string& keyword) -> std::size_t {
    const std::string line = read_line(keyword.c_str());
    if (line.rfind(keyword + ' ', 0) != 0)
      throw DataError("tokenizer file: expected '" + keyword + "' line");
    try {
      return std::stoul(line.substr(keyword.size() + 1));
    } catch (const std::exception&) {
      throw DataError("tokenizer file: bad count on '" + keyword + "' line");
    }
  };
  if (read_line("header") != "bpe-v1") throw DataError("not a bpe-v1 tokenizer file");
  BpeTokenizer tok;
  std::unordered_map<std::string, TokenId> ids;
  const std::size_t n_base = read_count("base");
  for (std::size_t i = 0; i < n_base; ++i) {
    const std::string t = unescape(read_line("base token"));
    if (t.size() != 1) throw DataError("tokenizer base token is not one byte");
    const auto byte = static_cast<std::uint8_t>(t[0]);
    if (!tok.base_.empty() && byte <= tok.base_.back())
      throw DataError("tokenizer base inventory not strictly ascending");
    tok.base_.push_back(byte);
    ids.emplace(t, static_cast<TokenId>(tok.tokens_.size()));
    tok.tokens_.push_back(t);
  }
  const std::size_t n_merges = read_count("merges");
  for (std::size_t i = 0; i < n_merges; ++i) {
    const std::string line = read_line("merge");
    const auto sp = line.find(' ');
    if (sp == std::string::npos) throw DataError("tokenizer merge line lacks a space");
    const auto l = ids.find(unescape(std::string_view(line).substr(0, sp)));
    const auto r = ids.find(unescape(std::string_view(line).substr(sp + 1)));
    if (l == ids.end() || r == ids.end())
      throw DataError(fmt::format("tokenizer merge {} references unknown token", i + 1));
    std::string merged = tok.tokens_[l->second] + tok.tokens_[r->second];
    if (!ids.emplace(merged, static_cast<TokenId>(tok.tokens_.size())).second)
      throw DataError(fmt::format("tokenizer merge {} duplicates a token", i + 1));
    tok.merges_.emplace_back(l->second, r->second);
    tok.tokens_.push_back(std::move(merged));
  }
  tok.index();
  return tok;
}

double fragmentation(const std::vector<std::string>& corpus,
                     const BpeTokenizer& tok) {
  std::size_t tokens = 0;
  std::size_t words = 0;
  for (const auto& line : corpus)
    for (auto word : split_words(std::string_view(line))) {
      tokens += tok.encode(word).size();
      ++words;
    }
  if (words == 0) throw std::invalid_argument("fragmentation: corpus has no words");
  return static_cast<double>(tokens) / static_cast<double>(words);
}

double byte_fragmentation(const std::vector<std::string>& corpus) {
  std::size_t bytes = 0;
  std::size_t words = 0;
  for (const auto& line : corpus)
    for (auto word : split_words(std::string_view(line))) {
      bytes += word.size();
      ++words;
    }
  if (words == 0) throw std::invalid_argument("fragmentation: corpus has no words");
  return static_cast<double>(bytes) / static_cast<double>(words);
}

}  // namespace linefix
