#include "linefix/lexicon.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include "linefix/digest.hpp"
#include "linefix/error.hpp"
#include "linefix/metrics.hpp"
#include "linefix/text.hpp"

namespace linefix {
namespace {

std::uint64_t key_of(const std::u32string& s) {
  return fnv1a64(std::string_view(reinterpret_cast<const char*>(s.data()),
                                  s.size() * sizeof(char32_t)));
}

void deletions(const std::u32string& s, int depth, std::unordered_set<std::uint64_t>& out,
               std::unordered_set<std::u32string>& visited) {
  if (!visited.insert(s).second) return;
  out.insert(key_of(s));
  if (depth == 0) return;
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::u32string shorter = s;
    shorter.erase(i, 1);
    deletions(shorter, depth - 1, out, visited);
  }
}

std::unordered_set<std::uint64_t> deletion_keys(std::string_view word, int radius) {
  std::unordered_set<std::uint64_t> keys;
  std::unordered_set<std::u32string> visited;
  deletions(utf8_to_u32(word), radius, keys, visited);
  return keys;
}

}  // namespace

Lexicon Lexicon::build(const std::vector<std::string>& lines, int radius) {
  if (radius < 0 || radius > 3) throw std::invalid_argument("lexicon radius must lie in [0, 3]");
  std::map<std::string, std::uint64_t> counts;
  for (const auto& line : lines)
    for (auto w : split_words(std::string_view(line))) ++counts[std::string(w)];
  if (counts.empty()) throw std::invalid_argument("lexicon: no words");
  Lexicon lex;
  lex.radius_ = radius;
  for (const auto& [w, c] : counts) {
    lex.words_.push_back(w);
    lex.freq_.push_back(c);
  }
  lex.index();
  return lex;
}

void Lexicon::index() {
  ids_.clear();
  deletes_.clear();
  wide_.clear();
  for (std::size_t i = 0; i < words_.size(); ++i) {
    ids_.emplace(words_[i], i);
    wide_.push_back(utf8_to_u32(words_[i]));
    for (auto key : deletion_keys(words_[i], radius_))
      deletes_[key].push_back(static_cast<std::uint32_t>(i));
  }
}

std::vector<Lexicon::Candidate> Lexicon::candidates(std::string_view query,
                                                    std::size_t max_distance) const {
  const std::size_t limit = std::min<std::size_t>(max_distance, static_cast<std::size_t>(radius_));
  const std::u32string q = utf8_to_u32(query);
  std::unordered_set<std::uint32_t> seen;
  std::vector<Candidate> out;
  for (auto key : deletion_keys(query, static_cast<int>(limit))) {
    const auto it = deletes_.find(key);
    if (it == deletes_.end()) continue;
    for (std::uint32_t id : it->second) {
      if (!seen.insert(id).second) continue;
      const std::size_t d = levenshtein(q, wide_[id]);
      if (d <= limit) out.push_back({id, d});
    }
  }
  rank(out);
  return out;
}

std::vector<Lexicon::Candidate> Lexicon::scan(std::string_view query,
                                              std::size_t max_distance) const {
  const std::u32string q = utf8_to_u32(query);
  std::vector<Candidate> out;
  for (std::size_t id = 0; id < wide_.size(); ++id) {
    const std::size_t n = wide_[id].size();
    if ((n > q.size() ? n - q.size() : q.size() - n) > max_distance) continue;
    const std::size_t d = levenshtein(q, wide_[id]);
    if (d <= max_distance) out.push_back({id, d});
  }
  rank(out);
  return out;
}

void Lexicon::rank(std::vector<Candidate>& out) const {
  std::sort(out.begin(), out.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (freq_[a.id] != freq_[b.id]) return freq_[a.id] > freq_[b.id];
    return a.id < b.id;
  });
}

void Lexicon::write(std::ostream& out) const {
  out << "lexicon-v1\n" << "radius " << radius_ << '\n' << "words " << words_.size() << '\n';
  for (std::size_t i = 0; i < words_.size(); ++i) out << freq_[i] << '\t' << words_[i] << '\n';
}

Lexicon Lexicon::parse(std::istream& in) {
  std::string line;
  auto expect = [&](const std::string& key) -> long long {
    if (!std::getline(in, line) || line.rfind(key + ' ', 0) != 0)
      throw DataError("lexicon block: expected '" + key + "'");
    return std::stoll(line.substr(key.size() + 1));
  };
  if (!std::getline(in, line) || line != "lexicon-v1") throw DataError("lexicon block: bad header");
  Lexicon lex;
  lex.radius_ = static_cast<int>(expect("radius"));
  if (lex.radius_ < 0 || lex.radius_ > 3) throw DataError("lexicon block: bad radius");
  const long long n = expect("words");
  for (long long i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw DataError("lexicon block truncated");
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError("lexicon block: missing tab");
    std::string word = line.substr(tab + 1);
    if (!lex.words_.empty() && word <= lex.words_.back())
      throw DataError("lexicon block: words not strictly ascending");
    lex.freq_.push_back(std::stoull(line.substr(0, tab)));
    lex.words_.push_back(std::move(word));
  }
  lex.index();
  return lex;
}

}  // namespace linefix
