#include "linefix/ngram.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "linefix/error.hpp"

namespace linefix {

NGramModel::Context NGramModel::mask(int ctx_len) const {
  return ctx_len >= 4 ? ~Context{0} : ((Context{1} << (16 * ctx_len)) - 1);
}

NGramModel::Context NGramModel::start() const {
  Context ctx = 0;
  for (int i = 0; i + 1 < order_; ++i) ctx = (ctx << 16) | bos();
  return ctx;
}

NGramModel::Context NGramModel::advance(Context ctx, Symbol next) const {
  return ((ctx << 16) | next) & mask(order_ - 1);
}

void NGramModel::add(int ctx_len, Context key, Symbol next, std::uint64_t count) {
  if (ctx_len == 0) {
    unigram_[next] += count;
    unigram_total_ += count;
    return;
  }
  auto& f = tables_[ctx_len - 1][key];
  f.total += count;
  f.next.emplace_back(next, count);
}

void NGramModel::finalize() {
  for (auto& table : tables_)
    for (auto& [key, f] : table) {
      std::sort(f.next.begin(), f.next.end());
      std::size_t w = 0;
      for (std::size_t r = 0; r < f.next.size(); ++r) {
        if (w > 0 && f.next[w - 1].first == f.next[r].first)
          f.next[w - 1].second += f.next[r].second;
        else
          f.next[w++] = f.next[r];
      }
      f.next.resize(w);
    }
}

NGramModel NGramModel::train(const std::vector<std::vector<Symbol>>& sequences,
                             int order, std::size_t num_symbols, double unigram_k) {
  if (order < 1 || order > kMaxOrder)
    throw std::invalid_argument(fmt::format("n-gram order {} outside [1, {}]", order, kMaxOrder));
  if (num_symbols == 0 || num_symbols > kMaxSymbols)
    throw std::invalid_argument("n-gram symbol count out of range");
  if (!(unigram_k > 0.0)) throw std::invalid_argument("unigram_k must be positive");
  if (sequences.empty()) throw std::invalid_argument("n-gram training corpus is empty");

  NGramModel m;
  m.order_ = order;
  m.num_symbols_ = num_symbols;
  m.k_ = unigram_k;
  m.unigram_.assign(m.outcome_count(), 0);
  m.tables_.resize(static_cast<std::size_t>(order - 1));

  // Aggregate first so each (context, next) pair is appended once.
  std::vector<std::map<std::pair<Context, Symbol>, std::uint64_t>> counts(
      static_cast<std::size_t>(order));
  for (const auto& seq : sequences) {
    Context ctx = m.start();
    auto count_one = [&](Symbol s) {
      for (int n = 0; n < order; ++n) ++counts[n][{ctx & m.mask(n), s}];
      ctx = m.advance(ctx, s);
    };
    for (Symbol s : seq) {
      if (s >= num_symbols) throw std::invalid_argument("n-gram symbol out of range");
      count_one(s);
    }
    count_one(m.eos());
  }
  for (int n = 0; n < order; ++n)
    for (const auto& [key, c] : counts[n]) m.add(n, n == 0 ? 0 : key.first, key.second, c);
  m.finalize();
  return m;
}

double NGramModel::log_prob(Context ctx, Symbol next) const {
  const double v = static_cast<double>(outcome_count());
  double p = (static_cast<double>(unigram_.at(next)) + k_) /
             (static_cast<double>(unigram_total_) + k_ * v);
  for (int n = 1; n < order_; ++n) {
    const auto& table = tables_[n - 1];
    const auto it = table.find(ctx & mask(n));
    if (it == table.end()) break;
    const auto& f = it->second;
    const auto pos = std::lower_bound(
        f.next.begin(), f.next.end(), next,
        [](const auto& e, Symbol s) { return e.first < s; });
    const double c = (pos != f.next.end() && pos->first == next)
                         ? static_cast<double>(pos->second) : 0.0;
    const double t = static_cast<double>(f.next.size());
    p = (c + t * p) / (static_cast<double>(f.total) + t);
  }
  return std::log(p);
}

void NGramModel::log_distribution(Context ctx, std::vector<double>& out) const {
  const std::size_t v = outcome_count();
  out.resize(v);
  const double denom = static_cast<double>(unigram_total_) + k_ * static_cast<double>(v);
  for (std::size_t s = 0; s < v; ++s)
    out[s] = (static_cast<double>(unigram_[s]) + k_) / denom;
  for (int n = 1; n < order_; ++n) {
    const auto& table = tables_[n - 1];
    const auto it = table.find(ctx & mask(n));
    if (it == table.end()) break;
    const auto& f = it->second;
    const double t = static_cast<double>(f.next.size());
    const double inv = 1.0 / (static_cast<double>(f.total) + t);
    for (auto& p : out) p *= t * inv;
    for (const auto& [s, c] : f.next) out[s] += static_cast<double>(c) * inv;
  }
  for (auto& p : out) p = std::log(p);
}

double NGramModel::sequence_log_prob(std::span<const Symbol> seq) const {
  Context ctx = start();
  double total = 0.0;
  for (Symbol s : seq) {
    total += log_prob(ctx, s);
    ctx = advance(ctx, s);
  }
  return total + log_prob(ctx, eos());
}

void NGramModel::write(std::ostream& out) const {
  out << "ngram-v1\n"
      << fmt::format("order {}\nsymbols {}\nunigram_k {}\n", order_, num_symbols_, k_);
  std::size_t lines = 0;
  for (auto c : unigram_) lines += c > 0;
  for (const auto& table : tables_)
    for (const auto& [key, f] : table) lines += f.next.size();
  out << "counts " << lines << '\n';
  for (std::size_t s = 0; s < unigram_.size(); ++s)
    if (unigram_[s] > 0) out << "0 " << s << ' ' << unigram_[s] << '\n';
  for (int n = 1; n < order_; ++n) {
    std::vector<Context> keys;
    for (const auto& [key, f] : tables_[n - 1]) keys.push_back(key);
    std::sort(keys.begin(), keys.end());
    for (Context key : keys) {
      std::string prefix = std::to_string(n);
      for (int i = n - 1; i >= 0; --i)
        prefix += ' ' + std::to_string((key >> (16 * i)) & 0xffff);
      for (const auto& [s, c] : tables_[n - 1].at(key).next)
        out << prefix << ' ' << s << ' ' << c << '\n';
    }
  }
}

NGramModel NGramModel::parse(std::istream& in) {
  std::string line;
  auto expect = [&](const std::string& key) -> std::string {
    if (!std::getline(in, line) || line.rfind(key + ' ', 0) != 0)
      throw DataError("n-gram block: expected '" + key + "'");
    return line.substr(key.size() + 1);
  };
  if (!std::getline(in, line) || line != "ngram-v1") throw DataError("n-gram block: bad header");
  NGramModel m;
  try {
    m.order_ = std::stoi(expect("order"));
    m.num_symbols_ = std::stoul(expect("symbols"));
    m.k_ = std::stod(expect("unigram_k"));
  } catch (const std::invalid_argument&) {
    throw DataError("n-gram block: bad header value");
  }
  if (m.order_ < 1 || m.order_ > kMaxOrder || m.num_symbols_ == 0 ||
      m.num_symbols_ > kMaxSymbols || !(m.k_ > 0.0))
    throw DataError("n-gram block: header out of range");
  const std::size_t lines = std::stoul(expect("counts"));
  m.unigram_.assign(m.outcome_count(), 0);
  m.tables_.resize(static_cast<std::size_t>(m.order_ - 1));
  for (std::size_t i = 0; i < lines; ++i) {
    if (!std::getline(in, line)) throw DataError("n-gram block truncated");
    std::istringstream ls(line);
    int n = -1;
    ls >> n;
    if (n < 0 || n >= m.order_) throw DataError("n-gram block: bad context length");
    Context key = 0;
    for (int j = 0; j < n; ++j) {
      std::uint64_t s = 0;
      ls >> s;
      key = (key << 16) | (s & 0xffff);
    }
    std::uint64_t s = 0, c = 0;
    ls >> s >> c;
    if (!ls || s >= m.outcome_count()) throw DataError("n-gram block: bad count line");
    m.add(n, key, static_cast<Symbol>(s), c);
  }
  m.finalize();
  return m;
}

}  // namespace linefix
