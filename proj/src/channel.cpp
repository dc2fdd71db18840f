#include "linefix/channel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "linefix/error.hpp"
#include "linefix/text.hpp"

namespace linefix {

std::vector<EditOp> align_pair(std::u32string_view noisy, std::u32string_view clean) {
  const std::size_t n = noisy.size(), m = clean.size();
  std::vector<std::size_t> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      at(i, j) = std::min({at(i - 1, j - 1) + (noisy[i - 1] == clean[j - 1] ? 0 : 1),
                           at(i - 1, j) + 1, at(i, j - 1) + 1});
  std::vector<EditOp> ops;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const std::size_t here = at(i, j);
    if (i > 0 && j > 0 && noisy[i - 1] == clean[j - 1] && at(i - 1, j - 1) == here) {
      ops.push_back({EditOp::Kind::match, noisy[i - 1], clean[j - 1]});
      --i, --j;
    } else if (i > 0 && j > 0 && at(i - 1, j - 1) + 1 == here) {
      ops.push_back({EditOp::Kind::substitute, noisy[i - 1], clean[j - 1]});
      --i, --j;
    } else if (i > 0 && at(i - 1, j) + 1 == here) {
      ops.push_back({EditOp::Kind::remove, noisy[i - 1], 0});
      --i;
    } else {
      ops.push_back({EditOp::Kind::insert, 0, clean[j - 1]});
      --j;
    }
  }
  std::reverse(ops.begin(), ops.end());
  return ops;
}

std::vector<EditOp> align_pair(std::string_view noisy, std::string_view clean) {
  return align_pair(utf8_to_u32(noisy), utf8_to_u32(clean));
}

ConfusionModel ConfusionModel::train(
    const std::vector<std::pair<std::string, std::string>>& pairs, double k) {
  if (pairs.empty()) throw std::invalid_argument("train_confusion: no pairs");
  if (!(k > 0.0)) throw std::invalid_argument("train_confusion: k must be positive");
  std::vector<std::pair<std::u32string, std::u32string>> decoded;
  decoded.reserve(pairs.size());
  std::set<char32_t> seen;
  for (const auto& [noisy, clean] : pairs) {
    decoded.emplace_back(utf8_to_u32(noisy), utf8_to_u32(clean));
    seen.insert(decoded.back().first.begin(), decoded.back().first.end());
    seen.insert(decoded.back().second.begin(), decoded.back().second.end());
  }
  ConfusionModel model;
  model.symbols_.assign(seen.begin(), seen.end());
  for (std::size_t i = 0; i < model.symbols_.size(); ++i) model.index_[model.symbols_[i]] = i;
  const std::size_t n = model.symbols_.size() + 1;
  Counts c;
  c.match.assign(n, 0);
  c.remove.assign(n, 0);
  c.inserts.assign(n, 0);
  c.subs.assign(n * n, 0);
  for (const auto& [noisy, clean] : decoded) {
    c.stops += clean.size() + 1;
    for (const auto& op : align_pair(noisy, clean)) {
      switch (op.kind) {
        case EditOp::Kind::match: ++c.match[model.id(op.clean)]; break;
        case EditOp::Kind::substitute:
          ++c.subs[model.id(op.clean) * n + model.id(op.noisy)];
          break;
        case EditOp::Kind::insert: ++c.remove[model.id(op.clean)]; break;
        case EditOp::Kind::remove: ++c.inserts[model.id(op.noisy)]; break;
      }
    }
  }
  model.build(std::move(c), k);
  return model;
}

void ConfusionModel::build(Counts counts, double k) {
  k_ = k;
  counts_ = std::move(counts);
  const std::size_t n = symbols_.size() + 1;
  const auto& c = counts_;
  match_.assign(n, 0.0);
  remove_.assign(n, 0.0);
  insert_.assign(n, 0.0);
  sub_.assign(n * n, 0.0);

  // Sources never seen on the clean side borrow pooled rates, substitutions
  // spread evenly over the other classes.
  double pooled_match = 0, pooled_remove = 0, pooled_sub = 0;
  for (std::size_t s = 0; s < n; ++s) {
    pooled_match += static_cast<double>(c.match[s]);
    pooled_remove += static_cast<double>(c.remove[s]);
    for (std::size_t x = 0; x < n; ++x)
      if (x != s) pooled_sub += static_cast<double>(c.subs[s * n + x]);
  }
  const double outcomes = static_cast<double>(n + 1);  // match, remove, n-1 subs
  for (std::size_t s = 0; s < n; ++s) {
    double m = static_cast<double>(c.match[s]);
    double r = static_cast<double>(c.remove[s]);
    double total_sub = 0;
    for (std::size_t x = 0; x < n; ++x)
      if (x != s) total_sub += static_cast<double>(c.subs[s * n + x]);
    const bool unseen = m + r + total_sub == 0.0;
    double per_sub = 0.0;
    if (unseen) {
      m = pooled_match;
      r = pooled_remove;
      per_sub = n > 1 ? pooled_sub / static_cast<double>(n - 1) : 0.0;
      total_sub = pooled_sub;
    }
    const double denom = m + r + total_sub + k * outcomes;
    match_[s] = std::log((m + k) / denom);
    remove_[s] = std::log((r + k) / denom);
    for (std::size_t x = 0; x < n; ++x) {
      if (x == s) {
        sub_[s * n + x] = -std::numeric_limits<double>::infinity();
        continue;
      }
      const double cnt = unseen ? per_sub : static_cast<double>(c.subs[s * n + x]);
      sub_[s * n + x] = std::log((cnt + k) / denom);
    }
  }
  double ins_total = 0;
  for (auto v : c.inserts) ins_total += static_cast<double>(v);
  const double ins_denom = static_cast<double>(c.stops) + ins_total + k * outcomes;
  for (std::size_t x = 0; x < n; ++x)
    insert_[x] = std::log((static_cast<double>(c.inserts[x]) + k) / ins_denom);
  stop_ = std::log((static_cast<double>(c.stops) + k) / ins_denom);
}

double ConfusionModel::log_substitute(char32_t clean, char32_t noisy) const {
  const std::size_t n = symbols_.size() + 1;
  return sub_[id(clean) * n + id(noisy)];
}

double ConfusionModel::log_emit(char32_t clean, char32_t noisy) const {
  if (clean == noisy) return log_match(clean);
  const std::size_t a = id(clean), b = id(noisy);
  // Two distinct out-of-inventory characters share the "other" class.
  if (a == b) return log_match(clean);
  return sub_[a * (symbols_.size() + 1) + b];
}

double ConfusionModel::viterbi(std::u32string_view noisy, std::u32string_view clean) const {
  const std::size_t n = noisy.size(), m = clean.size();
  const double ninf = -std::numeric_limits<double>::infinity();
  std::vector<double> prev(m + 1, ninf), cur(m + 1, ninf);
  prev[0] = 0.0;
  for (std::size_t j = 1; j <= m; ++j) prev[j] = prev[j - 1] + log_remove(clean[j - 1]);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = prev[0] + log_insert(noisy[i - 1]);
    for (std::size_t j = 1; j <= m; ++j)
      cur[j] = std::max({prev[j - 1] + log_emit(clean[j - 1], noisy[i - 1]),
                         prev[j] + log_insert(noisy[i - 1]),
                         cur[j - 1] + log_remove(clean[j - 1])});
    std::swap(prev, cur);
  }
  return prev[m] + static_cast<double>(m + 1) * stop_;
}

double ConfusionModel::viterbi(std::string_view noisy, std::string_view clean) const {
  return viterbi(utf8_to_u32(noisy), utf8_to_u32(clean));
}

std::vector<char32_t> ConfusionModel::likely_sources(char32_t noisy, std::size_t k) const {
  std::vector<std::pair<double, char32_t>> scored;
  scored.reserve(symbols_.size());
  for (char32_t c : symbols_) scored.emplace_back(log_emit(c, noisy), c);
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  std::vector<char32_t> out;
  for (std::size_t i = 0; i < scored.size() && i < k; ++i) out.push_back(scored[i].second);
  return out;
}

void ConfusionModel::write(std::ostream& out) const {
  const std::size_t n = symbols_.size() + 1;
  auto name = [&](std::size_t s) {
    return s == symbols_.size() ? std::string("-")
                                : fmt::format("{:X}", static_cast<std::uint32_t>(symbols_[s]));
  };
  out << "confusion-v1\n" << fmt::format("k {}\n", k_) << "symbols " << symbols_.size();
  for (std::size_t s = 0; s < symbols_.size(); ++s) out << ' ' << name(s);
  out << '\n' << "stops " << counts_.stops << '\n';
  std::vector<std::string> lines;
  for (std::size_t s = 0; s < n; ++s) {
    if (counts_.match[s]) lines.push_back(fmt::format("m {} {}", name(s), counts_.match[s]));
    if (counts_.remove[s]) lines.push_back(fmt::format("r {} {}", name(s), counts_.remove[s]));
    if (counts_.inserts[s]) lines.push_back(fmt::format("i {} {}", name(s), counts_.inserts[s]));
    for (std::size_t x = 0; x < n; ++x)
      if (counts_.subs[s * n + x])
        lines.push_back(fmt::format("s {} {} {}", name(s), name(x), counts_.subs[s * n + x]));
  }
  out << "counts " << lines.size() << '\n';
  for (const auto& l : lines) out << l << '\n';
}

ConfusionModel ConfusionModel::parse(std::istream& in) {
  std::string line;
  auto next = [&]() -> std::istringstream {
    if (!std::getline(in, line)) throw DataError("confusion block truncated");
    return std::istringstream(line);
  };
  if (!std::getline(in, line) || line != "confusion-v1") throw DataError("confusion block: bad header");
  ConfusionModel model;
  std::string key;
  double k = 0;
  auto ks = next();
  if (!(ks >> key >> k) || key != "k" || !(k > 0)) throw DataError("confusion block: bad k");
  auto ss = next();
  std::size_t count = 0;
  if (!(ss >> key >> count) || key != "symbols") throw DataError("confusion block: bad symbols");
  for (std::size_t i = 0; i < count; ++i) {
    std::string hex;
    if (!(ss >> hex)) throw DataError("confusion block: missing symbol");
    const auto cp = static_cast<char32_t>(std::stoul(hex, nullptr, 16));
    if (!model.symbols_.empty() && cp <= model.symbols_.back())
      throw DataError("confusion block: symbols not ascending");
    model.index_[cp] = model.symbols_.size();
    model.symbols_.push_back(cp);
  }
  const std::size_t n = model.symbols_.size() + 1;
  Counts c;
  c.match.assign(n, 0);
  c.remove.assign(n, 0);
  c.inserts.assign(n, 0);
  c.subs.assign(n * n, 0);
  auto st = next();
  if (!(st >> key >> c.stops) || key != "stops") throw DataError("confusion block: bad stops");
  auto cs = next();
  std::size_t lines = 0;
  if (!(cs >> key >> lines) || key != "counts") throw DataError("confusion block: bad counts");
  auto sym = [&](const std::string& s) -> std::size_t {
    if (s == "-") return model.symbols_.size();
    const auto it = model.index_.find(static_cast<char32_t>(std::stoul(s, nullptr, 16)));
    if (it == model.index_.end()) throw DataError("confusion block: unknown symbol " + s);
    return it->second;
  };
  for (std::size_t i = 0; i < lines; ++i) {
    auto ls = next();
    std::string kind, a, b;
    std::uint64_t v = 0;
    ls >> kind >> a;
    if (kind == "s") ls >> b;
    if (!(ls >> v)) throw DataError("confusion block: bad count line '" + line + "'");
    if (kind == "m") c.match[sym(a)] = v;
    else if (kind == "r") c.remove[sym(a)] = v;
    else if (kind == "i") c.inserts[sym(a)] = v;
    else if (kind == "s") c.subs[sym(a) * n + sym(b)] = v;
    else throw DataError("confusion block: unknown count kind " + kind);
  }
  model.build(std::move(c), k);
  return model;
}

}  // namespace linefix
