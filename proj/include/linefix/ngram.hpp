#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace linefix {

using Symbol = std::uint32_t;

// Interpolated Witten-Bell n-gram model over dense symbol ids with an add-k
// unigram base. Outcomes are the user symbols [0, num_symbols) plus EOS;
// BOS only ever appears in contexts. Every conditional distribution sums to
// one over the outcomes.
class NGramModel {
 public:
  // The last order-1 symbols, 16 bits each, most recent in the low bits.
  using Context = std::uint64_t;

  static constexpr int kMaxOrder = 5;
  static constexpr std::size_t kMaxSymbols = 65534;

  NGramModel() = default;

  // Each sequence is scored as BOS^(order-1) seq EOS. Throws
  // std::invalid_argument when order is outside [1, 5], the corpus is
  // empty or a symbol is out of range.
  static NGramModel train(const std::vector<std::vector<Symbol>>& sequences,
                          int order, std::size_t num_symbols, double unigram_k = 0.1);

  int order() const { return order_; }
  std::size_t num_symbols() const { return num_symbols_; }
  std::size_t outcome_count() const { return num_symbols_ + 1; }
  Symbol eos() const { return static_cast<Symbol>(num_symbols_); }
  Symbol bos() const { return static_cast<Symbol>(num_symbols_ + 1); }
  double unigram_k() const { return k_; }

  Context start() const;
  Context advance(Context ctx, Symbol next) const;

  double log_prob(Context ctx, Symbol next) const;
  // Natural-log probabilities of every outcome; out is resized to
  // outcome_count().
  void log_distribution(Context ctx, std::vector<double>& out) const;
  double sequence_log_prob(std::span<const Symbol> seq) const;

  void write(std::ostream& out) const;
  static NGramModel parse(std::istream& in);

 private:
  struct Followers {
    std::uint64_t total = 0;
    std::vector<std::pair<Symbol, std::uint64_t>> next;  // sorted by symbol
  };

  void add(int ctx_len, Context key, Symbol next, std::uint64_t count);
  void finalize();
  Context mask(int ctx_len) const;

  int order_ = 0;
  std::size_t num_symbols_ = 0;
  double k_ = 0.1;
  std::vector<std::uint64_t> unigram_;  // per outcome
  std::uint64_t unigram_total_ = 0;
  // tables_[n-1] holds contexts of length n, 1 <= n < order.
  std::vector<std::unordered_map<Context, Followers>> tables_;
};

}  // namespace linefix
