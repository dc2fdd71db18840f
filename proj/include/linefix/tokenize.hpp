#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace linefix {

std::vector<std::uint8_t> byte_encode(std::string_view text);
// Throws DataError when the bytes are not valid UTF-8.
std::string byte_decode(std::span<const std::uint8_t> bytes);

using TokenId = std::uint32_t;

// Pre-tokenization: maximal runs of whitespace and maximal runs of
// non-whitespace. Merges never cross a chunk boundary.
std::vector<std::string_view> pretokenize(std::string_view text);

// Byte-level BPE. Ids: base bytes in ascending byte order, then one id per
// merge in training order, then the unknown id. Every token's byte string is
// unique.
class BpeTokenizer {
 public:
  BpeTokenizer() = default;

  // Throws std::invalid_argument for an empty corpus or a target below the
  // base inventory size.
  static BpeTokenizer train(const std::vector<std::string>& corpus,
                            std::size_t target_vocab_size);

  std::vector<TokenId> encode(std::string_view text) const;
  // Unknown ids decode to U+FFFD. Throws std::out_of_range for ids past unk.
  std::string decode(std::span<const TokenId> ids) const;

  std::size_t base_size() const { return base_.size(); }
  // Base inventory plus merges; the unknown id is not counted.
  std::size_t vocab_size() const { return tokens_.size(); }
  TokenId unk_id() const { return static_cast<TokenId>(tokens_.size()); }
  const std::vector<std::pair<TokenId, TokenId>>& merges() const { return merges_; }
  const std::string& token_bytes(TokenId id) const { return tokens_.at(id); }
  const std::vector<std::uint8_t>& base() const { return base_; }

  // "bpe-v1" header, "base N" block of escaped byte tokens, then "merges M"
  // and one "left right" line per merge. Bytes outside 0x21..0x7E and the
  // backslash are written as \xHH.
  void write(std::ostream& out) const;
  std::string serialize() const;
  static BpeTokenizer parse(std::istream& in);
  std::string digest() const;

 private:
  void index();
  void encode_chunk(std::string_view chunk, std::vector<TokenId>& out) const;

  std::vector<std::uint8_t> base_;
  std::vector<std::string> tokens_;
  std::vector<std::pair<TokenId, TokenId>> merges_;
  std::vector<TokenId> byte_to_id_;  // 256 entries; unk for bytes not in base
  std::vector<std::pair<std::uint64_t, std::uint32_t>> ranks_;  // sorted
};

inline BpeTokenizer bpe_train(const std::vector<std::string>& corpus,
                              std::size_t target_vocab_size) {
  return BpeTokenizer::train(corpus, target_vocab_size);
}
inline std::vector<TokenId> bpe_encode(std::string_view text,
                                       const BpeTokenizer& tok) {
  return tok.encode(text);
}
inline std::string bpe_decode(std::span<const TokenId> ids,
                              const BpeTokenizer& tok) {
  return tok.decode(ids);
}

// Tokens spent on whitespace-separated words divided by the number of such
// words. Throws std::invalid_argument when the corpus has no words.
double fragmentation(const std::vector<std::string>& corpus,
                     const BpeTokenizer& tok);
// Same quantity for the byte codec: mean word length in bytes.
double byte_fragmentation(const std::vector<std::string>& corpus);

}  // namespace linefix
