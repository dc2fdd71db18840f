#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "linefix/channel.hpp"
#include "linefix/lexicon.hpp"
#include "linefix/ngram.hpp"
#include "linefix/tokenize.hpp"

namespace linefix {

enum class CorrectorMode { byte, token };

std::string_view to_string(CorrectorMode mode);
CorrectorMode parse_corrector_mode(std::string_view name);

using TextPair = std::pair<std::string, std::string>;  // (noisy, clean)

struct CorrectorParams {
  CorrectorMode mode = CorrectorMode::byte;
  int order = 5;               // LM order; 3 is the usual token-mode choice
  double smoothing_k = 0.1;    // add-k for the channel and the unigram base
  double lm_weight = 1.0;
  int beam_width = 8;
  int edit_radius = 2;         // token mode
  int candidates = 8;          // byte mode: LM proposals per step
  int max_deletions = 1;       // byte mode: restored characters per noisy position
  std::size_t bpe_vocab = 2000;

  void validate() const;
  static CorrectorParams defaults(CorrectorMode mode);
};

// Byte mode models code points; characters outside `chars` share one
// unknown symbol. Token mode models BPE ids, the unknown id included.
struct LanguageModel {
  CorrectorMode mode = CorrectorMode::byte;
  std::u32string chars;  // sorted, byte mode only
  BpeTokenizer tokenizer;
  NGramModel ngram;

  Symbol char_symbol(char32_t cp) const;
  std::vector<Symbol> symbols(std::string_view text) const;
  double score(std::string_view text) const;
};

// Token mode uses `tokenizer` when given, otherwise trains one on the corpus
// with `bpe_vocab` entries.
LanguageModel train_lm(const std::vector<std::string>& clean_corpus, int order,
                       CorrectorMode mode, double unigram_k = 0.1,
                       const BpeTokenizer* tokenizer = nullptr, std::size_t bpe_vocab = 2000);

ConfusionModel train_confusion(const std::vector<TextPair>& pairs, double k = 0.1);

struct CorrectorCheckpoint {
  CorrectorParams params;
  ConfusionModel channel;
  LanguageModel lm;
  Lexicon lexicon;  // token mode only
  std::optional<double> validation_cer;

  // Serialization of everything except the validation CER.
  std::string body() const;
  std::string digest() const;
  void write(std::ostream& out) const;
  static CorrectorCheckpoint parse(std::istream& in);
  void save(const std::string& path) const;
  static CorrectorCheckpoint load(const std::string& path);
};

// Token mode takes its lexicon and tokenizer from the arguments when given,
// else from the clean side of `pairs`.
CorrectorCheckpoint train_corrector(const std::vector<TextPair>& pairs,
                                    const CorrectorParams& params,
                                    const Lexicon* lexicon = nullptr,
                                    const BpeTokenizer* tokenizer = nullptr);

// Same trained models under a different decoding configuration.
CorrectorCheckpoint with_params(const CorrectorCheckpoint& base, const CorrectorParams& params);

// Beam search for argmax channel + lm_weight * LM. Throws
// std::invalid_argument when beam_width < 1.
std::string correct(std::string_view noisy, const CorrectorCheckpoint& ckpt, int beam_width);
inline std::string correct(std::string_view noisy, const CorrectorCheckpoint& ckpt) {
  return correct(noisy, ckpt, ckpt.params.beam_width);
}
std::vector<std::string> correct_lines(const std::vector<std::string>& noisy,
                                       const CorrectorCheckpoint& ckpt, std::size_t jobs = 1);

// Fills in every candidate's validation CER and returns the index of the
// lowest, ties to the smaller digest. Throws std::invalid_argument on empty
// input.
std::size_t select_checkpoint(std::vector<CorrectorCheckpoint>& candidates,
                              const std::vector<TextPair>& validation, std::size_t jobs = 1);

}  // namespace linefix
