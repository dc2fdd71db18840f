#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "linefix/corrector.hpp"
#include "linefix/decode.hpp"
#include "linefix/noise.hpp"

namespace linefix {

enum class Orthography { modern, archaic };

// Every tunable of a run. Loaded from a sectioned INI file; `dump` prints
// all values in the same format, so dump -> load is the identity.
struct PipelineConfig {
  // [paths]
  std::string corpus = "data/moby_dick_sample.txt";
  std::string work_dir = "work";
  // [run]
  std::optional<std::uint64_t> seed;  // required when loading
  std::size_t jobs = 1;
  // [channel]
  ChannelKind channel = ChannelKind::random;
  NoiseChannelConfig random;
  std::string channel_rules;  // empty: built-in table for cursive/archaic
  double rule_scale = 1.0;
  double p_augment = 0.2;
  // [domain] Archaic orthography rewrites the clean side before any noise.
  Orthography orthography = Orthography::modern;
  std::string domain_rules;
  // [corrector]
  std::vector<CorrectorMode> modes{CorrectorMode::byte, CorrectorMode::token};
  int byte_order = 5;
  int token_order = 3;
  double smoothing_k = 0.1;
  std::vector<double> lm_weights{0.5, 0.75, 1.0};
  int beam_width = 8;
  int edit_radius = 2;
  int candidates = 8;
  int max_deletions = 1;
  std::size_t bpe_vocab = 2000;
  // [decode]
  DecodeConfig decode;
  // [detector]
  DetectorSimConfig detector = [] {
    DetectorSimConfig d;
    d.p_substitute = 0.02;
    d.p_duplicate = 0.02;
    d.p_spurious = 0.05;
    d.p_drop = 0.01;
    return d;
  }();
  // [report]
  bool nfc = false;

  void validate() const;
  std::uint64_t required_seed() const;
  NoiseChannel noise_channel() const;
  ConfusionTable domain_table() const;
  CorrectorParams params(CorrectorMode mode, double lm_weight) const;
};

std::string_view to_string(Orthography o);

// Throws UsageError for unknown sections or keys and DataError for values
// that do not parse.
PipelineConfig load_config(const std::string& path);
PipelineConfig parse_config(std::istream& in);
std::string dump_config(const PipelineConfig& cfg);

}  // namespace linefix
