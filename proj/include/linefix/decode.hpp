#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "linefix/detections.hpp"
#include "linefix/rng.hpp"

namespace linefix {

struct DecodeConfig {
  double nms_iou_threshold = 0.4;
  double score_floor = 0.0;
  std::size_t max_queries = 900;
  bool interleave_blanks = true;

  void validate() const;
};

// Stand-in for a trained character detector: turns clean text into a
// detection set with controllable error processes.
struct DetectorSimConfig {
  double p_substitute = 0.0;
  double p_duplicate = 0.0;
  double p_spurious = 0.0;
  double p_drop = 0.0;
  // Substitution targets per source character; characters without an entry
  // are replaced uniformly by another printable class.
  std::map<char32_t, std::u32string> confusions;
  // Jitter magnitudes as fractions of the per-character slot width (x) or of
  // the line height (y, size).
  double jitter_x = 0.05;
  double jitter_y = 0.05;
  double jitter_size = 0.05;
  // When true, x jitter is clamped so the left-to-right order of characters
  // survives. False allows boxes to cross for stress tests.
  bool ordered = true;
  std::uint64_t seed = 0;

  void validate() const;
};

// Ascending cx; ties by cy, then by original position.
std::vector<Detection> sort_by_x(std::span<const Detection> dets);

// Greedy class-agnostic suppression in descending score order: a box is
// dropped when its IoU with an already kept box exceeds the threshold.
// Survivors keep their input order.
std::vector<Detection> nms(std::span<const Detection> dets,
                           const DecodeConfig& cfg);

// sort_by_x -> nms -> score floor -> no-object as blank -> optional blank
// interleaving -> CTC collapse.
std::string decode_line(std::span<const Detection> dets, const Alphabet& alphabet,
                        const DecodeConfig& cfg);

// One jittered detection per surviving character of `clean`, plus duplicate
// and spurious no-object detections per `cfg`. Throws DataError when `clean`
// has a symbol outside the alphabet.
std::vector<Detection> simulate_detections(std::string_view clean,
                                           const Alphabet& alphabet,
                                           const DetectorSimConfig& cfg,
                                           Rng& rng);

}  // namespace linefix
