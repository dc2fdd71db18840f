#include "linefix/decode.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "linefix/ctc.hpp"
#include "linefix/error.hpp"
#include "linefix/text.hpp"

namespace linefix {

void DecodeConfig::validate() const {
  if (!(nms_iou_threshold >= 0.0 && nms_iou_threshold <= 1.0))
    throw std::invalid_argument("nms_iou_threshold must lie in [0, 1]");
  if (max_queries < 1) throw std::invalid_argument("max_queries must be >= 1");
}

void DetectorSimConfig::validate() const {
  for (double p : {p_substitute, p_duplicate, p_spurious, p_drop})
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("detector probabilities must lie in [0, 1]");
  for (double j : {jitter_x, jitter_y, jitter_size})
    if (!(j >= 0.0 && j <= 1.0))
      throw std::invalid_argument("jitter magnitudes must lie in [0, 1]");
}

std::vector<Detection> sort_by_x(std::span<const Detection> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dets[a].box.cx() != dets[b].box.cx())
      return dets[a].box.cx() < dets[b].box.cx();
    return dets[a].box.cy() < dets[b].box.cy();
  });
  std::vector<Detection> out;
  out.reserve(dets.size());
  for (std::size_t i : order) out.push_back(dets[i]);
  return out;
}

std::vector<Detection> nms(std::span<const Detection> dets,
                           const DecodeConfig& cfg) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].score > dets[b].score;
  });
  std::vector<bool> keep(dets.size(), false);
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return iou(dets[i].box, dets[k].box) > cfg.nms_iou_threshold;
    });
    if (!suppressed) {
      keep[i] = true;
      kept.push_back(i);
    }
  }
  std::vector<Detection> out;
  out.reserve(kept.size());
  for (std::size_t i = 0; i < dets.size(); ++i)
    if (keep[i]) out.push_back(dets[i]);
  return out;
}

std::string decode_line(std::span<const Detection> dets, const Alphabet& alphabet,
                        const DecodeConfig& cfg) {
  cfg.validate();
  std::vector<Detection> pool(dets.begin(), dets.end());
  if (pool.size() > cfg.max_queries) {
    std::stable_sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) {
      return a.score > b.score;
    });
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(cfg.max_queries), pool.end());
  }
  const auto sorted = sort_by_x(pool);
  const auto survivors = nms(sorted, cfg);
  LabelSeq labels;
  labels.reserve(survivors.size());
  for (const auto& d : survivors)
    if (d.score >= cfg.score_floor) labels.push_back(d.class_index);
  if (cfg.interleave_blanks)
    labels = interleave_blanks(labels, alphabet.no_object_index());
  return ctc_collapse(labels, alphabet);
}

namespace {

double symmetric(Rng& rng, double magnitude) {
  return magnitude * (2.0 * uniform01(rng) - 1.0);
}

}  // namespace

std::vector<Detection> simulate_detections(std::string_view clean,
                                           const Alphabet& alphabet,
                                           const DetectorSimConfig& cfg,
                                           Rng& rng) {
  cfg.validate();
  const std::u32string text = utf8_to_u32(clean);
  std::vector<ClassIndex> classes;
  classes.reserve(text.size());
  for (char32_t cp : text) {
    const auto idx = alphabet.index_of(cp);
    if (!idx)
      throw DataError(fmt::format("symbol U+{:04X} not in alphabet",
                                  static_cast<std::uint32_t>(cp)));
    classes.push_back(*idx);
  }

  std::vector<Detection> out;
  const std::size_t n = text.size();
  if (n == 0) return out;
  const double slot = 1.0 / static_cast<double>(n);
  const double jitter_x = cfg.ordered ? std::min(cfg.jitter_x, 0.05) : cfg.jitter_x;
  const auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
  const auto clamp_size = [](double v) { return std::clamp(v, 1e-6, 1.0); };

  for (std::size_t i = 0; i < n; ++i) {
    const bool dropped = bernoulli(rng, cfg.p_drop);
    const bool substituted = bernoulli(rng, cfg.p_substitute);
    const bool duplicated = bernoulli(rng, cfg.p_duplicate);
    const bool spurious = bernoulli(rng, cfg.p_spurious);

    const double cx = clamp01((static_cast<double>(i) + 0.5) * slot +
                              symmetric(rng, jitter_x) * slot);
    const double cy = clamp01(0.5 + symmetric(rng, cfg.jitter_y));
    const double w = clamp_size(0.8 * slot * (1.0 + symmetric(rng, cfg.jitter_size)));
    const double h = clamp_size(0.6 * (1.0 + symmetric(rng, cfg.jitter_size)));
    const double score = 0.6 + 0.4 * uniform01(rng);

    ClassIndex cls = classes[i];
    if (substituted) {
      const auto it = cfg.confusions.find(text[i]);
      if (it != cfg.confusions.end() && !it->second.empty()) {
        const char32_t target = it->second[uniform_index(rng, it->second.size())];
        const auto idx = alphabet.index_of(target);
        if (!idx) throw DataError("confusion target not in alphabet");
        cls = *idx;
      } else if (alphabet.printable_size() > 1) {
        const std::size_t k = uniform_index(rng, alphabet.printable_size() - 1);
        cls = k >= classes[i] ? k + 1 : k;
      }
    }
    if (!dropped) {
      out.push_back({BoundingBox(cx, cy, w, h), cls, score, std::nullopt});
      if (duplicated) {
        const double dx = symmetric(rng, 0.02) * slot;
        out.push_back({BoundingBox(clamp01(cx + dx), cy, w, h), cls,
                       score * 0.9, std::nullopt});
      }
    }
    if (spurious) {
      const double gap_cx = clamp01(static_cast<double>(i + 1) * slot);
      out.push_back({BoundingBox(gap_cx, 0.5, clamp_size(0.08 * slot), 0.3),
                     alphabet.no_object_index(), 0.5 * uniform01(rng),
                     std::nullopt});
    }
  }
  return out;
}

}  // namespace linefix
