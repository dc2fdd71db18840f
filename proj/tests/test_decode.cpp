#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "linefix/decode.hpp"
#include "linefix/error.hpp"
#include "linefix/rng.hpp"

using namespace linefix;

namespace {

std::vector<Detection> row(const Alphabet& a, std::string_view text) {
  std::vector<Detection> out;
  const double slot = 1.0 / static_cast<double>(text.size());
  for (std::size_t i = 0; i < text.size(); ++i)
    out.push_back({BoundingBox((i + 0.5) * slot, 0.5, 0.8 * slot, 0.6),
                   *a.index_of(static_cast<char32_t>(text[i])), 0.9, std::nullopt});
  return out;
}

}  // namespace

TEST(DecodeLine, BlankInterleavingKeepsDoubledLetters) {
  const Alphabet& a = default_alphabet();
  DecodeConfig cfg;
  EXPECT_EQ(decode_line(row(a, "book"), a, cfg), "book");
  cfg.interleave_blanks = false;
  EXPECT_EQ(decode_line(row(a, "book"), a, cfg), "bok");
}

TEST(DecodeLine, NoObjectDetectionsActAsSeparators) {
  const Alphabet& a = default_alphabet();
  DecodeConfig cfg;
  cfg.interleave_blanks = false;
  auto dets = row(a, "oxo");
  dets[1].class_index = a.no_object_index();
  EXPECT_EQ(decode_line(dets, a, cfg), "oo");
}

TEST(DecodeLine, ScoreFloorDropsWeakDetections) {
  const Alphabet& a = default_alphabet();
  DecodeConfig cfg;
  cfg.score_floor = 0.5;
  auto dets = row(a, "cat");
  dets[1].score = 0.2;
  EXPECT_EQ(decode_line(dets, a, cfg), "ct");
}

TEST(Nms, ThresholdIsStrict) {
  DecodeConfig cfg;
  // Same height, widths 0.4, offsets chosen for IoU 0.6 and for IoU 0.3.
  const Detection hi{BoundingBox::from_corners(0.3, 0.3, 0.7, 0.7), 0, 0.9, std::nullopt};
  const Detection close{BoundingBox::from_corners(0.4, 0.3, 0.8, 0.7), 1, 0.8, std::nullopt};
  const double s = 0.4 * (1 - 0.3) / (1 + 0.3);
  const Detection far{BoundingBox::from_corners(0.3 + s, 0.3, 0.7 + s, 0.7), 2, 0.8, std::nullopt};
  ASSERT_NEAR(iou(hi.box, far.box), 0.3, 1e-12);

  std::vector<Detection> pair1{close, hi};
  const auto kept1 = nms(pair1, cfg);
  ASSERT_EQ(kept1.size(), 1u);
  EXPECT_EQ(kept1[0].class_index, 0u);

  std::vector<Detection> pair2{hi, far};
  EXPECT_EQ(nms(pair2, cfg).size(), 2u);
  cfg.nms_iou_threshold = 0.25;
  EXPECT_EQ(nms(pair2, cfg).size(), 1u);
}

TEST(Nms, SurvivorsAreNonOverlappingAndKeepInputOrder) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  DecodeConfig cfg;
  for (int t = 0; t < 200; ++t) {
    std::vector<Detection> dets;
    for (int i = 0; i < 12; ++i)
      dets.push_back({BoundingBox(u(gen), 0.5, 0.1, 0.5), static_cast<ClassIndex>(i), u(gen),
                      std::nullopt});
    const auto kept = nms(dets, cfg);
    ASSERT_FALSE(kept.empty());
    const auto top = std::max_element(dets.begin(), dets.end(),
                                      [](auto& x, auto& y) { return x.score < y.score; });
    EXPECT_TRUE(std::find(kept.begin(), kept.end(), *top) != kept.end());
    for (std::size_t i = 0; i < kept.size(); ++i) {
      for (std::size_t j = i + 1; j < kept.size(); ++j) {
        EXPECT_LE(iou(kept[i].box, kept[j].box), cfg.nms_iou_threshold);
        EXPECT_LT(kept[i].class_index, kept[j].class_index);
      }
    }
  }
}

TEST(DecodeLine, InputOrderDoesNotMatter) {
  const Alphabet& a = default_alphabet();
  DetectorSimConfig sim;
  sim.p_duplicate = 0.2;
  sim.p_spurious = 0.2;
  DecodeConfig cfg;
  std::mt19937_64 shuffle(9);
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng rng = make_rng(s);
    auto dets = simulate_detections("Call me Ishmael. Some years ago", a, sim, rng);
    const std::string expected = decode_line(dets, a, cfg);
    std::shuffle(dets.begin(), dets.end(), shuffle);
    EXPECT_EQ(decode_line(dets, a, cfg), expected);
  }
}

TEST(DecodeLine, NoiselessSimulationIsRecovered) {
  const Alphabet& a = default_alphabet();
  const DetectorSimConfig sim;
  const DecodeConfig cfg;
  for (std::uint64_t s = 0; s < 200; ++s) {
    Rng rng = make_rng(77, s);
    std::u32string text;
    const std::size_t n = 1 + uniform_index(rng, 40);
    while (text.size() < n) {
      const char32_t c = a.codepoint_at(uniform_index(rng, a.printable_size()));
      text += c;
      if (bernoulli(rng, 0.3)) text += c;
    }
    std::string utf8;
    for (char32_t c : text) utf8 += a.symbol_at(*a.index_of(c));
    Rng det = make_rng(78, s);
    ASSERT_EQ(decode_line(simulate_detections(utf8, a, sim, det), a, cfg), utf8);
  }
}

TEST(DecodeLine, MaxQueriesKeepsTheHighestScores) {
  const Alphabet& a = default_alphabet();
  DecodeConfig cfg;
  cfg.max_queries = 2;
  auto dets = row(a, "abc");
  dets[0].score = 0.1;
  EXPECT_EQ(decode_line(dets, a, cfg), "bc");
}

TEST(SimulateDetections, RejectsUnknownSymbolsAndBadConfig) {
  const Alphabet& a = default_alphabet();
  Rng rng = make_rng(1);
  EXPECT_THROW(simulate_detections("a\xe4\xb8\x80", a, DetectorSimConfig{}, rng), DataError);
  DetectorSimConfig bad;
  bad.p_drop = 2.0;
  EXPECT_THROW(simulate_detections("a", a, bad, rng), std::invalid_argument);
  DecodeConfig bad_decode;
  bad_decode.nms_iou_threshold = -0.1;
  EXPECT_THROW(bad_decode.validate(), std::invalid_argument);
  EXPECT_TRUE(simulate_detections("", a, DetectorSimConfig{}, rng).empty());
}
