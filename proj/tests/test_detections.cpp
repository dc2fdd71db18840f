#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>

#include "linefix/detections.hpp"
#include "linefix/error.hpp"

using namespace linefix;

namespace {

// Rectangle arithmetic on corner tuples, kept apart from the library's
// center-form implementation.
struct Rect {
  double x0, y0, x1, y1;
};

double area(const Rect& r) { return (r.x1 - r.x0) * (r.y1 - r.y0); }

double overlap(const Rect& a, const Rect& b) {
  const double w = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double h = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  return w > 0 && h > 0 ? w * h : 0.0;
}

double oracle_iou(const Rect& a, const Rect& b) {
  const double i = overlap(a, b);
  return i / (area(a) + area(b) - i);
}

double oracle_giou(const Rect& a, const Rect& b) {
  const double i = overlap(a, b);
  const double u = area(a) + area(b) - i;
  const Rect hull{std::min(a.x0, b.x0), std::min(a.y0, b.y0), std::max(a.x1, b.x1),
                  std::max(a.y1, b.y1)};
  return i / u - (area(hull) - u) / area(hull);
}

BoundingBox box(const Rect& r) { return BoundingBox::from_corners(r.x0, r.y0, r.x1, r.y1); }

Rect random_rect(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double a = u(gen), b = u(gen), c = u(gen), d = u(gen);
  if (a > b) std::swap(a, b);
  if (c > d) std::swap(c, d);
  b = std::max(b, a + 1e-3);
  d = std::max(d, c + 1e-3);
  return {a, c, std::min(b, 1.0), std::min(d, 1.0)};
}

}  // namespace

TEST(Alphabet, DefaultInventoryHas167PrintableClasses) {
  const Alphabet& a = default_alphabet();
  EXPECT_EQ(a.printable_size(), 167u);
  EXPECT_EQ(a.class_count(), 168u);
  EXPECT_EQ(a.no_object_index(), 167u);
  EXPECT_EQ(a.version(), "latin167-v1");
  EXPECT_TRUE(a.contains(U' '));
  EXPECT_TRUE(a.contains(U'ſ'));
  EXPECT_TRUE(a.contains(U'é'));
}

TEST(Alphabet, IndexAndSymbolRoundTrip) {
  const Alphabet& a = default_alphabet();
  for (ClassIndex i = 0; i < a.printable_size(); ++i) {
    const auto sym = a.symbol_at(i);
    ASSERT_EQ(a.index_of(sym), i);
    ASSERT_EQ(a.index_of(a.codepoint_at(i)), i);
  }
}

TEST(Alphabet, NoObjectHasNoGlyph) {
  const Alphabet& a = default_alphabet();
  EXPECT_THROW(a.symbol_at(a.no_object_index()), std::out_of_range);
  EXPECT_THROW(a.symbol_at(1000), std::out_of_range);
  EXPECT_FALSE(a.index_of(U'一').has_value());
}

TEST(Alphabet, RejectsDuplicatesAndMultiCodePointSymbols) {
  EXPECT_THROW(Alphabet({"a", "b", "a"}), std::invalid_argument);
  EXPECT_THROW(Alphabet({"ab"}), std::invalid_argument);
  EXPECT_THROW(Alphabet({""}), std::invalid_argument);
}

TEST(BoundingBox, RejectsDegenerateAndOutOfRange) {
  EXPECT_THROW(BoundingBox(0.5, 0.5, 0.0, 0.1), std::invalid_argument);
  EXPECT_THROW(BoundingBox(0.5, 0.5, 0.1, -0.1), std::invalid_argument);
  EXPECT_THROW(BoundingBox(1.5, 0.5, 0.1, 0.1), std::invalid_argument);
  EXPECT_THROW(BoundingBox(0.5, 0.5, 1.5, 0.1), std::invalid_argument);
  EXPECT_NO_THROW(BoundingBox(0.5, 0.5, 1.0, 1.0));
}

TEST(Geometry, WorkedExamples) {
  const Rect a{0.3, 0.3, 0.7, 0.7}, b{0.4, 0.3, 0.8, 0.7};
  EXPECT_NEAR(oracle_iou(a, b), 0.6, 1e-12);
  EXPECT_NEAR(iou(box(a), box(b)), 0.6, 1e-12);

  // Touching halves: no overlap, hull equals the union.
  const Rect left{0.0, 0.0, 0.5, 1.0}, right{0.5, 0.0, 1.0, 1.0};
  EXPECT_NEAR(iou(box(left), box(right)), 0.0, 1e-12);
  EXPECT_NEAR(giou(box(left), box(right)), 0.0, 1e-12);

  // Far corners of the unit square.
  const Rect lo{0.0, 0.0, 0.1, 0.1}, hi{0.9, 0.9, 1.0, 1.0};
  EXPECT_NEAR(oracle_giou(lo, hi), -0.98, 1e-12);
  EXPECT_NEAR(giou(box(lo), box(hi)), -0.98, 1e-12);

  EXPECT_NEAR(l1_box(BoundingBox(0.5, 0.5, 0.2, 0.2), BoundingBox(0.6, 0.4, 0.3, 0.1)), 0.4,
              1e-12);
  EXPECT_NEAR(iou(box(a), box(a)), 1.0, 1e-12);
  EXPECT_NEAR(giou(box(a), box(a)), 1.0, 1e-12);
}

TEST(Geometry, RandomBoxesAgreeWithOracleAndKeepInvariants) {
  std::mt19937_64 gen(11);
  for (int t = 0; t < 3000; ++t) {
    const Rect ra = random_rect(gen), rb = random_rect(gen), rc = random_rect(gen);
    const BoundingBox a = box(ra), b = box(rb), c = box(rc);
    const double i = iou(a, b), g = giou(a, b);
    ASSERT_NEAR(i, oracle_iou(ra, rb), 1e-9);
    ASSERT_NEAR(g, oracle_giou(ra, rb), 1e-9);
    ASSERT_GE(i, 0.0);
    ASSERT_LE(i, 1.0);
    ASSERT_GT(g, -1.0);
    ASSERT_LE(g, i + 1e-12);
    ASSERT_DOUBLE_EQ(i, iou(b, a));
    ASSERT_DOUBLE_EQ(g, giou(b, a));
    ASSERT_DOUBLE_EQ(l1_box(a, b), l1_box(b, a));
    ASSERT_LE(l1_box(a, c), l1_box(a, b) + l1_box(b, c) + 1e-12);
  }
}

TEST(Detection, ValidateChecksInvariants) {
  const Alphabet& a = default_alphabet();
  const BoundingBox b(0.5, 0.5, 0.1, 0.5);
  EXPECT_NO_THROW(validate(Detection{b, 3, 0.9, std::nullopt}, a));
  EXPECT_THROW(validate(Detection{b, 168, 0.9, std::nullopt}, a), std::invalid_argument);
  EXPECT_THROW(validate(Detection{b, 3, 1.5, std::nullopt}, a), std::invalid_argument);

  std::vector<double> probs(a.class_count(), 0.0);
  probs[3] = 0.7;
  probs[4] = 0.3;
  EXPECT_NO_THROW(validate(Detection{b, 3, 0.7, probs}, a));
  EXPECT_THROW(validate(Detection{b, 4, 0.3, probs}, a), std::invalid_argument);
  probs[4] = 0.5;
  EXPECT_THROW(validate(Detection{b, 3, 0.7, probs}, a), std::invalid_argument);
  EXPECT_THROW(validate(Detection{b, 3, 0.7, std::vector<double>{1.0}}, a),
               std::invalid_argument);
}

TEST(DetectionsJsonl, RoundTripsThroughText) {
  const Alphabet& a = default_alphabet();
  std::vector<double> probs(a.class_count(), 0.0);
  probs[*a.index_of(U'q')] = 0.75;
  probs[a.no_object_index()] = 0.25;
  std::vector<LineDetections> lines{
      {0,
       {Detection{BoundingBox(0.1, 0.5, 0.05, 0.8), *a.index_of(U'ſ'), 0.875, std::nullopt},
        Detection{BoundingBox(0.2, 0.5, 0.05, 0.8), *a.index_of(U'q'), 0.75, probs}}},
      {4, {Detection{BoundingBox(0.3, 0.25, 0.125, 0.5), a.no_object_index(), 0.5,
                     std::nullopt}}}};
  std::stringstream ss;
  write_detections_jsonl(ss, lines, a);
  const auto back = read_detections_jsonl(ss, a);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].line_id, 0);
  EXPECT_EQ(back[1].line_id, 4);
  EXPECT_EQ(back[0].detections, lines[0].detections);
  EXPECT_EQ(back[1].detections, lines[1].detections);
}

TEST(DetectionsJsonl, MalformedRecordNamesItsLine) {
  const Alphabet& a = default_alphabet();
  std::istringstream in(
      "{\"line_id\":0,\"cx\":0.5,\"cy\":0.5,\"w\":0.1,\"h\":0.1,\"class\":\"a\",\"score\":1}\n"
      "{\"line_id\":0,\"cx\":0.5,\"cy\":0.5,\"w\":0.1,\"class\":\"a\",\"score\":1}\n");
  try {
    read_detections_jsonl(in, a);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  std::istringstream unknown(
      "{\"cx\":0.5,\"cy\":0.5,\"w\":0.1,\"h\":0.1,\"class\":\"\xe4\xb8\x80\",\"score\":1}\n");
  EXPECT_THROW(read_detections_jsonl(unknown, a), DataError);
  std::istringstream garbage("not json\n");
  EXPECT_THROW(read_detections_jsonl(garbage, a), DataError);
}
