#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace linefix {

using ClassIndex = std::size_t;

// Ordered inventory of printable character classes. The class right after
// the last printable symbol is the no-object class, which also serves as
// the CTC blank.
class Alphabet {
 public:
  // Each symbol must be exactly one code point; duplicates are rejected.
  explicit Alphabet(const std::vector<std::string>& symbols,
                    std::string version = "custom");

  // Canonical 167-class Latin inventory ("latin167-v1").
  static const Alphabet& latin167();

  std::size_t printable_size() const { return codepoints_.size(); }
  std::size_t class_count() const { return codepoints_.size() + 1; }
  ClassIndex no_object_index() const { return codepoints_.size(); }
  const std::string& version() const { return version_; }

  std::optional<ClassIndex> index_of(char32_t cp) const;
  std::optional<ClassIndex> index_of(std::string_view symbol) const;
  // Throws std::out_of_range for the no-object class or out-of-range input.
  std::string symbol_at(ClassIndex index) const;
  char32_t codepoint_at(ClassIndex index) const;
  bool contains(char32_t cp) const { return lookup_.count(cp) != 0; }

  const std::u32string& codepoints() const { return codepoints_; }

 private:
  std::u32string codepoints_;
  std::unordered_map<char32_t, ClassIndex> lookup_;
  std::string version_;
};

inline const Alphabet& default_alphabet() { return Alphabet::latin167(); }

struct Corners {
  double x_min, y_min, x_max, y_max;
};

// Axis-aligned box in line-relative normalized coordinates, stored in
// center form. Zero-area boxes cannot be constructed.
class BoundingBox {
 public:
  // Requires 0 <= cx, cy <= 1 and 0 < w, h <= 1; throws std::invalid_argument.
  BoundingBox(double cx, double cy, double w, double h);
  static BoundingBox from_corners(double x_min, double y_min, double x_max,
                                  double y_max);

  double cx() const { return cx_; }
  double cy() const { return cy_; }
  double w() const { return w_; }
  double h() const { return h_; }
  double area() const { return w_ * h_; }
  Corners corners() const;

  bool operator==(const BoundingBox&) const = default;

 private:
  double cx_, cy_, w_, h_;
};

struct Detection {
  BoundingBox box;
  ClassIndex class_index;
  double score;
  // Full distribution over alphabet.class_count() classes when present.
  std::optional<std::vector<double>> class_probs;

  bool operator==(const Detection&) const = default;
};

// Throws std::invalid_argument when a detection violates its invariants
// against `alphabet` (index range, score range, probability vector shape,
// normalization, argmax agreement).
void validate(const Detection& det, const Alphabet& alphabet);

struct GroundTruthChar {
  ClassIndex class_index;
  BoundingBox box;
};

double iou(const BoundingBox& a, const BoundingBox& b);
double giou(const BoundingBox& a, const BoundingBox& b);
double l1_box(const BoundingBox& a, const BoundingBox& b);

// JSON Lines detection files. One object per detection:
//   {"line_id": 3, "cx": .., "cy": .., "w": .., "h": .., "class": "a",
//    "score": .., "probs": [..]}
// "class" is the symbol or "<no-object>"; line_id and probs are optional.
inline constexpr std::string_view kNoObjectSymbol = "<no-object>";

struct LineDetections {
  long long line_id = 0;
  std::vector<Detection> detections;
};

// Groups records by line_id (ascending). Malformed records raise DataError
// naming the 1-based file line.
std::vector<LineDetections> read_detections_jsonl(std::istream& in,
                                                  const Alphabet& alphabet);
void write_detections_jsonl(std::ostream& out,
                            const std::vector<LineDetections>& lines,
                            const Alphabet& alphabet);

}  // namespace linefix
