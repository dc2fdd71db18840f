#include "linefix/detections.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>

#include <ostream>
#include <stdexcept>

#include "json.hpp"
#include "linefix/error.hpp"
#include "linefix/text.hpp"

namespace linefix {
namespace {

// latin167-v1: A-Z, a-z, 0-9, the 32 ASCII punctuation marks in code order,
// space, the 62 letters of U+00C0..U+00FF (without the multiplication and
// division signs), then ten Latin Extended-A letters. Not an authoritative
// inventory; tests refer to it by version.
std::vector<std::string> latin167_symbols() {
  std::u32string cps;
  for (char32_t c = U'A'; c <= U'Z'; ++c) cps.push_back(c);
  for (char32_t c = U'a'; c <= U'z'; ++c) cps.push_back(c);
  for (char32_t c = U'0'; c <= U'9'; ++c) cps.push_back(c);
  for (char32_t c = 0x21; c <= 0x7E; ++c) {
    const bool alnum = (c >= U'0' && c <= U'9') || (c >= U'A' && c <= U'Z') ||
                       (c >= U'a' && c <= U'z');
    if (!alnum) cps.push_back(c);
  }
  cps.push_back(U' ');
  for (char32_t c = 0xC0; c <= 0xFF; ++c)
    if (c != 0xD7 && c != 0xF7) cps.push_back(c);
  for (char32_t c : {0x152, 0x153, 0x160, 0x161, 0x17D, 0x17E, 0x178, 0x17F,
                     0x141, 0x142})
    cps.push_back(c);
  std::vector<std::string> out;
  out.reserve(cps.size());
  for (char32_t c : cps) out.push_back(u32_to_utf8(std::u32string(1, c)));
  return out;
}

}  // namespace

Alphabet::Alphabet(const std::vector<std::string>& symbols, std::string version)
    : version_(std::move(version)) {
  for (const auto& s : symbols) {
    const std::u32string cps = utf8_to_u32(s);
    if (cps.size() != 1)
      throw std::invalid_argument("alphabet symbol must be one code point: '" +
                                  s + "'");
    if (!lookup_.emplace(cps[0], codepoints_.size()).second)
      throw std::invalid_argument("duplicate alphabet symbol '" + s + "'");
    codepoints_.push_back(cps[0]);
  }
}

const Alphabet& Alphabet::latin167() {
  static const Alphabet kAlphabet(latin167_symbols(), "latin167-v1");
  return kAlphabet;
}

std::optional<ClassIndex> Alphabet::index_of(char32_t cp) const {
  const auto it = lookup_.find(cp);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<ClassIndex> Alphabet::index_of(std::string_view symbol) const {
  if (!is_valid_utf8(symbol)) return std::nullopt;
  const std::u32string cps = utf8_to_u32(symbol);
  if (cps.size() != 1) return std::nullopt;
  return index_of(cps[0]);
}

std::string Alphabet::symbol_at(ClassIndex index) const {
  return u32_to_utf8(std::u32string(1, codepoint_at(index)));
}

char32_t Alphabet::codepoint_at(ClassIndex index) const {
  if (index >= codepoints_.size())
    throw std::out_of_range(
        fmt::format("class {} has no printable symbol", index));
  return codepoints_[index];
}

BoundingBox::BoundingBox(double cx, double cy, double w, double h)
    : cx_(cx), cy_(cy), w_(w), h_(h) {
  const bool ok = std::isfinite(cx) && std::isfinite(cy) && cx >= 0.0 &&
                  cx <= 1.0 && cy >= 0.0 && cy <= 1.0 && w > 0.0 && w <= 1.0 &&
                  h > 0.0 && h <= 1.0;
  if (!ok)
    throw std::invalid_argument(fmt::format(
        "invalid box cx={} cy={} w={} h={}", cx, cy, w, h));
}

BoundingBox BoundingBox::from_corners(double x_min, double y_min, double x_max,
                                      double y_max) {
  return BoundingBox((x_min + x_max) / 2.0, (y_min + y_max) / 2.0,
                     x_max - x_min, y_max - y_min);
}

Corners BoundingBox::corners() const {
  return {cx_ - w_ / 2.0, cy_ - h_ / 2.0, cx_ + w_ / 2.0, cy_ + h_ / 2.0};
}

void validate(const Detection& det, const Alphabet& alphabet) {
  if (det.class_index >= alphabet.class_count())
    throw std::invalid_argument(
        fmt::format("class index {} out of range", det.class_index));
  if (!(det.score >= 0.0 && det.score <= 1.0))
    throw std::invalid_argument(fmt::format("score {} not in [0,1]", det.score));
  if (!det.class_probs) return;
  const auto& p = *det.class_probs;
  if (p.size() != alphabet.class_count())
    throw std::invalid_argument(
        fmt::format("probability vector has {} entries, expected {}", p.size(),
                    alphabet.class_count()));
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("class probability outside [0,1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw std::invalid_argument(
        fmt::format("class probabilities sum to {}", sum));
  const auto argmax = static_cast<ClassIndex>(
      std::max_element(p.begin(), p.end()) - p.begin());
  if (p[argmax] != p[det.class_index])
    throw std::invalid_argument("class_index is not the argmax of class_probs");
}

namespace {

double intersection_area(const Corners& a, const Corners& b) {
  const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

}  // namespace

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double inter = intersection_area(a.corners(), b.corners());
  const double uni = a.area() + b.area() - inter;
  return inter / uni;
}

double giou(const BoundingBox& a, const BoundingBox& b) {
  const Corners ca = a.corners();
  const Corners cb = b.corners();
  const double inter = intersection_area(ca, cb);
  const double uni = a.area() + b.area() - inter;
  const double enclosing = (std::max(ca.x_max, cb.x_max) - std::min(ca.x_min, cb.x_min)) *
                           (std::max(ca.y_max, cb.y_max) - std::min(ca.y_min, cb.y_min));
  return inter / uni - (enclosing - uni) / enclosing;
}

double l1_box(const BoundingBox& a, const BoundingBox& b) {
  return std::abs(a.cx() - b.cx()) + std::abs(a.cy() - b.cy()) +
         std::abs(a.w() - b.w()) + std::abs(a.h() - b.h());
}

std::vector<LineDetections> read_detections_jsonl(std::istream& in,
                                                  const Alphabet& alphabet) {
  std::map<long long, std::vector<Detection>> by_line;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      if (!obj.is_object()) throw std::invalid_argument("record is not an object");
      const auto num = [&](const char* key) {
        if (!obj.contains(key) || !obj.at(key).is_number())
          throw std::invalid_argument(std::string("missing numeric field '") +
                                      key + "'");
        return obj.at(key).get<double>();
      };
      const BoundingBox box(num("cx"), num("cy"), num("w"), num("h"));
      if (!obj.contains("class") || !obj.at("class").is_string())
        throw std::invalid_argument("missing string field 'class'");
      const auto symbol = obj.at("class").get<std::string>();
      ClassIndex cls = alphabet.no_object_index();
      if (symbol != kNoObjectSymbol) {
        const auto idx = alphabet.index_of(symbol);
        if (!idx) throw std::invalid_argument("unknown class '" + symbol + "'");
        cls = *idx;
      }
      Detection det{box, cls, num("score"), std::nullopt};
      if (obj.contains("probs"))
        det.class_probs = obj.at("probs").get<std::vector<double>>();
      validate(det, alphabet);
      long long id = 0;
      if (obj.contains("line_id")) {
        if (!obj.at("line_id").is_number_integer())
          throw std::invalid_argument("line_id must be an integer");
        id = obj.at("line_id").get<long long>();
      }
      by_line[id].push_back(std::move(det));
    } catch (const std::exception& e) {
      throw DataError(fmt::format("detections line {}: {}", lineno, e.what()));
    }
  }
  std::vector<LineDetections> out;
  out.reserve(by_line.size());
  for (auto& [id, dets] : by_line) out.push_back({id, std::move(dets)});
  return out;
}

void write_detections_jsonl(std::ostream& out,
                            const std::vector<LineDetections>& lines,
                            const Alphabet& alphabet) {
  for (const auto& line : lines) {
    for (const auto& det : line.detections) {
      nlohmann::ordered_json obj;
      obj["line_id"] = line.line_id;
      obj["cx"] = det.box.cx();
      obj["cy"] = det.box.cy();
      obj["w"] = det.box.w();
      obj["h"] = det.box.h();
      obj["class"] = det.class_index == alphabet.no_object_index()
                         ? std::string(kNoObjectSymbol)
                         : alphabet.symbol_at(det.class_index);
      obj["score"] = det.score;
      if (det.class_probs) obj["probs"] = *det.class_probs;
      out << obj.dump() << '\n';
    }
  }
}

}  // namespace linefix
