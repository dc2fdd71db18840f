#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace linefix {

// Word inventory with a deletion index: every word is filed under each
// string reachable by deleting up to `radius` code points, so candidates
// within edit distance `radius` of a query share at least one key with it.
class Lexicon {
 public:
  Lexicon() = default;
  // Words are whitespace-separated pieces of `lines`; throws
  // std::invalid_argument when there are none.
  static Lexicon build(const std::vector<std::string>& lines, int radius = 2);

  bool contains(std::string_view word) const { return ids_.count(std::string(word)) != 0; }
  std::size_t size() const { return words_.size(); }
  int radius() const { return radius_; }
  const std::string& word(std::size_t id) const { return words_[id]; }
  std::uint64_t frequency(std::size_t id) const { return freq_[id]; }

  struct Candidate {
    std::size_t id;
    std::size_t distance;
  };
  // Words within min(max_distance, radius) edits, ordered by distance, then
  // descending frequency, then word bytes.
  std::vector<Candidate> candidates(std::string_view query, std::size_t max_distance) const;
  // Same contract without the radius cap, by linear scan. Meant for the rare
  // query the deletion index cannot reach.
  std::vector<Candidate> scan(std::string_view query, std::size_t max_distance) const;

  void write(std::ostream& out) const;
  static Lexicon parse(std::istream& in);

 private:
  void index();
  void rank(std::vector<Candidate>& out) const;

  int radius_ = 2;
  std::vector<std::string> words_;  // sorted
  std::vector<std::u32string> wide_;
  std::vector<std::uint64_t> freq_;
  std::unordered_map<std::string, std::size_t> ids_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> deletes_;
};

}  // namespace linefix
