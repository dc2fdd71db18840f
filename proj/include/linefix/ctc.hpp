#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "linefix/detections.hpp"

namespace linefix {

using LabelSeq = std::vector<ClassIndex>;

// M frames of log-probabilities over alphabet.class_count() classes; the
// blank is the alphabet's no-object class.
class FrameLogProbs {
 public:
  FrameLogProbs() = default;
  // Each row must be a distribution (sum of exp within 1e-6 of 1);
  // throws std::invalid_argument otherwise.
  FrameLogProbs(std::size_t frames, std::size_t classes,
                std::vector<double> log_probs);
  static FrameLogProbs from_probs(std::size_t frames, std::size_t classes,
                                  const std::vector<double>& probs);

  std::size_t frames() const { return frames_; }
  std::size_t classes() const { return classes_; }
  double operator()(std::size_t frame, ClassIndex cls) const {
    return data_[frame * classes_ + cls];
  }
  std::span<const double> frame(std::size_t m) const {
    return {data_.data() + m * classes_, classes_};
  }

 private:
  std::size_t frames_ = 0;
  std::size_t classes_ = 0;
  std::vector<double> data_;
};

// Puts `blank` between every adjacent pair: length 2k-1 for k > 0.
LabelSeq interleave_blanks(const LabelSeq& labels, ClassIndex blank);

// Merges adjacent duplicates, drops blanks, maps classes to symbols.
std::string ctc_collapse(const LabelSeq& labels, const Alphabet& alphabet);

// log P(target | frames) summed over every frame path that collapses to
// `target` (forward recursion in log space). Returns -infinity when no path
// exists. Throws DataError for a symbol outside the alphabet and
// std::invalid_argument when frames and alphabet disagree on class count.
double ctc_log_likelihood(const FrameLogProbs& frames, std::string_view target,
                          const Alphabet& alphabet);

// -ctc_log_likelihood; +infinity for infeasible targets.
double ctc_loss(const FrameLogProbs& frames, std::string_view target,
                const Alphabet& alphabet);

// Enumerates all class_count^M paths. Requires M <= 7 and at most 6
// printable classes.
double ctc_brute_force(const FrameLogProbs& frames, std::string_view target,
                       const Alphabet& alphabet);

// Per-frame argmax followed by ctc_collapse.
std::string best_path_decode(const FrameLogProbs& frames,
                             const Alphabet& alphabet);

double log_sum_exp(double a, double b);

}  // namespace linefix
