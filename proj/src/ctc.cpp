#include "linefix/ctc.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "linefix/error.hpp"
#include "linefix/text.hpp"

namespace linefix {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

LabelSeq target_labels(std::string_view target, const Alphabet& alphabet) {
  LabelSeq labels;
  for (char32_t cp : utf8_to_u32(target)) {
    const auto idx = alphabet.index_of(cp);
    if (!idx)
      throw DataError(fmt::format("target symbol U+{:04X} not in alphabet",
                                  static_cast<std::uint32_t>(cp)));
    labels.push_back(*idx);
  }
  return labels;
}

void check_shape(const FrameLogProbs& frames, const Alphabet& alphabet) {
  if (frames.frames() > 0 && frames.classes() != alphabet.class_count())
    throw std::invalid_argument(
        fmt::format("frames have {} classes, alphabet has {}",
                    frames.classes(), alphabet.class_count()));
}

}  // namespace

double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

FrameLogProbs::FrameLogProbs(std::size_t frames, std::size_t classes,
                             std::vector<double> log_probs)
    : frames_(frames), classes_(classes), data_(std::move(log_probs)) {
  if (data_.size() != frames * classes)
    throw std::invalid_argument("frame data size mismatch");
  for (std::size_t m = 0; m < frames; ++m) {
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) sum += std::exp((*this)(m, c));
    if (std::abs(sum - 1.0) > 1e-6)
      throw std::invalid_argument(
          fmt::format("frame {} probabilities sum to {}", m, sum));
  }
}

FrameLogProbs FrameLogProbs::from_probs(std::size_t frames, std::size_t classes,
                                        const std::vector<double>& probs) {
  std::vector<double> logs(probs.size());
  std::transform(probs.begin(), probs.end(), logs.begin(),
                 [](double p) { return std::log(p); });
  return FrameLogProbs(frames, classes, std::move(logs));
}

LabelSeq interleave_blanks(const LabelSeq& labels, ClassIndex blank) {
  LabelSeq out;
  if (labels.empty()) return out;
  out.reserve(2 * labels.size() - 1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out.push_back(blank);
    out.push_back(labels[i]);
  }
  return out;
}

std::string ctc_collapse(const LabelSeq& labels, const Alphabet& alphabet) {
  std::u32string out;
  const ClassIndex blank = alphabet.no_object_index();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i > 0 && labels[i] == labels[i - 1]) continue;
    if (labels[i] == blank) continue;
    out.push_back(alphabet.codepoint_at(labels[i]));
  }
  return u32_to_utf8(out);
}

double ctc_log_likelihood(const FrameLogProbs& frames, std::string_view target,
                          const Alphabet& alphabet) {
  const LabelSeq labels = target_labels(target, alphabet);
  check_shape(frames, alphabet);
  const std::size_t M = frames.frames();
  if (M == 0) return labels.empty() ? 0.0 : kNegInf;

  const ClassIndex blank = alphabet.no_object_index();
  LabelSeq ext;
  ext.reserve(2 * labels.size() + 1);
  ext.push_back(blank);
  for (ClassIndex l : labels) {
    ext.push_back(l);
    ext.push_back(blank);
  }
  const std::size_t S = ext.size();

  std::vector<double> alpha(S, kNegInf), next(S, kNegInf);
  alpha[0] = frames(0, blank);
  if (S > 1) alpha[1] = frames(0, ext[1]);
  for (std::size_t m = 1; m < M; ++m) {
    for (std::size_t s = 0; s < S; ++s) {
      double acc = alpha[s];
      if (s >= 1) acc = log_sum_exp(acc, alpha[s - 1]);
      if (s >= 2 && ext[s] != blank && ext[s] != ext[s - 2])
        acc = log_sum_exp(acc, alpha[s - 2]);
      next[s] = acc == kNegInf ? kNegInf : acc + frames(m, ext[s]);
    }
    std::swap(alpha, next);
  }
  return S > 1 ? log_sum_exp(alpha[S - 1], alpha[S - 2]) : alpha[S - 1];
}

double ctc_loss(const FrameLogProbs& frames, std::string_view target,
                const Alphabet& alphabet) {
  return -ctc_log_likelihood(frames, target, alphabet);
}

double ctc_brute_force(const FrameLogProbs& frames, std::string_view target,
                       const Alphabet& alphabet) {
  const LabelSeq labels = target_labels(target, alphabet);
  check_shape(frames, alphabet);
  if (frames.frames() > 7 || alphabet.printable_size() > 6)
    throw std::invalid_argument(
        "ctc_brute_force supports at most 7 frames and 6 printable classes");
  const std::size_t M = frames.frames();
  const std::size_t C = alphabet.class_count();
  const ClassIndex blank = alphabet.no_object_index();

  double total = kNegInf;
  LabelSeq path(M, 0);
  LabelSeq collapsed;
  const auto collapses_to_target = [&] {
    collapsed.clear();
    for (std::size_t i = 0; i < M; ++i) {
      if (path[i] == blank || (i > 0 && path[i] == path[i - 1])) continue;
      collapsed.push_back(path[i]);
    }
    return collapsed == labels;
  };
  const auto enumerate = [&](auto&& self, std::size_t m, double acc) -> void {
    if (m == M) {
      if (collapses_to_target()) total = log_sum_exp(total, acc);
      return;
    }
    for (ClassIndex c = 0; c < C; ++c) {
      path[m] = c;
      self(self, m + 1, acc + frames(m, c));
    }
  };
  enumerate(enumerate, 0, 0.0);
  return total;
}

std::string best_path_decode(const FrameLogProbs& frames,
                             const Alphabet& alphabet) {
  check_shape(frames, alphabet);
  LabelSeq path;
  path.reserve(frames.frames());
  for (std::size_t m = 0; m < frames.frames(); ++m) {
    const auto row = frames.frame(m);
    path.push_back(static_cast<ClassIndex>(
        std::max_element(row.begin(), row.end()) - row.begin()));
  }
  return ctc_collapse(path, alphabet);
}

}  // namespace linefix
