#include "linefix/metrics.hpp"

#include <fmt/format.h>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <istream>
#include <sstream>
#include <stdexcept>

#include "linefix/error.hpp"
#include "linefix/text.hpp"

namespace linefix {
namespace {

void check_sizes(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw std::invalid_argument(fmt::format("{}: {} lines vs {} lines", what, a, b));
}

std::vector<std::string> maybe_nfc(std::span<const std::string> lines, bool nfc) {
  std::vector<std::string> out;
  out.reserve(lines.size());
  for (const auto& l : lines) out.push_back(nfc ? nfc_normalize(l) : l);
  return out;
}

template <typename Dist, typename Len>
CorpusRates corpus_rate(std::span<const std::string> hyps,
                        std::span<const std::string> refs, Dist dist, Len len) {
  check_sizes(hyps.size(), refs.size(), "corpus rate");
  CorpusRates r;
  double macro_sum = 0.0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    const std::size_t n = len(refs[i]);
    const std::size_t d = dist(hyps[i], refs[i]);
    if (n == 0) continue;
    r.edits += d;
    r.ref_units += n;
    macro_sum += static_cast<double>(d) / static_cast<double>(n);
    ++r.scored_lines;
  }
  if (r.ref_units > 0) r.micro = static_cast<double>(r.edits) / static_cast<double>(r.ref_units);
  if (r.scored_lines > 0) r.macro = macro_sum / static_cast<double>(r.scored_lines);
  return r;
}

std::vector<std::string> owned_words(std::string_view text) {
  std::vector<std::string> out;
  for (auto w : split_words(text)) out.emplace_back(w);
  return out;
}

}  // namespace

std::size_t char_distance(std::string_view a, std::string_view b) {
  return levenshtein(utf8_to_u32(a), utf8_to_u32(b));
}

std::size_t word_distance(std::string_view a, std::string_view b) {
  return levenshtein(owned_words(a), owned_words(b));
}

std::size_t char_length(std::string_view text) { return utf8_to_u32(text).size(); }

std::size_t word_count(std::string_view text) { return split_words(text).size(); }

std::optional<double> cer(std::string_view hyp, std::string_view ref) {
  const std::size_t n = char_length(ref);
  if (n == 0) return std::nullopt;
  return static_cast<double>(char_distance(hyp, ref)) / static_cast<double>(n);
}

std::optional<double> wer(std::string_view hyp, std::string_view ref) {
  const std::size_t n = word_count(ref);
  if (n == 0) return std::nullopt;
  return static_cast<double>(word_distance(hyp, ref)) / static_cast<double>(n);
}

std::size_t matched_words(std::string_view hyp, std::string_view ref) {
  const auto h = owned_words(hyp);
  const auto r = owned_words(ref);
  // Minimal edits first, then maximal matches among minimal alignments.
  struct Cell {
    std::size_t cost;
    std::size_t matches;
  };
  auto better = [](Cell x, Cell y) {
    return x.cost < y.cost || (x.cost == y.cost && x.matches > y.matches);
  };
  std::vector<Cell> prev(r.size() + 1), cur(r.size() + 1);
  for (std::size_t j = 0; j <= r.size(); ++j) prev[j] = {j, 0};
  for (std::size_t i = 1; i <= h.size(); ++i) {
    cur[0] = {i, 0};
    for (std::size_t j = 1; j <= r.size(); ++j) {
      const bool eq = h[i - 1] == r[j - 1];
      Cell best{prev[j - 1].cost + (eq ? 0 : 1), prev[j - 1].matches + (eq ? 1 : 0)};
      const Cell del{prev[j].cost + 1, prev[j].matches};
      const Cell ins{cur[j - 1].cost + 1, cur[j - 1].matches};
      if (better(del, best)) best = del;
      if (better(ins, best)) best = ins;
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  return prev[r.size()].matches;
}

CorpusRates corpus_cer(std::span<const std::string> hyps, std::span<const std::string> refs,
                       bool nfc) {
  const auto h = maybe_nfc(hyps, nfc);
  const auto r = maybe_nfc(refs, nfc);
  return corpus_rate(h, r, char_distance, char_length);
}

CorpusRates corpus_wer(std::span<const std::string> hyps, std::span<const std::string> refs,
                       bool nfc) {
  const auto h = maybe_nfc(hyps, nfc);
  const auto r = maybe_nfc(refs, nfc);
  return corpus_rate(h, r, word_distance, word_count);
}

double word_accuracy(std::span<const std::string> hyps, std::span<const std::string> refs,
                     bool nfc) {
  check_sizes(hyps.size(), refs.size(), "word accuracy");
  const auto h = maybe_nfc(hyps, nfc);
  const auto r = maybe_nfc(refs, nfc);
  std::size_t matched = 0, total = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    matched += matched_words(h[i], r[i]);
    total += word_count(r[i]);
  }
  return total == 0 ? 1.0 : static_cast<double>(matched) / static_cast<double>(total);
}

CorrectionCounts correction_ratio(std::span<const std::string> noisy,
                                  std::span<const std::string> corrected,
                                  std::span<const std::string> refs) {
  check_sizes(noisy.size(), refs.size(), "correction ratio");
  check_sizes(corrected.size(), refs.size(), "correction ratio");
  CorrectionCounts c;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const std::size_t before = char_distance(noisy[i], refs[i]);
    const std::size_t after = char_distance(corrected[i], refs[i]);
    if (after < before)
      ++c.fixes;
    else if (after > before)
      ++c.degradations;
    else
      ++c.unchanged;
  }
  return c;
}

CorrectionCounts correction_ratio_edits(std::span<const std::string> noisy,
                                        std::span<const std::string> corrected,
                                        std::span<const std::string> refs) {
  check_sizes(noisy.size(), refs.size(), "correction ratio");
  check_sizes(corrected.size(), refs.size(), "correction ratio");
  CorrectionCounts c;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const std::size_t before = char_distance(noisy[i], refs[i]);
    const std::size_t after = char_distance(corrected[i], refs[i]);
    if (after < before) c.fixes += before - after;
    if (after > before) c.degradations += after - before;
    if (after == before) ++c.unchanged;
  }
  return c;
}

std::string nfc_normalize(std::string_view text) {
  if (!is_valid_utf8(text)) throw DataError("NFC input is not valid UTF-8");
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
  const auto src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  const icu::UnicodeString dst = norm->normalize(src, status);
  if (U_FAILURE(status)) throw DataError("NFC normalization failed");
  std::string out;
  dst.toUTF8String(out);
  return out;
}

SystemResult evaluate(std::string name, std::span<const std::string> hyps,
                      std::span<const std::string> refs,
                      std::span<const std::string> noisy, const EvalOptions& opts) {
  check_sizes(hyps.size(), refs.size(), "evaluate");
  SystemResult r;
  r.name = std::move(name);
  r.lines = refs.size();
  const auto h = maybe_nfc(hyps, opts.nfc);
  const auto f = maybe_nfc(refs, opts.nfc);
  for (const auto& ref : f) r.empty_refs += char_length(ref) == 0;
  r.cer = corpus_cer(h, f);
  r.wer = corpus_wer(h, f);
  r.word_accuracy = word_accuracy(h, f);
  if (!noisy.empty()) {
    const auto n = maybe_nfc(noisy, opts.nfc);
    r.line_ratio = correction_ratio(n, h, f);
    r.edit_ratio = correction_ratio_edits(n, h, f);
  }
  return r;
}

std::string format_table(const EvalReport& report, bool include_timing) {
  std::size_t name_w = 6;
  for (const auto& s : report.systems) name_w = std::max(name_w, char_length(s.name));
  std::string out = fmt::format("{:<{}}  {:>6}  {:>8}  {:>8}  {:>8}  {:>8}  {:>11}",
                                "System", name_w, "Lines", "CER (%)", "WER (%)",
                                "W.Acc(%)", "CER mac.", "Fix:Degr");
  if (include_timing) out += fmt::format("  {:>12}", "Adapt (s)");
  out += '\n';
  for (const auto& s : report.systems) {
    const std::size_t pad = name_w - char_length(s.name);
    const std::string ratio =
        s.line_ratio ? fmt::format("{}:{}", s.line_ratio->fixes, s.line_ratio->degradations)
                     : std::string("-");
    out += s.name + std::string(pad, ' ');
    out += fmt::format("  {:>6}  {:>8.2f}  {:>8.2f}  {:>8.2f}  {:>8.2f}  {:>11}", s.lines,
                       100.0 * s.cer.micro, 100.0 * s.wer.micro, 100.0 * s.word_accuracy,
                       100.0 * s.cer.macro, ratio);
    if (include_timing)
      out += s.seconds ? fmt::format("  {:>12.3f}", *s.seconds) : fmt::format("  {:>12}", "-");
    out += '\n';
  }
  return out;
}

namespace {

void check_field(const std::string& s) {
  if (s.find_first_of("\t\n\r") != std::string::npos || s.empty())
    throw std::invalid_argument("report names must be non-empty without tabs or newlines");
}

void put_rates(std::string& out, const std::string& prefix, const CorpusRates& r) {
  out += fmt::format("{}.micro\t{}\n{}.macro\t{}\n{}.edits\t{}\n{}.ref_units\t{}\n"
                     "{}.scored_lines\t{}\n",
                     prefix, r.micro, prefix, r.macro, prefix, r.edits, prefix, r.ref_units,
                     prefix, r.scored_lines);
}

void put_counts(std::string& out, const std::string& prefix, const CorrectionCounts& c) {
  out += fmt::format("{}.fixes\t{}\n{}.degradations\t{}\n{}.unchanged\t{}\n", prefix,
                     c.fixes, prefix, c.degradations, prefix, c.unchanged);
}

}  // namespace

std::string format_key_values(const EvalReport& report) {
  std::string out;
  for (const auto& [k, v] : report.digests) {
    check_field(k);
    check_field(v);
    out += fmt::format("digest.{}\t{}\n", k, v);
  }
  out += fmt::format("systems\t{}\n", report.systems.size());
  for (std::size_t i = 0; i < report.systems.size(); ++i) {
    const auto& s = report.systems[i];
    check_field(s.name);
    const std::string p = fmt::format("system.{}", i);
    out += fmt::format("{}.name\t{}\n{}.lines\t{}\n{}.empty_refs\t{}\n", p, s.name, p,
                       s.lines, p, s.empty_refs);
    put_rates(out, p + ".cer", s.cer);
    put_rates(out, p + ".wer", s.wer);
    out += fmt::format("{}.word_accuracy\t{}\n", p, s.word_accuracy);
    if (s.line_ratio) put_counts(out, p + ".ratio.line", *s.line_ratio);
    if (s.edit_ratio) put_counts(out, p + ".ratio.edit", *s.edit_ratio);
    if (s.seconds) out += fmt::format("{}.seconds\t{}\n", p, *s.seconds);
  }
  return out;
}

EvalReport parse_key_values(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError(fmt::format("report line {}: missing tab", lineno));
    kv[line.substr(0, tab)] = line.substr(tab + 1);
  }
  auto take = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw DataError("report: missing key " + key);
    return it->second;
  };
  auto num = [&](const std::string& key) -> double {
    const std::string& v = take(key);
    std::size_t used = 0;
    double d = 0.0;
    try {
      d = std::stod(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v.size()) throw DataError("report: bad number for " + key);
    return d;
  };
  auto count = [&](const std::string& key) {
    return static_cast<std::size_t>(num(key));
  };
  auto rates = [&](const std::string& p) {
    CorpusRates r;
    r.micro = num(p + ".micro");
    r.macro = num(p + ".macro");
    r.edits = count(p + ".edits");
    r.ref_units = count(p + ".ref_units");
    r.scored_lines = count(p + ".scored_lines");
    return r;
  };
  auto counts = [&](const std::string& p) -> std::optional<CorrectionCounts> {
    if (!kv.count(p + ".fixes")) return std::nullopt;
    return CorrectionCounts{count(p + ".fixes"), count(p + ".degradations"),
                            count(p + ".unchanged")};
  };
  EvalReport report;
  for (const auto& [k, v] : kv)
    if (k.rfind("digest.", 0) == 0) report.digests[k.substr(7)] = v;
  const std::size_t n = count("systems");
  for (std::size_t i = 0; i < n; ++i) {
    const std::string p = fmt::format("system.{}", i);
    SystemResult s;
    s.name = take(p + ".name");
    s.lines = count(p + ".lines");
    s.empty_refs = count(p + ".empty_refs");
    s.cer = rates(p + ".cer");
    s.wer = rates(p + ".wer");
    s.word_accuracy = num(p + ".word_accuracy");
    s.line_ratio = counts(p + ".ratio.line");
    s.edit_ratio = counts(p + ".ratio.edit");
    if (kv.count(p + ".seconds")) s.seconds = num(p + ".seconds");
    report.systems.push_back(std::move(s));
  }
  return report;
}

}  // namespace linefix
