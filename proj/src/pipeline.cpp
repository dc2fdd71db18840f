#include "linefix/pipeline.hpp"

#include <fmt/format.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "linefix/decode.hpp"
#include "linefix/detections.hpp"
#include "linefix/digest.hpp"
#include "linefix/error.hpp"
#include "linefix/noise.hpp"
#include "linefix/parallel.hpp"
#include "linefix/rng.hpp"
#include "linefix/text.hpp"

namespace linefix {
namespace fs = std::filesystem;
namespace {

constexpr std::uint64_t kDomainSalt = 0x646f6d61696eULL;
constexpr std::uint64_t kDetectorSalt = 0x6465746563746f72ULL;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
  if (!out) throw DataError("failed writing " + path);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Rethrows with the stage name prepended, keeping the exit-code category.
template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const DataError& e) {
    throw DataError(fmt::format("stage {}: {}", name, e.what()));
  } catch (const UsageError& e) {
    throw UsageError(fmt::format("stage {}: {}", name, e.what()));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(fmt::format("stage {}: {}", name, e.what()));
  } catch (const std::exception& e) {
    throw std::runtime_error(fmt::format("stage {}: {}", name, e.what()));
  }
}

std::string stage_dir(const PipelineConfig& cfg, const char* name) {
  const fs::path dir = fs::path(cfg.work_dir) / name;
  fs::create_directories(dir);
  return dir.string();
}

std::string in_dir(const std::string& dir, const char* file) {
  return (fs::path(dir) / file).string();
}

// Parallelism and output location never change results, so they are left
// out of the digest.
std::string config_digest(const PipelineConfig& cfg) {
  PipelineConfig normalized = cfg;
  normalized.jobs = 1;
  normalized.work_dir.clear();
  return sha256_hex(dump_config(normalized));
}

Manifest base_manifest(const PipelineConfig& cfg, const char* command) {
  return {{"command", command},
          {"seed", std::to_string(cfg.required_seed())},
          {"config_sha256", config_digest(cfg)}};
}

std::vector<std::string> column(const std::vector<TextPair>& pairs, bool clean) {
  std::vector<std::string> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(clean ? p.second : p.first);
  return out;
}

}  // namespace

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!is_valid_utf8(line))
      throw DataError(fmt::format("{} line {}: invalid UTF-8", path, lines.size() + 1));
    lines.push_back(std::move(line));
  }
  return lines;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::string text;
  for (const auto& l : lines) {
    text += l;
    text += '\n';
  }
  write_text(path, text);
}

std::vector<TextPair> read_pairs(const std::string& path) {
  std::vector<TextPair> pairs;
  std::size_t lineno = 0;
  for (auto& line : read_lines(path)) {
    ++lineno;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw DataError(fmt::format("{} line {}: expected noisy<TAB>clean", path, lineno));
    pairs.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return pairs;
}

void write_pairs(const std::string& path, const std::vector<TextPair>& pairs) {
  std::string text;
  for (const auto& [noisy, clean] : pairs) {
    if (noisy.find_first_of("\t\n") != std::string::npos ||
        clean.find_first_of("\t\n") != std::string::npos)
      throw DataError("pair text contains a tab or newline");
    text += noisy + '\t' + clean + '\n';
  }
  write_text(path, text);
}

void write_manifest(const std::string& path, const Manifest& manifest) {
  std::string text;
  for (const auto& [k, v] : manifest) text += k + '=' + v + '\n';
  write_text(path, text);
}

Manifest read_manifest(const std::string& path) {
  Manifest m;
  for (const auto& line : read_lines(path)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError(path + ": manifest line without '='");
    m[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return m;
}

Split split_of(std::string_view line) {
  switch (fnv1a64(line) % 10) {
    case 0: return Split::test;
    case 1: return Split::val;
    default: return Split::train;
  }
}

SynthOutput cmd_synth(const PipelineConfig& cfg) {
  cfg.validate();
  const std::uint64_t seed = cfg.required_seed();
  const auto corpus = read_lines(cfg.corpus);
  SynthOutput out;
  out.dir = stage_dir(cfg, "synth");

  std::vector<std::string> modern[3], domain[3];
  std::size_t skipped = 0;
  const ConfusionTable table =
      cfg.orthography == Orthography::archaic ? cfg.domain_table() : ConfusionTable();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    std::string line = corpus[i];
    for (char& c : line)
      if (c == '\t') c = ' ';
    if (split_words(std::string_view(line)).empty()) {
      ++skipped;
      continue;
    }
    const auto s = static_cast<std::size_t>(split_of(line));
    std::string clean = line;
    if (cfg.orthography == Orthography::archaic) {
      Rng rng = make_rng(seed, i, kDomainSalt);
      clean = archaic_variant(line, table, rng);
    }
    modern[s].push_back(std::move(line));
    domain[s].push_back(std::move(clean));
  }
  if (domain[0].empty() && domain[1].empty() && domain[2].empty())
    throw DataError("corpus " + cfg.corpus + " has no non-empty lines");

  NoiseChannel channel = cfg.noise_channel();
  std::vector<TextPair>* targets[3] = {&out.train, &out.val, &out.test};
  for (std::size_t s = 0; s < 3; ++s) {
    NoiseChannel ch = channel;
    if (s != 0) ch.p_augment = 0.0;
    *targets[s] = build_corpus(domain[s], ch, mix_seed(seed, s), cfg.jobs).pairs;
  }
  out.train_modern = modern[0];
  out.test_modern = modern[2];

  write_pairs(in_dir(out.dir, "train.tsv"), out.train);
  write_pairs(in_dir(out.dir, "val.tsv"), out.val);
  write_pairs(in_dir(out.dir, "test.tsv"), out.test);
  write_lines(in_dir(out.dir, "train_modern.txt"), out.train_modern);
  write_lines(in_dir(out.dir, "test_modern.txt"), out.test_modern);
  write_text(in_dir(out.dir, "config.ini"), dump_config(cfg));

  out.manifest = base_manifest(cfg, "synth");
  out.manifest["corpus"] = cfg.corpus;
  out.manifest["corpus_sha256"] = sha256_file_hex(cfg.corpus);
  out.manifest["channel"] = std::string(to_string(channel.kind));
  out.manifest["channel_sha256"] = sha256_hex(channel.describe());
  out.manifest["orthography"] = std::string(to_string(cfg.orthography));
  out.manifest["lines.train"] = std::to_string(out.train.size());
  out.manifest["lines.val"] = std::to_string(out.val.size());
  out.manifest["lines.test"] = std::to_string(out.test.size());
  out.manifest["lines.skipped"] = std::to_string(skipped);
  for (const char* f : {"train.tsv", "val.tsv", "test.tsv", "train_modern.txt", "test_modern.txt"})
    out.manifest[std::string("sha256.") + f] = sha256_file_hex(in_dir(out.dir, f));
  write_manifest(in_dir(out.dir, "manifest.txt"), out.manifest);
  return out;
}

TrainOutput cmd_train(const PipelineConfig& cfg) {
  cfg.validate();
  const std::string synth = (fs::path(cfg.work_dir) / "synth").string();
  const auto train = read_pairs(in_dir(synth, "train.tsv"));
  const auto val = read_pairs(in_dir(synth, "val.tsv"));
  const auto modern = read_lines(in_dir(synth, "train_modern.txt"));
  if (train.empty()) throw DataError("training split is empty");
  if (val.empty()) throw DataError("validation split is empty");

  TrainOutput out;
  out.dir = stage_dir(cfg, "train");
  Manifest manifest = base_manifest(cfg, "train");
  manifest["sha256.train.tsv"] = sha256_file_hex(in_dir(synth, "train.tsv"));
  manifest["sha256.val.tsv"] = sha256_file_hex(in_dir(synth, "val.tsv"));
  std::string timing = "stage\tseconds\n";

  for (CorrectorMode mode : cfg.modes) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string name(to_string(mode));
    std::optional<BpeTokenizer> tokenizer;
    std::optional<Lexicon> lexicon;
    if (mode == CorrectorMode::token) {
      std::set<unsigned char> bytes;
      for (const auto& l : modern) bytes.insert(l.begin(), l.end());
      tokenizer = bpe_train(modern, std::max(cfg.bpe_vocab, bytes.size()));
      lexicon = Lexicon::build(modern, cfg.edit_radius);
    }
    const CorrectorCheckpoint base =
        train_corrector(train, cfg.params(mode, cfg.lm_weights.front()),
                        lexicon ? &*lexicon : nullptr, tokenizer ? &*tokenizer : nullptr);
    std::vector<CorrectorCheckpoint> grid;
    for (double w : cfg.lm_weights) grid.push_back(with_params(base, cfg.params(mode, w)));
    const std::size_t best = select_checkpoint(grid, val, cfg.jobs);
    const std::string path = in_dir(out.dir, (name + ".ckpt").c_str());
    grid[best].save(path);
    out.checkpoints[mode] = path;
    out.digests[mode] = grid[best].digest();
    out.validation_cer[mode] = *grid[best].validation_cer;
    out.seconds[mode] = seconds_since(t0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const std::string p = fmt::format("{}.grid.{}", name, i);
      manifest[p + ".lm_weight"] = fmt::format("{}", grid[i].params.lm_weight);
      manifest[p + ".validation_cer"] = fmt::format("{}", *grid[i].validation_cer);
      manifest[p + ".digest"] = grid[i].digest();
    }
    manifest[name + ".selected"] = std::to_string(best);
    manifest[name + ".digest"] = out.digests[mode];
    timing += fmt::format("train.{}\t{:.3f}\n", name, out.seconds[mode]);
  }
  write_text(in_dir(out.dir, "config.ini"), dump_config(cfg));
  write_manifest(in_dir(out.dir, "manifest.txt"), manifest);
  write_text(in_dir(out.dir, "timing.tsv"), timing);
  return out;
}

std::vector<std::string> cmd_decode(const std::string& detections_path,
                                    const PipelineConfig& cfg) {
  cfg.decode.validate();
  std::ifstream in(detections_path, std::ios::binary);
  if (!in) throw DataError("cannot open " + detections_path);
  const auto lines = read_detections_jsonl(in, default_alphabet());
  std::vector<std::string> out(lines.size());
  parallel_for(lines.size(), cfg.jobs, [&](std::size_t i) {
    out[i] = decode_line(lines[i].detections, default_alphabet(), cfg.decode);
  });
  return out;
}

std::vector<std::string> cmd_correct(const std::string& checkpoint_path,
                                     const std::vector<std::string>& noisy, std::size_t jobs) {
  const auto ckpt = CorrectorCheckpoint::load(checkpoint_path);
  return correct_lines(noisy, ckpt, jobs);
}

EvalReport cmd_eval(const std::string& hyp_path, const std::string& ref_path,
                    const std::optional<std::string>& noisy_path, const EvalOptions& opts,
                    const std::string& out_dir) {
  const auto hyps = read_lines(hyp_path);
  const auto refs = read_lines(ref_path);
  if (hyps.size() != refs.size())
    throw DataError(fmt::format("{} has {} lines but {} has {}", hyp_path, hyps.size(),
                                ref_path, refs.size()));
  std::vector<std::string> noisy;
  if (noisy_path) {
    noisy = read_lines(*noisy_path);
    if (noisy.size() != refs.size())
      throw DataError(fmt::format("{} has {} lines but {} has {}", *noisy_path, noisy.size(),
                                  ref_path, refs.size()));
  }
  EvalReport report;
  report.systems.push_back(evaluate(fs::path(hyp_path).filename().string(), hyps, refs, noisy, opts));
  report.digests["hyp"] = sha256_file_hex(hyp_path);
  report.digests["ref"] = sha256_file_hex(ref_path);
  if (noisy_path) report.digests["noisy"] = sha256_file_hex(*noisy_path);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_text(in_dir(out_dir, "report.txt"), format_table(report));
    write_text(in_dir(out_dir, "report.tsv"), format_key_values(report));
  }
  return report;
}

PipelineOutput cmd_pipeline(const PipelineConfig& cfg) {
  stage("config", [&] {
    cfg.validate();
    return cfg.required_seed();
  });
  const std::uint64_t seed = cfg.required_seed();
  const SynthOutput synth = stage("synth", [&] { return cmd_synth(cfg); });
  const TrainOutput trained = stage("train", [&] { return cmd_train(cfg); });
  const std::string dir = stage_dir(cfg, "pipeline");
  const auto refs = column(synth.test, true);
  const auto noisy = column(synth.test, false);

  const std::string det_path = in_dir(dir, "detections.jsonl");
  stage("simulate", [&] {
    std::vector<LineDetections> lines(refs.size());
    parallel_for(refs.size(), cfg.jobs, [&](std::size_t i) {
      Rng rng = make_rng(seed, i, kDetectorSalt);
      lines[i] = {static_cast<long long>(i),
                  simulate_detections(refs[i], default_alphabet(), cfg.detector, rng)};
    });
    std::ofstream out(det_path, std::ios::binary);
    if (!out) throw DataError("cannot write " + det_path);
    write_detections_jsonl(out, lines, default_alphabet());
    return 0;
  });
  const auto baseline = stage("decode", [&] {
    std::ifstream in(det_path, std::ios::binary);
    const auto lines = read_detections_jsonl(in, default_alphabet());
    std::vector<std::string> out(refs.size());
    for (const auto& l : lines)
      out.at(static_cast<std::size_t>(l.line_id)) = decode_line(l.detections, default_alphabet(), cfg.decode);
    return out;
  });
  write_lines(in_dir(dir, "baseline.txt"), baseline);

  EvalReport report;
  EvalOptions opts{cfg.nfc};
  report.systems.push_back(evaluate("channel noisy", noisy, refs, {}, opts));
  report.systems.push_back(evaluate("detector baseline", baseline, refs, {}, opts));
  for (CorrectorMode mode : cfg.modes) {
    const std::string name(to_string(mode));
    const auto fixed = stage("correct", [&] {
      return std::make_pair(cmd_correct(trained.checkpoints.at(mode), noisy, cfg.jobs),
                            cmd_correct(trained.checkpoints.at(mode), baseline, cfg.jobs));
    });
    write_lines(in_dir(dir, (name + "_channel.txt").c_str()), fixed.first);
    write_lines(in_dir(dir, (name + "_detector.txt").c_str()), fixed.second);
    auto a = evaluate("channel + " + name, fixed.first, refs, noisy, opts);
    auto b = evaluate("detector + " + name, fixed.second, refs, baseline, opts);
    a.seconds = b.seconds = trained.seconds.at(mode);
    report.systems.push_back(std::move(a));
    report.systems.push_back(std::move(b));
    report.digests["checkpoint." + name] = trained.digests.at(mode);
  }
  report.digests["corpus.test"] = synth.manifest.at("sha256.test.tsv");
  report.digests["config"] = config_digest(cfg);

  // Wall-clock stays out of report.txt and report.tsv so they are
  // byte-reproducible; timing.tsv carries it.
  EvalReport stable = report;
  std::string timing = "system\tadaptation_seconds\n";
  for (auto& s : stable.systems) {
    if (s.seconds) timing += fmt::format("{}\t{:.3f}\n", s.name, *s.seconds);
    s.seconds.reset();
  }
  PipelineOutput out;
  out.report = stable;
  out.report_path = in_dir(dir, "report.txt");
  write_text(out.report_path, format_table(stable));
  write_text(in_dir(dir, "report.tsv"), format_key_values(stable));
  write_text(in_dir(dir, "timing.tsv"), timing);
  write_text(in_dir(dir, "report_timed.txt"), format_table(report, true));
  write_text(in_dir(dir, "config.ini"), dump_config(cfg));
  Manifest manifest = base_manifest(cfg, "pipeline");
  for (const auto& [k, v] : report.digests) manifest["digest." + k] = v;
  manifest["sha256.detections.jsonl"] = sha256_file_hex(det_path);
  manifest["sha256.report.txt"] = sha256_file_hex(out.report_path);
  write_manifest(in_dir(dir, "manifest.txt"), manifest);
  return out;
}

}  // namespace linefix
