#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "linefix/config.hpp"
#include "linefix/corrector.hpp"
#include "linefix/metrics.hpp"

namespace linefix {

using Manifest = std::map<std::string, std::string>;

// Line files: UTF-8, '\n' separated, a trailing '\r' is dropped.
std::vector<std::string> read_lines(const std::string& path);
void write_lines(const std::string& path, const std::vector<std::string>& lines);
// Pair files: noisy<TAB>clean per line.
std::vector<TextPair> read_pairs(const std::string& path);
void write_pairs(const std::string& path, const std::vector<TextPair>& pairs);
void write_manifest(const std::string& path, const Manifest& manifest);
Manifest read_manifest(const std::string& path);

enum class Split { train, val, test };
// By content hash, so editing the corpus never reshuffles other lines.
Split split_of(std::string_view line);

struct SynthOutput {
  std::string dir;
  std::vector<TextPair> train, val, test;
  // Clean lines before domain rewriting.
  std::vector<std::string> train_modern, test_modern;
  Manifest manifest;
};

struct TrainOutput {
  std::string dir;
  std::map<CorrectorMode, std::string> checkpoints;
  std::map<CorrectorMode, std::string> digests;
  std::map<CorrectorMode, double> validation_cer;
  std::map<CorrectorMode, double> seconds;
};

struct PipelineOutput {
  EvalReport report;
  std::string report_path;
};

// <work>/synth: train.tsv val.tsv test.tsv train_modern.txt test_modern.txt
// manifest.txt
SynthOutput cmd_synth(const PipelineConfig& cfg);
// <work>/train: <mode>.ckpt per configured mode, grid over lm_weights,
// selection by validation CER.
TrainOutput cmd_train(const PipelineConfig& cfg);
// One transcript per line id, ascending.
std::vector<std::string> cmd_decode(const std::string& detections_path, const PipelineConfig& cfg);
std::vector<std::string> cmd_correct(const std::string& checkpoint_path,
                                     const std::vector<std::string>& noisy, std::size_t jobs);
// Writes report.txt and report.tsv into out_dir when it is non-empty.
EvalReport cmd_eval(const std::string& hyp_path, const std::string& ref_path,
                    const std::optional<std::string>& noisy_path, const EvalOptions& opts,
                    const std::string& out_dir = {});
// synth -> train -> simulate detections -> decode -> correct -> eval, into
// <work>/pipeline. A failing stage is reported by name.
PipelineOutput cmd_pipeline(const PipelineConfig& cfg);

}  // namespace linefix
