#include <fmt/format.h>

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "linefix/config.hpp"
#include "linefix/error.hpp"
#include "linefix/pipeline.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

void emit_lines(const std::vector<std::string>& lines, const std::string& path) {
  if (path.empty() || path == "-") {
    for (const auto& l : lines) std::cout << l << '\n';
    return;
  }
  linefix::write_lines(path, lines);
}

std::vector<std::string> input_lines(const std::string& path) {
  if (!path.empty() && path != "-") return linefix::read_lines(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(std::cin, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"linefix: detection decoding, synthetic noise and text-line correction"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::size_t jobs = 0;
  std::optional<std::uint64_t> seed;
  std::string work_dir;
  bool dump_flag = false;
  app.add_option("--config", config_path, "INI configuration file");
  app.add_option("--jobs", jobs, "worker threads (default from config, else 1)");
  app.add_option("--seed", seed, "random seed (overrides [run] seed)");
  app.add_option("--work-dir", work_dir, "output root (overrides [paths] work_dir)");
  app.add_flag("--dump-config", dump_flag, "print the effective configuration and exit");

  auto* synth = app.add_subcommand("synth", "build train/val/test noisy-clean pairs");
  std::string channel_name, orthography, corpus;
  synth->add_option("--channel", channel_name, "identity|random|cursive|archaic");
  synth->add_option("--orthography", orthography, "modern|archaic");
  synth->add_option("--corpus", corpus, "clean corpus, one line per text line");

  auto* train = app.add_subcommand("train", "train correctors and keep the best on validation");
  std::vector<std::string> modes;
  std::string noise_name;
  train->add_option("--mode", modes, "byte|token (repeatable)");
  train->add_option("--noise", noise_name, "run synth first with this channel");

  auto* decode = app.add_subcommand("decode", "detections JSONL to transcripts");
  std::string detections, decode_out;
  std::optional<double> nms_iou;
  bool no_interleave = false;
  decode->add_option("--detections", detections, "JSONL detections")->required();
  decode->add_option("--nms-iou", nms_iou, "NMS IoU threshold");
  decode->add_flag("--no-interleave", no_interleave, "disable blank interleaving");
  decode->add_option("-o,--output", decode_out, "output file (default stdout)");

  auto* correct = app.add_subcommand("correct", "correct noisy lines with a checkpoint");
  std::string checkpoint, correct_in, correct_out;
  correct->add_option("--checkpoint", checkpoint, "checkpoint archive")->required();
  correct->add_option("-i,--input", correct_in, "noisy lines (default stdin)");
  correct->add_option("-o,--output", correct_out, "output file (default stdout)");

  auto* eval = app.add_subcommand("eval", "CER/WER report for hypothesis lines");
  std::string hyp, ref, noisy, eval_dir;
  bool nfc = false;
  eval->add_option("--hyp", hyp, "hypothesis lines")->required();
  eval->add_option("--ref", ref, "reference lines")->required();
  eval->add_option("--noisy", noisy, "uncorrected lines; enables the correction ratio");
  eval->add_option("--out-dir", eval_dir, "also write report.txt and report.tsv here");
  eval->add_flag("--nfc", nfc, "NFC-normalize before scoring");

  auto* pipeline = app.add_subcommand("pipeline", "synth, train, decode, correct and eval");
  auto* dump = app.add_subcommand("dump-config", "print the effective configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    linefix::PipelineConfig cfg;
    if (!config_path.empty()) cfg = linefix::load_config(config_path);
    if (seed) cfg.seed = seed;
    if (jobs > 0) cfg.jobs = jobs;
    if (!work_dir.empty()) cfg.work_dir = work_dir;
    if (!channel_name.empty()) cfg.channel = linefix::parse_channel_kind(channel_name);
    if (!noise_name.empty()) cfg.channel = linefix::parse_channel_kind(noise_name);
    if (!orthography.empty()) {
      if (orthography == "modern") cfg.orthography = linefix::Orthography::modern;
      else if (orthography == "archaic") cfg.orthography = linefix::Orthography::archaic;
      else throw linefix::UsageError("--orthography must be modern or archaic");
    }
    if (!corpus.empty()) cfg.corpus = corpus;
    if (!modes.empty()) {
      cfg.modes.clear();
      for (const auto& m : modes) cfg.modes.push_back(linefix::parse_corrector_mode(m));
    }
    if (nms_iou) cfg.decode.nms_iou_threshold = *nms_iou;
    if (no_interleave) cfg.decode.interleave_blanks = false;

    if (dump_flag || dump->parsed()) {
      std::cout << linefix::dump_config(cfg);
      return 0;
    }
    if (synth->parsed()) {
      const auto out = linefix::cmd_synth(cfg);
      fmt::print("{}: train {} val {} test {}\n", out.dir, out.train.size(), out.val.size(),
                 out.test.size());
    } else if (train->parsed()) {
      if (!noise_name.empty()) linefix::cmd_synth(cfg);
      const auto out = linefix::cmd_train(cfg);
      for (const auto& [mode, path] : out.checkpoints)
        fmt::print("{}\t{}\tvalidation_cer={:.4f}\tsha256={}\n", linefix::to_string(mode), path,
                   out.validation_cer.at(mode), out.digests.at(mode));
    } else if (decode->parsed()) {
      emit_lines(linefix::cmd_decode(detections, cfg), decode_out);
    } else if (correct->parsed()) {
      emit_lines(linefix::cmd_correct(checkpoint, input_lines(correct_in), cfg.jobs),
                 correct_out);
    } else if (eval->parsed()) {
      std::optional<std::string> noisy_path;
      if (!noisy.empty()) noisy_path = noisy;
      const auto report = linefix::cmd_eval(hyp, ref, noisy_path, {nfc}, eval_dir);
      std::cout << linefix::format_table(report) << '\n' << linefix::format_key_values(report);
    } else if (pipeline->parsed()) {
      const auto out = linefix::cmd_pipeline(cfg);
      std::cout << linefix::format_table(out.report);
      fmt::print("report: {}\n", out.report_path);
    } else {
      std::cout << app.help();
      return kExitUsage;
    }
    return 0;
  } catch (const linefix::UsageError& e) {
    fmt::print(stderr, "linefix: {}\n", e.what());
    return kExitUsage;
  } catch (const linefix::DataError& e) {
    fmt::print(stderr, "linefix: {}\n", e.what());
    return kExitData;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "linefix: {}\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    fmt::print(stderr, "linefix: internal error: {}\n", e.what());
    return kExitInternal;
  }
}
