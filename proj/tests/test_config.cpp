#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "linefix/config.hpp"
#include "linefix/error.hpp"

using namespace linefix;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LINEFIX_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("linefix_config_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Config, DumpThenParseIsIdentity) {
  PipelineConfig cfg;
  cfg.seed = 99;
  cfg.channel = ChannelKind::cursive;
  cfg.lm_weights = {0.25, 1.5};
  cfg.modes = {CorrectorMode::token};
  cfg.decode.interleave_blanks = false;
  cfg.detector.p_drop = 0.125;
  const std::string text = dump_config(cfg);
  std::istringstream in(text);
  EXPECT_EQ(dump_config(parse_config(in)), text);
}

TEST(Config, BundledFileLoads) {
  const PipelineConfig cfg = load_config(std::string(LINEFIX_DATA_DIR) + "/pipeline.ini");
  EXPECT_EQ(cfg.required_seed(), 1234u);
  EXPECT_EQ(cfg.channel, ChannelKind::random);
  EXPECT_DOUBLE_EQ(cfg.random.p_sub, 0.05);
  EXPECT_DOUBLE_EQ(cfg.p_augment, 0.2);
  EXPECT_DOUBLE_EQ(cfg.decode.nms_iou_threshold, 0.4);
  EXPECT_EQ(cfg.decode.max_queries, 900u);
}

TEST(Config, RejectsUnknownKeysBadValuesAndMissingSeed) {
  std::istringstream section("[run]\nseed = 1\n[colour]\nx = 1\n");
  EXPECT_THROW(parse_config(section), UsageError);
  std::istringstream key("[run]\nseed = 1\nspeed = 3\n");
  EXPECT_THROW(parse_config(key), UsageError);
  std::istringstream value("[run]\nseed = many\n");
  EXPECT_THROW(parse_config(value), DataError);
  std::istringstream no_seed("[channel]\nkind = random\n");
  EXPECT_THROW(parse_config(no_seed).required_seed(), UsageError);
  std::istringstream rates("[run]\nseed = 1\n[channel]\np_sub = 2\n");
  EXPECT_THROW(parse_config(rates), DataError);
}

TEST(Config, ParamsFollowTheMode) {
  PipelineConfig cfg;
  cfg.seed = 1;
  EXPECT_EQ(cfg.params(CorrectorMode::byte, 0.5).order, cfg.byte_order);
  EXPECT_EQ(cfg.params(CorrectorMode::token, 0.5).order, cfg.token_order);
  EXPECT_DOUBLE_EQ(cfg.params(CorrectorMode::token, 0.75).lm_weight, 0.75);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("--seed 3 dump-config"), 0);
  EXPECT_EQ(run_cli("--no-such-flag"), 1);
  EXPECT_EQ(run_cli("decode"), 1);
  EXPECT_EQ(run_cli("--seed 3 synth --channel gaussian"), 1);

  std::ofstream(dir / "bad.jsonl") << "{\"cx\": 0.5}\n";
  EXPECT_EQ(run_cli("--seed 3 decode --detections " + (dir / "bad.jsonl").string()), 2);
  EXPECT_EQ(run_cli("--seed 3 correct --checkpoint " + (dir / "missing.ckpt").string() +
                    " -i " + (dir / "bad.jsonl").string()),
            2);

  std::ofstream(dir / "hyp.txt") << "the whale\n";
  std::ofstream(dir / "ref.txt") << "the whale\nthe sea\n";
  EXPECT_EQ(run_cli("eval --hyp " + (dir / "hyp.txt").string() + " --ref " +
                    (dir / "ref.txt").string()),
            2);
  std::ofstream(dir / "ref.txt") << "the whale\n";
  EXPECT_EQ(run_cli("eval --hyp " + (dir / "hyp.txt").string() + " --ref " +
                    (dir / "ref.txt").string() + " --out-dir " + (dir / "report").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "report" / "report.tsv"));
}

TEST(Cli, DecodeReadsDetectionFiles) {
  const fs::path dir = scratch("decode");
  {
    std::ofstream out(dir / "dets.jsonl");
    const char* letters[] = {"b", "o", "o", "k"};
    for (int i = 0; i < 4; ++i)
      out << "{\"line_id\": 0, \"cx\": " << 0.125 + 0.25 * i
          << ", \"cy\": 0.5, \"w\": 0.2, \"h\": 0.5, \"class\": \"" << letters[i]
          << "\", \"score\": 0.9}\n";
  }
  const std::string base = "--seed 1 decode --detections " + (dir / "dets.jsonl").string();
  ASSERT_EQ(run_cli(base + " -o " + (dir / "on.txt").string()), 0);
  ASSERT_EQ(run_cli(base + " --no-interleave -o " + (dir / "off.txt").string()), 0);
  std::string on, off;
  std::getline(std::ifstream(dir / "on.txt"), on);
  std::getline(std::ifstream(dir / "off.txt"), off);
  EXPECT_EQ(on, "book");
  EXPECT_EQ(off, "bok");
}
