#include "linefix/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "linefix/error.hpp"
#include "linefix/text.hpp"

namespace linefix {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> kKeys = {
      {"paths", {"corpus", "work_dir"}},
      {"run", {"seed", "jobs"}},
      {"channel", {"kind", "p_sub", "p_ins", "p_del", "rules", "rule_scale", "p_augment"}},
      {"domain", {"orthography", "rules"}},
      {"corrector",
       {"modes", "byte_order", "token_order", "smoothing_k", "lm_weights", "beam_width",
        "edit_radius", "candidates", "max_deletions", "bpe_vocab"}},
      {"decode", {"nms_iou", "score_floor", "max_queries", "interleave_blanks"}},
      {"detector",
       {"p_substitute", "p_duplicate", "p_spurious", "p_drop", "jitter_x", "jitter_y",
        "jitter_size"}},
      {"report", {"nfc"}},
  };
  return kKeys;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',') {
      const auto b = cur.find_first_not_of(" \t");
      const auto e = cur.find_last_not_of(" \t");
      if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  return out;
}

template <typename T>
T convert(const std::string& key, const std::string& value) {
  std::istringstream is(value);
  T out{};
  is >> out;
  if (!is || is.peek() != std::char_traits<char>::eof())
    throw DataError(fmt::format("config: bad value '{}' for {}", value, key));
  return out;
}

template <>
bool convert<bool>(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw DataError(fmt::format("config: bad boolean '{}' for {}", value, key));
}

template <>
std::string convert<std::string>(const std::string&, const std::string& value) {
  return value;
}

}  // namespace

std::string_view to_string(Orthography o) {
  return o == Orthography::modern ? "modern" : "archaic";
}

void PipelineConfig::validate() const {
  random.validate();
  decode.validate();
  detector.validate();
  if (!(rule_scale >= 0.0)) throw std::invalid_argument("rule_scale must be non-negative");
  if (!(p_augment >= 0.0 && p_augment <= 1.0))
    throw std::invalid_argument("p_augment must lie in [0, 1]");
  if (modes.empty()) throw std::invalid_argument("at least one corrector mode is required");
  if (lm_weights.empty()) throw std::invalid_argument("lm_weights grid is empty");
  if (jobs < 1) throw std::invalid_argument("jobs must be at least 1");
  for (CorrectorMode m : modes)
    for (double w : lm_weights) params(m, w).validate();
}

std::uint64_t PipelineConfig::required_seed() const {
  if (!seed) throw UsageError("a seed is required ([run] seed or --seed)");
  return *seed;
}

NoiseChannel PipelineConfig::noise_channel() const {
  NoiseChannel ch;
  ch.kind = channel;
  ch.random = random;
  ch.p_augment = p_augment;
  if (channel == ChannelKind::cursive || channel == ChannelKind::archaic) {
    ConfusionTable table = !channel_rules.empty() ? ConfusionTable::load(channel_rules)
                           : channel == ChannelKind::cursive ? ConfusionTable::cursive_default()
                                                             : ConfusionTable::archaic_default();
    ch.table = table.scaled(rule_scale);
  }
  return ch;
}

ConfusionTable PipelineConfig::domain_table() const {
  return domain_rules.empty() ? ConfusionTable::archaic_default()
                              : ConfusionTable::load(domain_rules);
}

CorrectorParams PipelineConfig::params(CorrectorMode mode, double lm_weight) const {
  CorrectorParams p = CorrectorParams::defaults(mode);
  p.order = mode == CorrectorMode::byte ? byte_order : token_order;
  p.smoothing_k = smoothing_k;
  p.lm_weight = lm_weight;
  p.beam_width = beam_width;
  p.edit_radius = edit_radius;
  p.candidates = candidates;
  p.max_deletions = max_deletions;
  p.bpe_vocab = bpe_vocab;
  return p;
}

PipelineConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  const auto& keys = known_keys();
  for (const auto& [section, body] : tree) {
    const auto it = keys.find(section);
    if (it == keys.end())
      throw UsageError("config: unknown section [" + section + "]");
    for (const auto& [key, value] : body)
      if (!it->second.count(key))
        throw UsageError(fmt::format("config: unknown key {}.{}", section, key));
  }
  PipelineConfig c;
  auto get = [&](const std::string& path, auto& field) {
    using T = std::decay_t<decltype(field)>;
    if (auto v = tree.get_optional<std::string>(path)) field = convert<T>(path, *v);
  };
  get("paths.corpus", c.corpus);
  get("paths.work_dir", c.work_dir);
  if (auto v = tree.get_optional<std::string>("run.seed"))
    c.seed = convert<std::uint64_t>("run.seed", *v);
  get("run.jobs", c.jobs);
  if (auto v = tree.get_optional<std::string>("channel.kind")) c.channel = parse_channel_kind(*v);
  get("channel.p_sub", c.random.p_sub);
  get("channel.p_ins", c.random.p_ins);
  get("channel.p_del", c.random.p_del);
  get("channel.rules", c.channel_rules);
  get("channel.rule_scale", c.rule_scale);
  get("channel.p_augment", c.p_augment);
  if (auto v = tree.get_optional<std::string>("domain.orthography")) {
    if (*v == "modern") c.orthography = Orthography::modern;
    else if (*v == "archaic") c.orthography = Orthography::archaic;
    else throw DataError("config: orthography must be modern or archaic");
  }
  get("domain.rules", c.domain_rules);
  if (auto v = tree.get_optional<std::string>("corrector.modes")) {
    c.modes.clear();
    for (const auto& m : split_list(*v)) c.modes.push_back(parse_corrector_mode(m));
  }
  get("corrector.byte_order", c.byte_order);
  get("corrector.token_order", c.token_order);
  get("corrector.smoothing_k", c.smoothing_k);
  if (auto v = tree.get_optional<std::string>("corrector.lm_weights")) {
    c.lm_weights.clear();
    for (const auto& w : split_list(*v)) c.lm_weights.push_back(convert<double>("lm_weights", w));
  }
  get("corrector.beam_width", c.beam_width);
  get("corrector.edit_radius", c.edit_radius);
  get("corrector.candidates", c.candidates);
  get("corrector.max_deletions", c.max_deletions);
  get("corrector.bpe_vocab", c.bpe_vocab);
  get("decode.nms_iou", c.decode.nms_iou_threshold);
  get("decode.score_floor", c.decode.score_floor);
  get("decode.max_queries", c.decode.max_queries);
  get("decode.interleave_blanks", c.decode.interleave_blanks);
  get("detector.p_substitute", c.detector.p_substitute);
  get("detector.p_duplicate", c.detector.p_duplicate);
  get("detector.p_spurious", c.detector.p_spurious);
  get("detector.p_drop", c.detector.p_drop);
  get("detector.jitter_x", c.detector.jitter_x);
  get("detector.jitter_y", c.detector.jitter_y);
  get("detector.jitter_size", c.detector.jitter_size);
  get("report.nfc", c.nfc);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path);
  return parse_config(in);
}

std::string dump_config(const PipelineConfig& c) {
  std::vector<std::string> modes;
  for (auto m : c.modes) modes.emplace_back(to_string(m));
  std::vector<std::string> weights;
  for (double w : c.lm_weights) weights.push_back(fmt::format("{}", w));
  std::string out;
  out += fmt::format("[paths]\ncorpus = {}\nwork_dir = {}\n\n", c.corpus, c.work_dir);
  out += fmt::format("[run]\nseed = {}\njobs = {}\n\n", c.seed.value_or(1), c.jobs);
  out += fmt::format(
      "[channel]\nkind = {}\np_sub = {}\np_ins = {}\np_del = {}\nrules = {}\n"
      "rule_scale = {}\np_augment = {}\n\n",
      to_string(c.channel), c.random.p_sub, c.random.p_ins, c.random.p_del, c.channel_rules,
      c.rule_scale, c.p_augment);
  out += fmt::format("[domain]\northography = {}\nrules = {}\n\n", to_string(c.orthography),
                     c.domain_rules);
  out += fmt::format(
      "[corrector]\nmodes = {}\nbyte_order = {}\ntoken_order = {}\nsmoothing_k = {}\n"
      "lm_weights = {}\nbeam_width = {}\nedit_radius = {}\ncandidates = {}\n"
      "max_deletions = {}\nbpe_vocab = {}\n\n",
      join(modes, ","), c.byte_order, c.token_order, c.smoothing_k, join(weights, ","),
      c.beam_width, c.edit_radius, c.candidates, c.max_deletions, c.bpe_vocab);
  out += fmt::format(
      "[decode]\nnms_iou = {}\nscore_floor = {}\nmax_queries = {}\ninterleave_blanks = {}\n\n",
      c.decode.nms_iou_threshold, c.decode.score_floor, c.decode.max_queries,
      c.decode.interleave_blanks);
  out += fmt::format(
      "[detector]\np_substitute = {}\np_duplicate = {}\np_spurious = {}\np_drop = {}\n"
      "jitter_x = {}\njitter_y = {}\njitter_size = {}\n\n",
      c.detector.p_substitute, c.detector.p_duplicate, c.detector.p_spurious, c.detector.p_drop,
      c.detector.jitter_x, c.detector.jitter_y, c.detector.jitter_size);
  out += fmt::format("[report]\nnfc = {}\n", c.nfc);
  return out;
}

}  // namespace linefix
