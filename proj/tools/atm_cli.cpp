// atm: command-line front end over the libatm C API.

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "atm/atm.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliError {
  atm_status status;
  std::string message;
};

void check(atm_status status, const std::string& context) {
  if (status != ATM_OK) throw CliError{status, context + ": " + atm_last_error()};
}

struct ConfigDeleter {
  void operator()(atm_config* c) const { atm_config_destroy(c); }
};
struct ManifestDeleter {
  void operator()(atm_manifest* m) const { atm_manifest_destroy(m); }
};
using ConfigPtr = std::unique_ptr<atm_config, ConfigDeleter>;
using ManifestPtr = std::unique_ptr<atm_manifest, ManifestDeleter>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Scalar or array value in the TOML subset read by parse_toml.
json toml_value(const std::string& raw, int line) {
  const std::string v = trim(raw);
  if (v.empty()) throw CliError{ATM_ERR_INVALID_ARGUMENT, "config line " + std::to_string(line) + ": empty value"};
  if (v.front() == '"' || v.front() == '\'') {
    if (v.size() < 2 || v.back() != v.front()) {
      throw CliError{ATM_ERR_INVALID_ARGUMENT, "config line " + std::to_string(line) + ": unterminated string"};
    }
    return v.substr(1, v.size() - 2);
  }
  if (v.front() == '[') {
    if (v.back() != ']') throw CliError{ATM_ERR_INVALID_ARGUMENT, "config line " + std::to_string(line) + ": bad array"};
    json arr = json::array();
    std::stringstream ss(v.substr(1, v.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!trim(item).empty()) arr.push_back(toml_value(item, line));
    }
    return arr;
  }
  if (v == "true") return true;
  if (v == "false") return false;
  try {
    return json::parse(v);
  } catch (const json::exception&) {
    throw CliError{ATM_ERR_INVALID_ARGUMENT, "config line " + std::to_string(line) + ": cannot parse '" + v + "'"};
  }
}

// Flat TOML: `key = value`, `[table]` headers one level deep, # comments.
json parse_toml(const std::string& text) {
  json root = json::object();
  json* table = &root;
  std::stringstream ss(text);
  std::string line;
  int n = 0;
  while (std::getline(ss, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos && line.find('"') == std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      const std::string name = trim(line.substr(1, line.find(']') - 1));
      root[name] = json::object();
      table = &root[name];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw CliError{ATM_ERR_INVALID_ARGUMENT, "config line " + std::to_string(n) + ": expected key = value"};
    std::string key = trim(line.substr(0, eq));
    if (key.size() >= 2 && key.front() == '"') key = key.substr(1, key.size() - 2);
    (*table)[key] = toml_value(line.substr(eq + 1), n);
  }
  return root;
}

json load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{ATM_ERR_IO, "cannot open config file " + path};
  std::stringstream ss;
  ss << in.rdbuf();
  if (fs::path(path).extension() == ".toml") return parse_toml(ss.str());
  try {
    return json::parse(ss.str());
  } catch (const json::exception& e) {
    throw CliError{ATM_ERR_INVALID_ARGUMENT, path + ": " + e.what()};
  }
}

std::vector<std::size_t> parse_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    if (!std::all_of(item.begin(), item.end(), [](unsigned char c) { return std::isdigit(c); })) {
      throw CliError{ATM_ERR_INVALID_ARGUMENT, "expected a comma-separated list of integers, got '" + text + "'"};
    }
    out.push_back(std::stoul(item));
  }
  return out;
}

struct Options {
  std::string config_file;
  std::string data;
  std::optional<std::string> out;
  std::optional<double> clip_seconds;
  std::optional<std::size_t> codebook_size;
  std::optional<std::string> topics;
  std::optional<double> alpha;
  std::optional<double> eta;
  std::optional<std::size_t> iters;
  std::optional<std::size_t> infer_iters;
  std::optional<double> train_fraction;
  std::optional<std::size_t> window;
  std::optional<std::size_t> report_topics;
  std::optional<std::string> count_mode;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> bucket_specs;
  std::string bucket_ids;
  bool force = false;
};

void add_run_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_file, "JSON or TOML config file; flags take precedence");
  cmd->add_option("--data", o.data, "Dataset root (genre subdirectories or manifest.json)");
  cmd->add_option("--out", o.out, "Artifact directory");
  cmd->add_option("--clip-seconds", o.clip_seconds, "Clip length in seconds");
  cmd->add_option("--codebook-size", o.codebook_size, "k-means codebook size V");
  cmd->add_option("--topics", o.topics, "Comma-separated topic counts, e.g. 2,3,4,5");
  cmd->add_option("--alpha", o.alpha, "Symmetric document-topic prior (default 50/K)");
  cmd->add_option("--eta", o.eta, "Topic-word prior");
  cmd->add_option("--iters", o.iters, "Gibbs sweeps for training");
  cmd->add_option("--infer-iters", o.infer_iters, "Gibbs sweeps for fold-in inference");
  cmd->add_option("--train-fraction", o.train_fraction, "Stratified train share");
  cmd->add_option("--window", o.window, "Timeline smoothing window in clips");
  cmd->add_option("--report-topics", o.report_topics, "Topic count used for interpretation and charts");
  cmd->add_option("--count-mode", o.count_mode, "per-clip or per-song word profiles");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--bucket", o.bucket_specs, "Bucket definition ID=genre,genre,... (repeatable)");
  cmd->add_option("--buckets", o.bucket_ids, "Comma-separated bucket ids to process (default: all)");
  cmd->add_flag("--force", o.force, "Recompute even when cached artifacts match");
}

ConfigPtr build_config(const Options& o) {
  atm_config* raw = nullptr;
  check(atm_config_create(&raw), "config");
  ConfigPtr cfg(raw);
  if (!o.config_file.empty()) check(atm_config_merge_json(cfg.get(), load_config_file(o.config_file).dump().c_str()), o.config_file);

  json flags = json::object();
  if (o.out) flags["out"] = *o.out;
  if (o.clip_seconds) flags["clip_seconds"] = *o.clip_seconds;
  if (o.codebook_size) flags["codebook_size"] = *o.codebook_size;
  if (o.topics) flags["topics"] = parse_list(*o.topics);
  if (o.alpha) flags["alpha"] = *o.alpha;
  if (o.eta) flags["eta"] = *o.eta;
  if (o.iters) flags["iters"] = *o.iters;
  if (o.infer_iters) flags["infer_iters"] = *o.infer_iters;
  if (o.train_fraction) flags["train_fraction"] = *o.train_fraction;
  if (o.window) flags["timeline_window"] = *o.window;
  if (o.report_topics) flags["report_topics"] = *o.report_topics;
  if (o.count_mode) flags["count_mode"] = *o.count_mode;
  if (o.seed) flags["seed"] = *o.seed;
  if (o.force) flags["force"] = true;

  char* text = nullptr;
  check(atm_config_to_json(cfg.get(), &text), "config");
  json current = json::parse(text);
  atm_free_string(text);
  json buckets = current["buckets"];
  for (const auto& spec : o.bucket_specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw CliError{ATM_ERR_INVALID_ARGUMENT, "--bucket expects ID=genre,..."};
    json genres = json::array();
    std::stringstream ss(spec.substr(eq + 1));
    std::string g;
    while (std::getline(ss, g, ',')) {
      if (!trim(g).empty()) genres.push_back(trim(g));
    }
    buckets[trim(spec.substr(0, eq))] = genres;
  }
  if (!o.bucket_ids.empty()) {
    json selected = json::object();
    for (std::size_t id : parse_list(o.bucket_ids)) {
      const std::string key = std::to_string(id);
      if (!buckets.contains(key)) throw CliError{ATM_ERR_INVALID_ARGUMENT, "bucket " + key + " is not defined"};
      selected[key] = buckets[key];
    }
    buckets = selected;
  }
  flags["buckets"] = buckets;
  check(atm_config_merge_json(cfg.get(), flags.dump().c_str()), "flags");
  return cfg;
}

fs::path out_dir(const atm_config* cfg) {
  char* text = nullptr;
  check(atm_config_to_json(cfg, &text), "config");
  const json j = json::parse(text);
  atm_free_string(text);
  return j.at("out").get<std::string>();
}

std::vector<int> configured_buckets(const atm_config* cfg) {
  char* text = nullptr;
  check(atm_config_to_json(cfg, &text), "config");
  const json j = json::parse(text);
  atm_free_string(text);
  std::vector<int> ids;
  for (const auto& [k, _] : j.at("buckets").items()) ids.push_back(std::stoi(k));
  std::sort(ids.begin(), ids.end());
  return ids;
}

// --data wins; otherwise reuse <out>/manifest.json from an earlier scan.
ManifestPtr load_manifest(const Options& o, const atm_config* cfg) {
  atm_manifest* raw = nullptr;
  if (!o.data.empty()) {
    check(atm_scan_dataset(o.data.c_str(), &raw), "scan");
  } else {
    const fs::path p = out_dir(cfg) / "manifest.json";
    if (!fs::exists(p)) {
      throw CliError{ATM_ERR_MISSING_ARTIFACT, "no --data given and " + p.string() + " does not exist; run 'atm scan' first"};
    }
    check(atm_manifest_load(p.string().c_str(), &raw), "manifest");
  }
  return ManifestPtr(raw);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acoustic topic models: interpret music genres through LDA over MFCC words"};
  app.require_subcommand(1);
  app.set_version_flag("--version", atm_version());

  Options o;
  auto* scan = app.add_subcommand("scan", "Index a dataset directory into <out>/manifest.json");
  add_run_flags(scan, o);
  scan->get_option("--data")->required();

  struct StageCommand {
    const char* name;
    const char* help;
    atm_stage stage;
  };
  const StageCommand stage_cmds[] = {
      {"features", "Decode songs and compute per-clip MFCC features", ATM_STAGE_FEATURES},
      {"vocab", "Fit the k-means codebook and tokenize songs", ATM_STAGE_VOCAB},
      {"train", "Train LDA per topic count and infer test thetas", ATM_STAGE_TRAIN},
      {"eval", "Score topic features with a linear SVM", ATM_STAGE_EVAL},
      {"interpret", "Map words, topics, songs and timelines to genre mixtures", ATM_STAGE_INTERPRET},
      {"viz", "Write report.json and SVG charts", ATM_STAGE_VIZ},
  };
  std::vector<std::pair<CLI::App*, atm_stage>> stage_apps;
  for (const auto& s : stage_cmds) {
    auto* cmd = app.add_subcommand(s.name, s.help);
    add_run_flags(cmd, o);
    stage_apps.emplace_back(cmd, s.stage);
  }
  auto* run_all = app.add_subcommand("run-all", "Run every stage for every selected bucket");
  add_run_flags(run_all, o);

  std::string fixture_dir;
  std::uint64_t fixture_seed = 7;
  std::size_t fixture_songs = 3;
  double fixture_seconds = 3.0;
  auto* fixture = app.add_subcommand("make-fixture", "Write a synthetic rock/metal/pop WAV dataset");
  fixture->add_option("dir", fixture_dir, "Output directory")->required();
  fixture->add_option("--seed", fixture_seed, "Generator seed");
  fixture->add_option("--songs", fixture_songs, "Songs per genre");
  fixture->add_option("--seconds", fixture_seconds, "Song length in seconds");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fixture->parsed()) {
      check(atm_make_fixture(fixture_dir.c_str(), fixture_seed, fixture_songs, fixture_seconds), "make-fixture");
      std::cout << "wrote fixture to " << fixture_dir << "\n";
      return 0;
    }
    const ConfigPtr cfg = build_config(o);
    if (scan->parsed()) {
      atm_manifest* raw = nullptr;
      check(atm_scan_dataset(o.data.c_str(), &raw), "scan");
      const ManifestPtr manifest(raw);
      const fs::path dest = out_dir(cfg.get()) / "manifest.json";
      check(atm_manifest_save(manifest.get(), dest.string().c_str()), "scan");
      std::cout << atm_manifest_size(manifest.get()) << " songs -> " << dest.string() << "\n";
      return 0;
    }
    const ManifestPtr manifest = load_manifest(o, cfg.get());
    if (run_all->parsed()) {
      check(atm_run_all(manifest.get(), cfg.get()), "run-all");
      std::cout << "artifacts in " << out_dir(cfg.get()).string() << "\n";
      return 0;
    }
    for (const auto& [cmd, stage] : stage_apps) {
      if (!cmd->parsed()) continue;
      for (int id : configured_buckets(cfg.get())) {
        check(atm_run_stage(manifest.get(), cfg.get(), id, stage), cmd->get_name());
        std::cout << cmd->get_name() << ": bucket" << id << " done\n";
      }
    }
    return 0;
  } catch (const CliError& e) {
    std::cerr << "atm: error: " << e.message << "\n";
    return static_cast<int>(e.status) == 0 ? 1 : static_cast<int>(e.status);
  }
}
