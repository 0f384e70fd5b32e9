#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "atm/interpret.hpp"
#include "atm/mfcc.hpp"
#include "atm/vocab.hpp"
#include "json.hpp"

namespace atm {

struct ManifestEntry {
  std::string song_id;
  std::filesystem::path path;  // relative to the manifest root
  std::string genre;
  std::string split;  // "", "train" or "test"
};

struct DatasetManifest {
  std::filesystem::path root;
  std::vector<ManifestEntry> entries;
};

inline constexpr const char* kManifestFile = "manifest.json";

/// Lower-cased label with "hip-hop" / "hip hop" folded to "hiphop".
std::string normalize_genre(std::string label);

/// Uses <root>/manifest.json when present, otherwise treats each
/// subdirectory as a genre holding .wav files. Entries sorted by song_id.
DatasetManifest scan_dataset(const std::filesystem::path& root);

/// Checks ids are unique, labels non-empty and every file exists.
void validate(const DatasetManifest& manifest);

nlohmann::json manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const nlohmann::json& j);

struct BucketSpec {
  int bucket_id = 0;
  std::set<std::string> genres;
};

std::vector<BucketSpec> default_buckets();
/// Parses "2=blues,jazz,country".
BucketSpec parse_bucket(const std::string& text);

struct RunConfig {
  double clip_seconds = kDefaultClipSeconds;
  int sample_rate = kCanonicalSampleRate;
  MfccConfig mfcc;
  std::size_t codebook_size = 3;
  std::size_t kmeans_max_iters = 300;
  double kmeans_tol = 1e-6;
  bool codebook_includes_test = true;
  std::vector<std::size_t> topic_counts{2, 3, 4, 5};
  double alpha = 0.0;  // <= 0 selects 50/K
  double eta = 0.01;
  std::size_t iters = 500;
  std::size_t infer_iters = 100;
  double train_fraction = 0.8;
  std::size_t svm_epochs = 200;
  double svm_lambda = 1e-3;
  std::size_t report_topics = 0;  // 0 selects the first topic count
  std::size_t timeline_window = 11;
  CountMode count_mode = CountMode::PerClip;
  int doughnut_px = 320;
  int timeline_width = 900;
  int timeline_height = 360;
  std::vector<BucketSpec> buckets = default_buckets();
  std::uint64_t seed = 42;
  std::filesystem::path out_dir = "out";
  bool force = false;
};

void validate(const RunConfig& config);
nlohmann::json config_to_json(const RunConfig& config);
/// Applies the keys present in `j` on top of `base`; unknown keys are errors.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});

enum class Stage { Features, Vocab, Train, Eval, Interpret, Viz };
const char* stage_name(Stage stage);
Stage parse_stage(const std::string& name);

class Pipeline {
 public:
  Pipeline(DatasetManifest manifest, RunConfig config);

  const RunConfig& config() const noexcept { return config_; }

  /// Fails with the missing genre name before any processing happens.
  void check_buckets() const;

  /// Runs one stage for one bucket. Requires the upstream artifacts, and
  /// reuses this stage's outputs when their stamp still matches.
  void run_stage(Stage stage, int bucket_id);

  void run_bucket(int bucket_id);

  /// All configured buckets plus the combined accuracy grid in out_dir.
  void run_all();

  std::filesystem::path bucket_dir(int bucket_id) const;

 private:
  const BucketSpec& bucket(int bucket_id) const;
  void check_bucket(const BucketSpec& bucket) const;
  std::vector<const ManifestEntry*> bucket_entries(const BucketSpec& bucket) const;
  std::size_t report_topics() const;

  void features(const BucketSpec& bucket);
  void vocab(const BucketSpec& bucket);
  void train(const BucketSpec& bucket);
  void eval(const BucketSpec& bucket);
  void interpret(const BucketSpec& bucket);
  void viz(const BucketSpec& bucket);

  DatasetManifest manifest_;
  RunConfig config_;
};

/// Filesystem-safe form of a song id.
std::string file_safe(const std::string& id);

}  // namespace atm
