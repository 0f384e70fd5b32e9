#include "atm/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "atm/audio.hpp"
#include "atm/error.hpp"
#include "atm/eval.hpp"
#include "atm/hash.hpp"
#include "atm/lda.hpp"
#include "atm/serialize.hpp"
#include "atm/viz.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace atm {

// ---------------------------------------------------------------------------
// Manifest

std::string normalize_genre(std::string label) {
  std::transform(label.begin(), label.end(), label.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (label == "hip-hop" || label == "hip hop" || label == "hip_hop") label = "hiphop";
  return label;
}

namespace {

bool is_wav(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".wav";
}

void sort_and_check_unique(DatasetManifest& m) {
  std::sort(m.entries.begin(), m.entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.song_id < b.song_id; });
  for (std::size_t i = 1; i < m.entries.size(); ++i) {
    if (m.entries[i].song_id == m.entries[i - 1].song_id) {
      fail(ErrorCode::DuplicateSongId, "song id '" + m.entries[i].song_id + "' appears twice");
    }
  }
}

}  // namespace

DatasetManifest scan_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) fail(ErrorCode::Io, root.string() + " is not a directory");
  DatasetManifest m;
  if (fs::exists(root / kManifestFile)) {
    m = manifest_from_json(read_json_file(root / kManifestFile));
    m.root = root;
  } else {
    m.root = root;
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(root)) {
      if (e.is_directory()) dirs.push_back(e.path());
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto& dir : dirs) {
      const std::string genre = normalize_genre(dir.filename().string());
      std::vector<fs::path> files;
      for (const auto& f : fs::directory_iterator(dir)) {
        if (f.is_regular_file() && is_wav(f.path())) files.push_back(f.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        m.entries.push_back({genre + "-" + f.stem().string(), fs::relative(f, root), genre, ""});
      }
    }
  }
  if (m.entries.empty()) fail(ErrorCode::EmptyDataset, "no .wav files under " + root.string());
  sort_and_check_unique(m);
  return m;
}

void validate(const DatasetManifest& m) {
  if (m.entries.empty()) fail(ErrorCode::EmptyDataset, "manifest has no entries");
  std::set<std::string> ids;
  for (const auto& e : m.entries) {
    if (e.genre.empty()) fail(ErrorCode::MissingLabel, "song '" + e.song_id + "' has an empty genre");
    if (!ids.insert(e.song_id).second) fail(ErrorCode::DuplicateSongId, e.song_id);
    if (!e.split.empty() && e.split != "train" && e.split != "test") {
      fail(ErrorCode::InvalidArgument, "song '" + e.song_id + "' has split tag '" + e.split + "'");
    }
    if (!fs::exists(m.root / e.path)) fail(ErrorCode::Io, "missing file " + (m.root / e.path).string());
  }
}

json manifest_to_json(const DatasetManifest& m) {
  json entries = json::array();
  for (const auto& e : m.entries) {
    json j = {{"song_id", e.song_id}, {"path", e.path.generic_string()}, {"genre", e.genre}};
    if (!e.split.empty()) j["split"] = e.split;
    entries.push_back(j);
  }
  return {{"schema_version", 1}, {"root", m.root.generic_string()}, {"entries", entries}};
}

DatasetManifest manifest_from_json(const json& j) {
  DatasetManifest m;
  if (j.contains("root")) m.root = j.at("root").get<std::string>();
  for (const auto& e : require(j, "entries")) {
    ManifestEntry entry;
    entry.path = require(e, "path").get<std::string>();
    entry.genre = normalize_genre(require(e, "genre").get<std::string>());
    entry.song_id = e.contains("song_id") ? e.at("song_id").get<std::string>()
                                          : entry.genre + "-" + entry.path.stem().string();
    if (e.contains("split")) entry.split = e.at("split").get<std::string>();
    m.entries.push_back(std::move(entry));
  }
  sort_and_check_unique(m);
  return m;
}

// ---------------------------------------------------------------------------
// Buckets and config

std::vector<BucketSpec> default_buckets() {
  return {{1, {"rock", "metal", "pop"}}, {2, {"blues", "jazz", "country"}}, {3, {"reggae", "disco", "hiphop"}}};
}

BucketSpec parse_bucket(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) fail(ErrorCode::InvalidArgument, "bucket spec '" + text + "' needs ID=genre,...");
  BucketSpec b;
  try {
    b.bucket_id = std::stoi(text.substr(0, eq));
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidArgument, "bad bucket id in '" + text + "'");
  }
  std::string rest = text.substr(eq + 1);
  std::size_t pos = 0;
  while (pos <= rest.size()) {
    const auto comma = rest.find(',', pos);
    const std::string g = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!g.empty()) b.genres.insert(normalize_genre(g));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (b.genres.empty()) fail(ErrorCode::InvalidArgument, "bucket " + std::to_string(b.bucket_id) + " has no genres");
  return b;
}

void validate(const RunConfig& c) {
  const auto bad = [](const std::string& what) { fail(ErrorCode::InvalidArgument, "config: " + what); };
  if (!(c.clip_seconds > 0.0)) bad("clip_seconds must be positive");
  if (c.sample_rate <= 0) bad("sample_rate must be positive");
  validate(c.mfcc, c.sample_rate);
  if (static_cast<std::size_t>(std::llround(c.clip_seconds * c.sample_rate)) < c.mfcc.n_fft) {
    bad("clip shorter than one MFCC frame");
  }
  if (c.codebook_size == 0) bad("codebook_size must be at least 1");
  if (c.kmeans_max_iters == 0) bad("kmeans_max_iters must be positive");
  if (c.topic_counts.empty()) bad("topics must not be empty");
  for (std::size_t k : c.topic_counts) {
    if (k == 0) bad("topic counts must be positive");
  }
  if (!(c.eta > 0.0)) bad("eta must be positive");
  if (c.iters == 0 || c.infer_iters == 0) bad("iteration counts must be positive");
  if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0)) bad("train_fraction must be in (0, 1)");
  if (c.svm_epochs == 0 || !(c.svm_lambda > 0.0)) bad("svm settings must be positive");
  if (c.timeline_window == 0) bad("timeline_window must be at least 1");
  if (c.report_topics != 0 &&
      std::find(c.topic_counts.begin(), c.topic_counts.end(), c.report_topics) == c.topic_counts.end()) {
    bad("report_topics must be one of topics");
  }
  if (c.doughnut_px <= 0 || c.timeline_width <= 0 || c.timeline_height <= 0) bad("chart sizes must be positive");
  if (c.buckets.empty()) bad("no buckets configured");
  std::set<int> ids;
  for (const auto& b : c.buckets) {
    if (!ids.insert(b.bucket_id).second) bad("bucket " + std::to_string(b.bucket_id) + " defined twice");
    if (b.genres.empty()) bad("bucket " + std::to_string(b.bucket_id) + " has no genres");
  }
}

namespace {

json mfcc_to_json(const MfccConfig& m) {
  return {{"n_fft", m.n_fft},       {"hop", m.hop},   {"n_mels", m.n_mels},
          {"n_coeffs", m.n_coeffs}, {"pre_emphasis", m.pre_emphasis},
          {"fmin", m.fmin},         {"fmax", m.fmax}, {"log_floor", m.log_floor},
          {"aggregation", m.aggregation == FrameAggregation::Mean ? "mean" : "first-frame"}};
}

template <class T>
void take(const json& j, const char* key, T& out, std::set<std::string>& seen) {
  if (!j.contains(key)) return;
  seen.insert(key);
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("config key '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, const std::set<std::string>& seen, const std::string& where) {
  for (const auto& [k, _] : j.items()) {
    if (!seen.count(k)) fail(ErrorCode::InvalidArgument, "unknown config key '" + where + k + "'");
  }
}

}  // namespace

json config_to_json(const RunConfig& c) {
  json buckets = json::object();
  for (const auto& b : c.buckets) buckets[std::to_string(b.bucket_id)] = b.genres;
  return {{"clip_seconds", c.clip_seconds},
          {"sample_rate", c.sample_rate},
          {"mfcc", mfcc_to_json(c.mfcc)},
          {"codebook_size", c.codebook_size},
          {"kmeans_max_iters", c.kmeans_max_iters},
          {"kmeans_tol", c.kmeans_tol},
          {"codebook_includes_test", c.codebook_includes_test},
          {"topics", c.topic_counts},
          {"alpha", c.alpha},
          {"eta", c.eta},
          {"iters", c.iters},
          {"infer_iters", c.infer_iters},
          {"train_fraction", c.train_fraction},
          {"svm_epochs", c.svm_epochs},
          {"svm_lambda", c.svm_lambda},
          {"report_topics", c.report_topics},
          {"timeline_window", c.timeline_window},
          {"count_mode", c.count_mode == CountMode::PerClip ? "per-clip" : "per-song"},
          {"doughnut_px", c.doughnut_px},
          {"timeline_width", c.timeline_width},
          {"timeline_height", c.timeline_height},
          {"buckets", buckets},
          {"seed", c.seed},
          {"out", c.out_dir.generic_string()},
          {"force", c.force}};
}

RunConfig config_from_json(const json& j, RunConfig c) {
  if (!j.is_object()) fail(ErrorCode::InvalidArgument, "config must be a JSON object");
  std::set<std::string> seen;
  take(j, "clip_seconds", c.clip_seconds, seen);
  take(j, "sample_rate", c.sample_rate, seen);
  if (j.contains("mfcc")) {
    seen.insert("mfcc");
    const json& m = j.at("mfcc");
    std::set<std::string> mseen;
    take(m, "n_fft", c.mfcc.n_fft, mseen);
    take(m, "hop", c.mfcc.hop, mseen);
    take(m, "n_mels", c.mfcc.n_mels, mseen);
    take(m, "n_coeffs", c.mfcc.n_coeffs, mseen);
    take(m, "pre_emphasis", c.mfcc.pre_emphasis, mseen);
    take(m, "fmin", c.mfcc.fmin, mseen);
    take(m, "fmax", c.mfcc.fmax, mseen);
    take(m, "log_floor", c.mfcc.log_floor, mseen);
    std::string agg;
    take(m, "aggregation", agg, mseen);
    if (!agg.empty()) {
      if (agg == "mean") c.mfcc.aggregation = FrameAggregation::Mean;
      else if (agg == "first-frame") c.mfcc.aggregation = FrameAggregation::FirstFrame;
      else fail(ErrorCode::InvalidArgument, "mfcc.aggregation must be mean or first-frame");
    }
    reject_unknown(m, mseen, "mfcc.");
  }
  take(j, "codebook_size", c.codebook_size, seen);
  take(j, "kmeans_max_iters", c.kmeans_max_iters, seen);
  take(j, "kmeans_tol", c.kmeans_tol, seen);
  take(j, "codebook_includes_test", c.codebook_includes_test, seen);
  take(j, "topics", c.topic_counts, seen);
  take(j, "alpha", c.alpha, seen);
  take(j, "eta", c.eta, seen);
  take(j, "iters", c.iters, seen);
  take(j, "infer_iters", c.infer_iters, seen);
  take(j, "train_fraction", c.train_fraction, seen);
  take(j, "svm_epochs", c.svm_epochs, seen);
  take(j, "svm_lambda", c.svm_lambda, seen);
  take(j, "report_topics", c.report_topics, seen);
  take(j, "timeline_window", c.timeline_window, seen);
  std::string mode;
  take(j, "count_mode", mode, seen);
  if (!mode.empty()) {
    if (mode == "per-clip") c.count_mode = CountMode::PerClip;
    else if (mode == "per-song") c.count_mode = CountMode::PerSong;
    else fail(ErrorCode::InvalidArgument, "count_mode must be per-clip or per-song");
  }
  take(j, "doughnut_px", c.doughnut_px, seen);
  take(j, "timeline_width", c.timeline_width, seen);
  take(j, "timeline_height", c.timeline_height, seen);
  if (j.contains("buckets")) {
    seen.insert("buckets");
    c.buckets.clear();
    for (const auto& [id, genres] : j.at("buckets").items()) {
      BucketSpec b;
      b.bucket_id = std::stoi(id);
      for (const auto& g : genres) b.genres.insert(normalize_genre(g.get<std::string>()));
      c.buckets.push_back(std::move(b));
    }
    std::sort(c.buckets.begin(), c.buckets.end(),
              [](const BucketSpec& a, const BucketSpec& b) { return a.bucket_id < b.bucket_id; });
  }
  take(j, "seed", c.seed, seen);
  std::string out;
  take(j, "out", out, seen);
  if (!out.empty()) c.out_dir = out;
  take(j, "force", c.force, seen);
  reject_unknown(j, seen, "");
  return c;
}

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::Features: return "features";
    case Stage::Vocab: return "vocab";
    case Stage::Train: return "train";
    case Stage::Eval: return "eval";
    case Stage::Interpret: return "interpret";
    case Stage::Viz: return "viz";
  }
  return "?";
}

Stage parse_stage(const std::string& name) {
  for (Stage s : {Stage::Features, Stage::Vocab, Stage::Train, Stage::Eval, Stage::Interpret, Stage::Viz}) {
    if (name == stage_name(s)) return s;
  }
  fail(ErrorCode::InvalidArgument, "unknown stage '" + name + "'");
}

std::string file_safe(const std::string& id) {
  std::string out = id;
  for (char& c : out) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_')) c = '_';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Artifact plumbing

namespace {

constexpr int kArtifactSchemaVersion = 1;

std::string hash_bytes_hex(const std::string& bytes) { return hex64(fnv1a64(bytes)); }

std::string hash_file_hex(const fs::path& p) { return hash_bytes_hex(read_text_file(p)); }

std::string dump(const json& j) { return j.dump(1) + "\n"; }

// Tracks files written by one stage; unless committed, removes them again.
class ArtifactWriter {
 public:
  ~ArtifactWriter() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
  }

  void write(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) fail(ErrorCode::Io, "cannot write " + tmp.string());
      out.write(text.data(), static_cast<std::streamsize>(text.size()));
      if (!out) fail(ErrorCode::Io, "short write to " + tmp.string());
    }
    written_.push_back(path);
    fs::rename(tmp, path);
  }

  void commit() { committed_ = true; }

 private:
  std::vector<fs::path> written_;
  bool committed_ = false;
};

json make_stamp(Stage stage, const json& stage_config, std::uint64_t seed, const std::string& upstream) {
  return {{"stage", stage_name(stage)},
          {"config_hash", hash_bytes_hex(stage_config.dump())},
          {"seed", hex64(seed)},
          {"upstream", upstream}};
}

bool stamp_matches(const fs::path& p, const json& stamp) {
  if (!fs::exists(p)) return false;
  try {
    const json j = read_json_file(p);
    return j.contains("stamp") && j.at("stamp") == stamp;
  } catch (const Error&) {
    return false;
  }
}

std::string stamp_comment(const json& stamp) {
  return "config_hash=" + stamp.at("config_hash").get<std::string>() +
         " seed=" + stamp.at("seed").get<std::string>() +
         " upstream=" + stamp.at("upstream").get<std::string>();
}

std::string stamp_svg(const std::string& svg, const json& stamp) {
  const auto cut = svg.find('\n') + 1;
  return svg.substr(0, cut) + "<!-- " + stamp_comment(stamp) + " -->\n" + svg.substr(cut);
}

json require_artifact(const fs::path& p, const char* producer) {
  if (!fs::exists(p)) {
    fail(ErrorCode::MissingArtifact, p.string() + " not found; run the '" + std::string(producer) + "' stage first");
  }
  return read_json_file(p);
}

struct SongRecord {
  std::string song_id;
  std::string genre;
  std::string split;
  std::vector<WordId> tokens;
};

struct CorpusArtifact {
  Corpus corpus;                        // documents ordered by song_id
  std::vector<std::string> split_tags;  // parallel to corpus.documents
};

CorpusArtifact load_corpus(const fs::path& p) {
  const json j = require_artifact(p, "vocab");
  CorpusArtifact out;
  out.corpus.vocab_size = require(j, "vocab_size").get<std::size_t>();
  out.corpus.bucket_id = require(j, "bucket_id").get<int>();
  for (const auto& d : require(j, "documents")) {
    Document doc{require(d, "song_id").get<std::string>(), require(d, "genre").get<std::string>(),
                 require(d, "tokens").get<std::vector<WordId>>()};
    out.corpus.genres.insert(doc.genre);
    out.split_tags.push_back(require(d, "split").get<std::string>());
    out.corpus.documents.push_back(std::move(doc));
  }
  return out;
}

Split split_from_tags(const CorpusArtifact& a) {
  Split s;
  for (Corpus* part : {&s.train, &s.test}) {
    part->vocab_size = a.corpus.vocab_size;
    part->genres = a.corpus.genres;
    part->bucket_id = a.corpus.bucket_id;
  }
  for (std::size_t i = 0; i < a.corpus.documents.size(); ++i) {
    (a.split_tags[i] == "train" ? s.train : s.test).documents.push_back(a.corpus.documents[i]);
  }
  return s;
}

std::string bucket_label(int id) { return "bucket" + std::to_string(id); }

SweepConfig sweep_config(const RunConfig& c) {
  SweepConfig s;
  s.master_seed = c.seed;
  s.alpha = c.alpha;
  s.eta = c.eta;
  s.iters = c.iters;
  s.infer_iters = c.infer_iters;
  s.split = {c.train_fraction, 0, true};
  s.svm = {c.svm_epochs, c.svm_lambda, 0};
  return s;
}

json stage_config(const RunConfig& c, Stage stage, const BucketSpec& bucket) {
  const json all = config_to_json(c);
  const auto pick = [&](std::initializer_list<const char*> keys) {
    json out = json::object();
    for (const char* k : keys) out[k] = all.at(k);
    return out;
  };
  switch (stage) {
    case Stage::Features: return pick({"clip_seconds", "sample_rate", "mfcc"});
    case Stage::Vocab: {
      json j = pick({"codebook_size", "kmeans_max_iters", "kmeans_tol", "codebook_includes_test", "train_fraction"});
      j["bucket_genres"] = bucket.genres;
      return j;
    }
    case Stage::Train: return pick({"topics", "alpha", "eta", "iters", "infer_iters"});
    case Stage::Eval: return pick({"topics", "svm_epochs", "svm_lambda"});
    case Stage::Interpret: return pick({"topics", "report_topics", "timeline_window", "count_mode", "clip_seconds"});
    case Stage::Viz: return pick({"doughnut_px", "timeline_width", "timeline_height"});
  }
  return json::object();
}

std::string model_file(std::size_t k) { return "model_K" + std::to_string(k) + ".json"; }
std::string thetas_file(std::size_t k) { return "thetas_K" + std::to_string(k) + ".json"; }

}  // namespace

// ---------------------------------------------------------------------------
// Pipeline

Pipeline::Pipeline(DatasetManifest manifest, RunConfig config)
    : manifest_(std::move(manifest)), config_(std::move(config)) {
  validate(config_);
  validate(manifest_);
}

fs::path Pipeline::bucket_dir(int bucket_id) const { return config_.out_dir / bucket_label(bucket_id); }

const BucketSpec& Pipeline::bucket(int bucket_id) const {
  for (const auto& b : config_.buckets) {
    if (b.bucket_id == bucket_id) return b;
  }
  fail(ErrorCode::InvalidArgument, "bucket " + std::to_string(bucket_id) + " is not configured");
}

std::vector<const ManifestEntry*> Pipeline::bucket_entries(const BucketSpec& b) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : manifest_.entries) {
    if (b.genres.count(e.genre)) out.push_back(&e);
  }
  return out;
}

std::size_t Pipeline::report_topics() const {
  return config_.report_topics != 0 ? config_.report_topics : config_.topic_counts.front();
}

void Pipeline::check_bucket(const BucketSpec& b) const {
  for (const auto& g : b.genres) {
    std::size_t n = 0;
    for (const auto& e : manifest_.entries) n += e.genre == g;
    if (n == 0) {
      fail(ErrorCode::UnknownGenre, "bucket " + std::to_string(b.bucket_id) + " genre '" + g +
                                        "' has no songs in the manifest");
    }
    if (n < 2) {
      fail(ErrorCode::GenreTooSmall, "bucket " + std::to_string(b.bucket_id) + " genre '" + g +
                                         "' has 1 song; need at least 2");
    }
  }
}

void Pipeline::check_buckets() const {
  for (const auto& b : config_.buckets) check_bucket(b);
}

void Pipeline::run_stage(Stage stage, int bucket_id) {
  const BucketSpec& b = bucket(bucket_id);
  if (stage == Stage::Features) check_bucket(b);
  try {
    switch (stage) {
      case Stage::Features: features(b); break;
      case Stage::Vocab: vocab(b); break;
      case Stage::Train: train(b); break;
      case Stage::Eval: eval(b); break;
      case Stage::Interpret: interpret(b); break;
      case Stage::Viz: viz(b); break;
    }
  } catch (const Error& e) {
    throw Error(e.code(), "[" + bucket_label(bucket_id) + "/" + stage_name(stage) + "] " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::Internal, "[" + bucket_label(bucket_id) + "/" + stage_name(stage) + "] " + e.what());
  }
}

void Pipeline::run_bucket(int bucket_id) {
  for (Stage s : {Stage::Features, Stage::Vocab, Stage::Train, Stage::Eval, Stage::Interpret, Stage::Viz}) {
    run_stage(s, bucket_id);
  }
}

void Pipeline::run_all() {
  check_buckets();
  ArtifactWriter writer;
  fs::create_directories(config_.out_dir);
  DatasetManifest recorded = manifest_;
  writer.write(config_.out_dir / kManifestFile, dump(manifest_to_json(recorded)));
  json cfg = config_to_json(config_);
  cfg.erase("out");
  cfg.erase("force");
  writer.write(config_.out_dir / "config.json", dump(cfg));

  AccuracyTable combined;
  combined.topic_counts = config_.topic_counts;
  std::string upstream;
  for (const auto& b : config_.buckets) {
    run_bucket(b.bucket_id);
    const fs::path acc = bucket_dir(b.bucket_id) / "accuracy.json";
    const AccuracyTable row = accuracy_from_json(require(read_json_file(acc), "table"));
    combined.bucket_ids.push_back(b.bucket_id);
    combined.cells.push_back(row.cells.front());
    combined.seeds.push_back(row.seeds.front());
    combined.errors.push_back(row.errors.front());
    upstream += hash_file_hex(acc);
  }
  const json stamp = make_stamp(Stage::Eval, config_to_json(config_).at("topics"), config_.seed,
                                hash_bytes_hex(upstream));
  writer.write(config_.out_dir / "accuracy.csv", "# " + stamp_comment(stamp) + "\n" + accuracy_csv(combined));
  writer.write(config_.out_dir / "accuracy.json",
               dump({{"schema_version", kArtifactSchemaVersion}, {"stamp", stamp}, {"table", accuracy_to_json(combined)}}));
  writer.commit();
}

void Pipeline::features(const BucketSpec& b) {
  const auto entries = bucket_entries(b);
  if (entries.empty()) fail(ErrorCode::UnknownGenre, "no songs for this bucket");
  std::uint64_t h = fnv1a64("features");
  for (const auto* e : entries) {
    h = fnv1a64(e->song_id + "\n" + e->genre + "\n" + e->split + "\n", h);
    h = fnv1a64(hash_file_hex(manifest_.root / e->path), h);
  }
  const json stamp = make_stamp(Stage::Features, stage_config(config_, Stage::Features, b), config_.seed, hex64(h));
  const fs::path out = bucket_dir(b.bucket_id) / "features.json";
  if (!config_.force && stamp_matches(out, stamp)) return;

  const MfccExtractor extractor(config_.mfcc, config_.sample_rate);
  std::vector<std::vector<ClipFeature>> per_song(entries.size());
  std::vector<std::string> errors(entries.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      try {
        const auto signal = load_song(manifest_.root / entries[i]->path, config_.sample_rate);
        for (const auto& clip : segment_clips(signal, entries[i]->song_id, config_.clip_seconds)) {
          per_song[i].push_back(extractor.compute(clip));
        }
      } catch (const std::exception& e) {
        errors[i] = "song '" + entries[i]->song_id + "': " + e.what();
      }
    }
  };
  const std::size_t n_threads =
      std::max<std::size_t>(1, std::min<std::size_t>(entries.size(), std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& err : errors) {
    if (!err.empty()) fail(ErrorCode::InvalidArgument, err);
  }

  json songs = json::array();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    json clips = json::array();
    for (const auto& f : per_song[i]) clips.push_back(f.values);
    songs.push_back({{"song_id", entries[i]->song_id},
                     {"genre", entries[i]->genre},
                     {"split", entries[i]->split},
                     {"features", std::move(clips)}});
  }
  ArtifactWriter writer;
  writer.write(out, dump({{"schema_version", kArtifactSchemaVersion},
                          {"stamp", stamp},
                          {"sample_rate", config_.sample_rate},
                          {"clip_seconds", config_.clip_seconds},
                          {"n_coeffs", config_.mfcc.n_coeffs},
                          {"songs", std::move(songs)}}));
  writer.commit();
}

void Pipeline::vocab(const BucketSpec& b) {
  const fs::path dir = bucket_dir(b.bucket_id);
  const fs::path in = dir / "features.json";
  const json features = require_artifact(in, "features");
  const json stamp = make_stamp(Stage::Vocab, stage_config(config_, Stage::Vocab, b), config_.seed, hash_file_hex(in));
  if (!config_.force && stamp_matches(dir / "vocab.json", stamp) && stamp_matches(dir / "corpus.json", stamp)) return;

  std::map<std::string, std::vector<ClipFeature>> per_song;
  std::map<std::string, std::string> labels;
  std::map<std::string, std::string> tags;
  for (const auto& s : require(features, "songs")) {
    const auto id = s.at("song_id").get<std::string>();
    labels[id] = s.at("genre").get<std::string>();
    tags[id] = s.at("split").get<std::string>();
    auto& clips = per_song[id];
    std::size_t idx = 0;
    for (const auto& f : s.at("features")) clips.push_back({id, idx++, f.get<std::vector<double>>()});
  }

  // Manifest split tags win when every song carries one.
  const bool tagged = std::all_of(tags.begin(), tags.end(), [](const auto& kv) { return !kv.second.empty(); });
  if (!tagged) {
    Corpus shell;
    shell.bucket_id = b.bucket_id;
    for (const auto& [id, genre] : labels) {
      shell.documents.push_back({id, genre, {}});
      shell.genres.insert(genre);
    }
    SplitSpec spec{config_.train_fraction, derive_seed(config_.seed, bucket_label(b.bucket_id) + "/split"), true};
    const Split split = split_stratified(shell, spec);
    for (const auto& d : split.train.documents) tags[d.song_id] = "train";
    for (const auto& d : split.test.documents) tags[d.song_id] = "test";
  }

  std::vector<std::vector<double>> points;
  for (const auto& [id, clips] : per_song) {
    if (!config_.codebook_includes_test && tags[id] != "train") continue;
    for (const auto& c : clips) points.push_back(c.values);
  }
  const auto fit = kmeans_fit(points, config_.codebook_size,
                              derive_seed(config_.seed, bucket_label(b.bucket_id) + "/kmeans"),
                              KMeansOptions{config_.kmeans_max_iters, config_.kmeans_tol});
  const Corpus corpus = build_corpus(per_song, labels, fit.vocabulary, b.bucket_id);

  json vocab = vocabulary_to_json(fit.vocabulary);
  vocab["stamp"] = stamp;
  vocab["iterations"] = fit.iterations;
  vocab["objective"] = fit.objective;
  json docs = json::array();
  for (const auto& d : corpus.documents) {
    docs.push_back({{"song_id", d.song_id}, {"genre", d.genre}, {"split", tags[d.song_id]}, {"tokens", d.tokens}});
  }
  ArtifactWriter writer;
  writer.write(dir / "vocab.json", dump(vocab));
  writer.write(dir / "corpus.json", dump({{"schema_version", kArtifactSchemaVersion},
                                          {"stamp", stamp},
                                          {"bucket_id", b.bucket_id},
                                          {"vocab_size", corpus.vocab_size},
                                          {"clip_seconds", config_.clip_seconds},
                                          {"documents", std::move(docs)}}));
  writer.commit();
}

void Pipeline::train(const BucketSpec& b) {
  const fs::path dir = bucket_dir(b.bucket_id);
  const fs::path in = dir / "corpus.json";
  const CorpusArtifact artifact = load_corpus(in);
  const json stamp = make_stamp(Stage::Train, stage_config(config_, Stage::Train, b), config_.seed, hash_file_hex(in));
  const bool cached = std::all_of(config_.topic_counts.begin(), config_.topic_counts.end(), [&](std::size_t k) {
    return stamp_matches(dir / model_file(k), stamp) && stamp_matches(dir / thetas_file(k), stamp);
  });
  if (!config_.force && cached) return;

  const Split split = split_from_tags(artifact);
  const SweepConfig sweep = sweep_config(config_);
  ArtifactWriter writer;
  for (std::size_t k : config_.topic_counts) {
    const std::uint64_t cell_seed = derive_seed(config_.seed, cell_label(b.bucket_id, k));
    const TopicFeatures tf = fit_topic_features(split, k, sweep, cell_seed);
    json model = model_to_json(tf.model);
    model["stamp"] = stamp;
    json docs = json::object();
    for (std::size_t i = 0; i < split.train.documents.size(); ++i) {
      docs[split.train.documents[i].song_id] = {{"split", "train"}, {"theta", tf.train_theta[i]}};
    }
    for (std::size_t i = 0; i < split.test.documents.size(); ++i) {
      docs[split.test.documents[i].song_id] = {{"split", "test"}, {"theta", tf.test_theta[i]}};
    }
    writer.write(dir / model_file(k), dump(model));
    writer.write(dir / thetas_file(k), dump({{"schema_version", kArtifactSchemaVersion},
                                             {"stamp", stamp},
                                             {"n_topics", k},
                                             {"documents", std::move(docs)}}));
  }
  writer.commit();
}

namespace {

TopicFeatures load_thetas(const fs::path& p, const Split& split) {
  const json j = require_artifact(p, "train");
  const json& docs = require(j, "documents");
  TopicFeatures tf;
  const auto get = [&](const Document& d) {
    if (!docs.contains(d.song_id)) fail(ErrorCode::Schema, p.string() + " lacks song '" + d.song_id + "'");
    return docs.at(d.song_id).at("theta").get<std::vector<double>>();
  };
  for (const auto& d : split.train.documents) tf.train_theta.push_back(get(d));
  for (const auto& d : split.test.documents) tf.test_theta.push_back(get(d));
  return tf;
}

}  // namespace

void Pipeline::eval(const BucketSpec& b) {
  const fs::path dir = bucket_dir(b.bucket_id);
  const CorpusArtifact artifact = load_corpus(dir / "corpus.json");
  std::string upstream = hash_file_hex(dir / "corpus.json");
  for (std::size_t k : config_.topic_counts) {
    require_artifact(dir / thetas_file(k), "train");
    upstream += hash_file_hex(dir / thetas_file(k));
  }
  const json stamp = make_stamp(Stage::Eval, stage_config(config_, Stage::Eval, b), config_.seed, hash_bytes_hex(upstream));
  if (!config_.force && stamp_matches(dir / "accuracy.json", stamp) && fs::exists(dir / "accuracy.csv")) return;

  const Split split = split_from_tags(artifact);
  const SweepConfig sweep = sweep_config(config_);
  AccuracyTable table;
  table.bucket_ids = {b.bucket_id};
  table.topic_counts = config_.topic_counts;
  table.cells.resize(1);
  table.seeds.resize(1);
  table.errors.resize(1);
  for (std::size_t k : config_.topic_counts) {
    const std::uint64_t cell_seed = derive_seed(config_.seed, cell_label(b.bucket_id, k));
    table.seeds[0].push_back(cell_seed);
    try {
      const TopicFeatures tf = load_thetas(dir / thetas_file(k), split);
      SvmConfig svm = sweep.svm;
      svm.seed = derive_seed(cell_seed, "svm");
      table.cells[0].push_back(score_topic_features(split, tf, svm));
      table.errors[0].emplace_back();
    } catch (const std::exception& e) {
      table.cells[0].push_back(std::nullopt);
      table.errors[0].emplace_back(e.what());
    }
  }
  ArtifactWriter writer;
  writer.write(dir / "accuracy.csv", "# " + stamp_comment(stamp) + "\n" + accuracy_csv(table));
  writer.write(dir / "accuracy.json", dump({{"schema_version", kArtifactSchemaVersion},
                                           {"stamp", stamp},
                                           {"table", accuracy_to_json(table)}}));
  writer.commit();
}

void Pipeline::interpret(const BucketSpec& b) {
  const fs::path dir = bucket_dir(b.bucket_id);
  const std::size_t k_report = report_topics();
  const CorpusArtifact artifact = load_corpus(dir / "corpus.json");
  const LdaModel model = model_from_json(require_artifact(dir / model_file(k_report), "train"));
  const json thetas = require_artifact(dir / thetas_file(k_report), "train");
  const json stamp = make_stamp(Stage::Interpret, stage_config(config_, Stage::Interpret, b), config_.seed,
                                hash_bytes_hex(hash_file_hex(dir / "corpus.json") +
                                               hash_file_hex(dir / model_file(k_report)) +
                                               hash_file_hex(dir / thetas_file(k_report))));
  const fs::path out = dir / "interpretation.json";
  if (!config_.force && stamp_matches(out, stamp)) return;

  const Corpus& corpus = artifact.corpus;
  const ProfileTable words = word_genre_profiles(corpus, config_.count_mode);
  ProfileTable topics(model.n_topics);
  for (std::size_t t = 0; t < model.n_topics; ++t) topics[t] = topic_genre_profile(t, model, words);

  json words_j = json::object();
  for (std::size_t w = 0; w < words.size(); ++w) {
    if (words[w]) words_j[std::to_string(w)] = distribution_to_json(*words[w]);
  }
  json topics_j = json::object();
  for (std::size_t t = 0; t < topics.size(); ++t) topics_j[std::to_string(t)] = distribution_to_json(*topics[t]);

  std::vector<GenreDistribution> terms(model.vocab_size);
  json terms_j = json::object();
  for (std::size_t w = 0; w < model.vocab_size; ++w) {
    terms[w] = term_genre_profile(static_cast<WordId>(w), model, topics);
    terms_j[std::to_string(w)] = distribution_to_json(terms[w]);
  }

  json docs_j = json::object();
  json timelines_j = json::object();
  const json& theta_docs = require(thetas, "documents");
  for (const auto& doc : corpus.documents) {
    const auto theta = theta_docs.at(doc.song_id).at("theta").get<std::vector<double>>();
    docs_j[doc.song_id] = distribution_to_json(doc_genre_profile(theta, topics));
    const std::size_t window = std::min(config_.timeline_window, doc.tokens.size());
    const GenreTimeline tl = progressive_timeline(doc, config_.clip_seconds, terms, window);
    json entries = json::array();
    for (const auto& e : tl.entries) {
      entries.push_back({{"start_time", e.start_time}, {"distribution", distribution_to_json(e.distribution)}});
    }
    timelines_j[doc.song_id] = std::move(entries);
  }

  ArtifactWriter writer;
  writer.write(out, dump({{"schema_version", kArtifactSchemaVersion},
                          {"stamp", stamp},
                          {"bucket_id", b.bucket_id},
                          {"n_topics", model.n_topics},
                          {"words", std::move(words_j)},
                          {"topics", std::move(topics_j)},
                          {"terms", std::move(terms_j)},
                          {"documents", std::move(docs_j)},
                          {"timelines", std::move(timelines_j)}}));
  writer.commit();
}

void Pipeline::viz(const BucketSpec& b) {
  const fs::path dir = bucket_dir(b.bucket_id);
  const json interp = require_artifact(dir / "interpretation.json", "interpret");
  const json acc = require_artifact(dir / "accuracy.json", "eval");
  const json stamp = make_stamp(Stage::Viz, stage_config(config_, Stage::Viz, b), config_.seed,
                                hash_bytes_hex(hash_file_hex(dir / "interpretation.json") +
                                               hash_file_hex(dir / "accuracy.json")));

  Report report;
  report.bucket_id = b.bucket_id;
  for (const auto& [k, d] : require(interp, "topics").items()) report.topics[k] = distribution_from_json(d);
  for (const auto& [k, d] : require(interp, "documents").items()) report.documents[k] = distribution_from_json(d);
  for (const auto& [k, d] : require(interp, "terms").items()) report.terms[k] = distribution_from_json(d);
  report.accuracy_table = accuracy_from_json(require(acc, "table"));

  std::set<std::string> genres = b.genres;
  for (const auto& [_, d] : report.documents) {
    for (const auto& [g, __] : d.weights) genres.insert(g);
  }
  const Palette palette = palette_for(genres);

  ArtifactWriter writer;
  json report_j = report_to_json(report);
  report_j["stamp"] = stamp;
  writer.write(dir / "report.json", report_j.dump(2) + "\n");
  for (const auto& [k, d] : report.topics) {
    writer.write(dir / ("topic" + k + ".svg"),
                 stamp_svg(doughnut_svg(d, palette, config_.doughnut_px, bucket_label(b.bucket_id) + " topic " + k), stamp));
  }
  for (const auto& [song, entries] : require(interp, "timelines").items()) {
    GenreTimeline tl;
    for (const auto& e : entries) {
      tl.entries.push_back({e.at("start_time").get<double>(), distribution_from_json(e.at("distribution"))});
    }
    if (tl.entries.size() < 2) continue;  // a one-window song has nothing to plot
    writer.write(dir / ("timeline_" + file_safe(song) + ".svg"),
                 stamp_svg(timeline_svg(tl, palette, config_.timeline_width, config_.timeline_height, song), stamp));
  }
  writer.commit();
}

}  // namespace atm
