#include "atm/serialize.hpp"

#include <fstream>
#include <sstream>

#include "atm/error.hpp"
#include "atm/format.hpp"
#include "atm/hash.hpp"

namespace atm {

using nlohmann::json;

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail(ErrorCode::Schema, std::string("missing field '") + key + "'");
  return j.at(key);
}

namespace {

void check_version(const json& j, int expected) {
  const int v = require(j, "schema_version").get<int>();
  if (v != expected) {
    fail(ErrorCode::Schema, "schema_version " + std::to_string(v) + ", expected " + std::to_string(expected));
  }
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  return rows;
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  Matrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) fail(ErrorCode::Schema, "ragged matrix");
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

std::uint64_t parse_hex(const std::string& s) { return std::stoull(s, nullptr, 16); }

}  // namespace

json vocabulary_to_json(const Vocabulary& v) {
  return {{"schema_version", kVocabSchemaVersion},
          {"seed", hex64(v.seed)},
          {"feature_dim", v.feature_dim()},
          {"centroids", matrix_to_json(v.centroids)}};
}

Vocabulary vocabulary_from_json(const json& j) {
  check_version(j, kVocabSchemaVersion);
  Vocabulary v;
  v.seed = parse_hex(require(j, "seed").get<std::string>());
  v.centroids = matrix_from_json(require(j, "centroids"));
  if (v.feature_dim() != require(j, "feature_dim").get<std::size_t>()) {
    fail(ErrorCode::Schema, "feature_dim disagrees with centroids");
  }
  return v;
}

json model_to_json(const LdaModel& m) {
  return {{"schema_version", kModelSchemaVersion},
          {"n_topics", m.n_topics},
          {"vocab_size", m.vocab_size},
          {"alpha", m.alpha},
          {"eta", m.eta},
          {"beta", matrix_to_json(m.beta)},
          {"topic_prior", m.topic_prior},
          {"seed", hex64(m.seed)},
          {"n_iters", m.n_iters}};
}

LdaModel model_from_json(const json& j) {
  check_version(j, kModelSchemaVersion);
  LdaModel m;
  m.n_topics = require(j, "n_topics").get<std::size_t>();
  m.vocab_size = require(j, "vocab_size").get<std::size_t>();
  m.alpha = require(j, "alpha").get<std::vector<double>>();
  m.eta = require(j, "eta").get<double>();
  m.beta = matrix_from_json(require(j, "beta"));
  m.topic_prior = require(j, "topic_prior").get<std::vector<double>>();
  m.seed = parse_hex(require(j, "seed").get<std::string>());
  m.n_iters = require(j, "n_iters").get<std::size_t>();
  validate(m);
  return m;
}

json distribution_to_json(const GenreDistribution& d, int significant_digits) {
  json out = json::object();
  for (const auto& [g, w] : d.weights) {
    out[g] = significant_digits >= 17 ? w : round_significant(w, significant_digits);
  }
  return out;
}

GenreDistribution distribution_from_json(const json& j) {
  GenreDistribution d;
  for (const auto& [g, w] : j.items()) d.weights[g] = w.get<double>();
  return d;
}

json accuracy_to_json(const AccuracyTable& t) {
  json cells = json::array();
  json seeds = json::array();
  json errors = json::array();
  for (std::size_t r = 0; r < t.cells.size(); ++r) {
    json row = json::array();
    json seed_row = json::array();
    json err_row = json::array();
    for (std::size_t c = 0; c < t.cells[r].size(); ++c) {
      row.push_back(t.cells[r][c] ? json(round_significant(*t.cells[r][c], 12)) : json(nullptr));
      seed_row.push_back(r < t.seeds.size() && c < t.seeds[r].size() ? hex64(t.seeds[r][c]) : "");
      err_row.push_back(r < t.errors.size() && c < t.errors[r].size() ? t.errors[r][c] : "");
    }
    cells.push_back(row);
    seeds.push_back(seed_row);
    errors.push_back(err_row);
  }
  return {{"bucket_ids", t.bucket_ids},
          {"topic_counts", t.topic_counts},
          {"cells", cells},
          {"seeds", seeds},
          {"errors", errors}};
}

AccuracyTable accuracy_from_json(const json& j) {
  AccuracyTable t;
  t.bucket_ids = require(j, "bucket_ids").get<std::vector<int>>();
  t.topic_counts = require(j, "topic_counts").get<std::vector<std::size_t>>();
  for (const auto& row : require(j, "cells")) {
    std::vector<std::optional<double>> out;
    for (const auto& c : row) out.push_back(c.is_null() ? std::nullopt : std::optional<double>(c.get<double>()));
    t.cells.push_back(std::move(out));
  }
  if (j.contains("seeds")) {
    for (const auto& row : j.at("seeds")) {
      std::vector<std::uint64_t> out;
      for (const auto& s : row) out.push_back(s.get<std::string>().empty() ? 0 : parse_hex(s.get<std::string>()));
      t.seeds.push_back(std::move(out));
    }
  }
  if (j.contains("errors")) t.errors = j.at("errors").get<std::vector<std::vector<std::string>>>();
  validate(t);
  return t;
}

json report_to_json(const Report& r) {
  const auto section = [](const std::map<std::string, GenreDistribution>& m) {
    json out = json::object();
    for (const auto& [k, d] : m) out[k] = distribution_to_json(d, 12);
    return out;
  };
  return {{"schema_version", kReportSchemaVersion},
          {"bucket_id", r.bucket_id},
          {"topics", section(r.topics)},
          {"documents", section(r.documents)},
          {"terms", section(r.terms)},
          {"accuracy_table", accuracy_to_json(r.accuracy_table)}};
}

Report report_from_json(const json& j) {
  check_version(j, kReportSchemaVersion);
  const auto section = [](const json& s) {
    std::map<std::string, GenreDistribution> out;
    for (const auto& [k, d] : s.items()) out[k] = distribution_from_json(d);
    return out;
  };
  Report r;
  r.bucket_id = require(j, "bucket_id").get<int>();
  r.topics = section(require(j, "topics"));
  r.documents = section(require(j, "documents"));
  r.terms = section(require(j, "terms"));
  r.accuracy_table = accuracy_from_json(require(j, "accuracy_table"));
  return r;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::Schema, path.string() + ": " + e.what());
  }
}

}  // namespace atm
