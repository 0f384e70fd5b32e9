#include "atm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <thread>

#include "atm/error.hpp"
#include "atm/format.hpp"
#include "atm/hash.hpp"
#include "atm/rng.hpp"

namespace atm {

Split split_stratified(const Corpus& corpus, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    fail(ErrorCode::InvalidArgument, "train_fraction must be in (0, 1)");
  }
  std::map<std::string, std::vector<std::size_t>> groups;
  if (spec.stratified) {
    for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
      groups[corpus.documents[i].genre].push_back(i);
    }
  } else {
    auto& all = groups[""];
    all.resize(corpus.documents.size());
    std::iota(all.begin(), all.end(), 0);
  }

  Rng rng(spec.seed);
  std::vector<bool> in_train(corpus.documents.size(), false);
  for (auto& [genre, members] : groups) {
    if (members.size() < 2) {
      fail(ErrorCode::GenreTooSmall, "genre '" + genre + "' has " + std::to_string(members.size()) +
                                         " document(s); need at least 2");
    }
    rng.shuffle(members);
    const auto n = static_cast<double>(members.size());
    auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * n));
    n_train = std::clamp<std::size_t>(n_train, 1, members.size() - 1);
    for (std::size_t i = 0; i < n_train; ++i) in_train[members[i]] = true;
  }

  Split out;
  for (Corpus* part : {&out.train, &out.test}) {
    part->vocab_size = corpus.vocab_size;
    part->genres = corpus.genres;
    part->bucket_id = corpus.bucket_id;
  }
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    (in_train[i] ? out.train : out.test).documents.push_back(corpus.documents[i]);
  }
  return out;
}

std::vector<double> LinearClassifier::scores(std::span<const double> x) const {
  if (x.size() != feature_dim()) fail(ErrorCode::DimensionMismatch, "feature dimension");
  std::vector<double> s(genres.size());
  for (std::size_t g = 0; g < genres.size(); ++g) {
    s[g] = std::inner_product(x.begin(), x.end(), weights[g].begin(), bias[g]);
  }
  return s;
}

const std::string& LinearClassifier::predict(std::span<const double> x) const {
  const auto s = scores(x);
  std::size_t best = 0;
  for (std::size_t g = 1; g < s.size(); ++g) {
    if (s[g] > s[best]) best = g;
  }
  return genres[best];
}

LinearClassifier train_classifier(const std::vector<std::vector<double>>& features,
                                  const std::vector<std::string>& labels, const SvmConfig& config) {
  if (features.size() != labels.size()) fail(ErrorCode::DimensionMismatch, "features vs labels");
  if (features.empty()) fail(ErrorCode::InvalidArgument, "no training data");
  if (!(config.lambda > 0.0) || config.epochs == 0) {
    fail(ErrorCode::InvalidArgument, "svm needs lambda > 0 and epochs > 0");
  }
  const std::set<std::string> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) fail(ErrorCode::SingleClass, "training labels contain one class");
  const std::size_t dim = features.front().size();
  for (const auto& x : features) {
    if (x.size() != dim) fail(ErrorCode::DimensionMismatch, "ragged feature vectors");
  }

  LinearClassifier clf;
  clf.genres.assign(distinct.begin(), distinct.end());
  clf.config = config;
  Rng rng(config.seed);
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), 0);
  const double radius = 1.0 / std::sqrt(config.lambda);

  for (const auto& genre : clf.genres) {
    // The bias rides along as a constant feature so it shares the step size
    // and regularization of the other weights.
    std::vector<double> w(dim + 1, 0.0);
    std::size_t t = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
      rng.shuffle(order);
      for (std::size_t i : order) {
        ++t;
        const double eta = 1.0 / (config.lambda * static_cast<double>(t));
        const double y = labels[i] == genre ? 1.0 : -1.0;
        double margin = w[dim];
        for (std::size_t j = 0; j < dim; ++j) margin += w[j] * features[i][j];
        margin *= y;
        const double shrink = 1.0 - eta * config.lambda;
        for (double& v : w) v *= shrink;
        if (margin < 1.0) {
          for (std::size_t j = 0; j < dim; ++j) w[j] += eta * y * features[i][j];
          w[dim] += eta * y;
        }
        double norm2 = 0.0;
        for (double v : w) norm2 += v * v;
        if (norm2 > radius * radius) {
          const double scale = radius / std::sqrt(norm2);
          for (double& v : w) v *= scale;
        }
      }
    }
    clf.bias.push_back(w[dim]);
    w.pop_back();
    clf.weights.push_back(std::move(w));
  }

  // On nearly featureless data the hinge optimum can fit worse than always
  // answering the most frequent label; never return something that weak.
  std::map<std::string, std::size_t> counts;
  for (const auto& l : labels) ++counts[l];
  auto majority = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second > majority->second) majority = it;
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < features.size(); ++i) hits += clf.predict(features[i]) == labels[i];
  if (hits < majority->second) {
    for (std::size_t g = 0; g < clf.genres.size(); ++g) {
      std::fill(clf.weights[g].begin(), clf.weights[g].end(), 0.0);
      clf.bias[g] = clf.genres[g] == majority->first ? 1.0 : -1.0;
    }
  }
  return clf;
}

double evaluate_accuracy(const LinearClassifier& classifier,
                         const std::vector<std::vector<double>>& features,
                         const std::vector<std::string>& labels) {
  if (features.size() != labels.size()) fail(ErrorCode::DimensionMismatch, "features vs labels");
  if (features.empty()) fail(ErrorCode::EmptyTestSet, "nothing to evaluate");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    hits += classifier.predict(features[i]) == labels[i];
  }
  return static_cast<double>(hits) / static_cast<double>(features.size());
}

void validate(const AccuracyTable& t) {
  if (t.cells.size() != t.bucket_ids.size()) fail(ErrorCode::InvalidArgument, "accuracy table rows");
  for (const auto& row : t.cells) {
    if (row.size() != t.topic_counts.size()) fail(ErrorCode::InvalidArgument, "accuracy table columns");
    for (const auto& c : row) {
      if (c && !(*c >= 0.0 && *c <= 1.0)) fail(ErrorCode::InvalidArgument, "accuracy outside [0, 1]");
    }
  }
}

std::string cell_label(int bucket_id, std::size_t n_topics) {
  return "bucket" + std::to_string(bucket_id) + "/K" + std::to_string(n_topics);
}

TopicFeatures fit_topic_features(const Split& split, std::size_t n_topics, const SweepConfig& config,
                                 std::uint64_t cell_seed) {
  GibbsConfig gc;
  gc.n_topics = n_topics;
  if (config.alpha > 0.0) gc.alpha = config.alpha;
  gc.eta = config.eta;
  gc.n_iters = config.iters;
  gc.seed = derive_seed(cell_seed, "lda");
  auto trained = train_gibbs(split.train, gc);

  TopicFeatures out;
  out.model = std::move(trained.model);
  out.train_theta = std::move(trained.doc_topics);
  const std::uint64_t infer_seed = derive_seed(cell_seed, "infer");
  for (const auto& doc : split.test.documents) {
    out.test_theta.push_back(
        infer_theta(out.model, doc, config.infer_iters, derive_seed(infer_seed, doc.song_id)));
  }
  return out;
}

namespace {

std::vector<std::string> genres_of(const Corpus& corpus) {
  std::vector<std::string> out;
  for (const auto& d : corpus.documents) out.push_back(d.genre);
  return out;
}

}  // namespace

double score_topic_features(const Split& split, const TopicFeatures& features, const SvmConfig& svm) {
  const auto clf = train_classifier(features.train_theta, genres_of(split.train), svm);
  return evaluate_accuracy(clf, features.test_theta, genres_of(split.test));
}

AccuracyTable sweep_topic_counts(std::span<const Corpus> bucket_corpora,
                                 std::span<const std::size_t> topic_counts,
                                 const SweepConfig& config) {
  AccuracyTable table;
  table.topic_counts.assign(topic_counts.begin(), topic_counts.end());
  const std::size_t rows = bucket_corpora.size();
  const std::size_t cols = topic_counts.size();
  for (const auto& c : bucket_corpora) table.bucket_ids.push_back(c.bucket_id);
  table.cells.assign(rows, std::vector<std::optional<double>>(cols));
  table.seeds.assign(rows, std::vector<std::uint64_t>(cols));
  table.errors.assign(rows, std::vector<std::string>(cols));

  const auto run_cell = [&](std::size_t r, std::size_t c) {
    const Corpus& corpus = bucket_corpora[r];
    const std::uint64_t seed = derive_seed(config.master_seed, cell_label(corpus.bucket_id, topic_counts[c]));
    table.seeds[r][c] = seed;
    try {
      SplitSpec split_spec = config.split;
      split_spec.seed = derive_seed(config.master_seed, "bucket" + std::to_string(corpus.bucket_id) + "/split");
      const Split split = split_stratified(corpus, split_spec);
      const auto features = fit_topic_features(split, topic_counts[c], config, seed);
      SvmConfig svm = config.svm;
      svm.seed = derive_seed(seed, "svm");
      table.cells[r][c] = score_topic_features(split, features, svm);
    } catch (const std::exception& e) {
      table.errors[r][c] = e.what();
    }
  };

  // Cells are independent; each writes only its own slot.
  const std::size_t jobs = rows * cols;
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(jobs, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t j = w; j < jobs; j += workers) run_cell(j / cols, j % cols);
    });
  }
  for (auto& t : pool) t.join();
  return table;
}

std::string accuracy_csv(const AccuracyTable& table) {
  std::string out = "bucket";
  for (std::size_t k : table.topic_counts) out += "," + std::to_string(k);
  out += "\n";
  for (std::size_t r = 0; r < table.bucket_ids.size(); ++r) {
    out += "bucket" + std::to_string(table.bucket_ids[r]);
    for (const auto& cell : table.cells[r]) {
      out += ",";
      out += cell ? fixed(*cell, 4) : std::string("NA");
    }
    out += "\n";
  }
  return out;
}

}  // namespace atm
