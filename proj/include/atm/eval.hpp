#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atm/lda.hpp"
#include "atm/vocab.hpp"

namespace atm {

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 42;
  bool stratified = true;
};

struct Split {
  Corpus train;
  Corpus test;
};

/// Per-genre proportional split with a seeded shuffle. Every genre keeps at
/// least one document on each side.
Split split_stratified(const Corpus& corpus, const SplitSpec& spec);

struct SvmConfig {
  std::size_t epochs = 200;
  double lambda = 1e-3;
  std::uint64_t seed = 0;
};

/// One-vs-rest linear SVM. Genres are kept sorted so score ties resolve to
/// the lexicographically smallest label.
struct LinearClassifier {
  std::vector<std::string> genres;
  std::vector<std::vector<double>> weights;  // per genre, length = feature dim
  std::vector<double> bias;
  SvmConfig config;

  std::size_t feature_dim() const { return weights.empty() ? 0 : weights.front().size(); }
  std::vector<double> scores(std::span<const double> x) const;
  const std::string& predict(std::span<const double> x) const;
};

/// Pegasos-style stochastic subgradient descent on the L2-regularized hinge
/// loss, one binary problem per genre.
LinearClassifier train_classifier(const std::vector<std::vector<double>>& features,
                                  const std::vector<std::string>& labels, const SvmConfig& config);

double evaluate_accuracy(const LinearClassifier& classifier,
                         const std::vector<std::vector<double>>& features,
                         const std::vector<std::string>& labels);

struct AccuracyTable {
  std::vector<int> bucket_ids;                            // rows
  std::vector<std::size_t> topic_counts;                  // columns
  std::vector<std::vector<std::optional<double>>> cells;  // empty when the cell failed
  std::vector<std::vector<std::uint64_t>> seeds;
  std::vector<std::vector<std::string>> errors;
};

void validate(const AccuracyTable& table);

struct SweepConfig {
  std::uint64_t master_seed = 42;
  double alpha = 0.0;  // <= 0 selects 50/K
  double eta = kDefaultEta;
  std::size_t iters = 500;
  std::size_t infer_iters = 100;
  SplitSpec split;
  SvmConfig svm;
};

/// Topic features for one (bucket, K) cell: LDA trained on the training
/// documents only, test documents folded in against the fixed model.
struct TopicFeatures {
  LdaModel model;
  DocTopics train_theta;
  DocTopics test_theta;
};

std::string cell_label(int bucket_id, std::size_t n_topics);

TopicFeatures fit_topic_features(const Split& split, std::size_t n_topics, const SweepConfig& config,
                                 std::uint64_t cell_seed);

double score_topic_features(const Split& split, const TopicFeatures& features,
                            const SvmConfig& svm);

/// Fills a buckets x topic_counts accuracy grid. A failing cell records its
/// error and leaves the remaining cells running.
AccuracyTable sweep_topic_counts(std::span<const Corpus> bucket_corpora,
                                 std::span<const std::size_t> topic_counts,
                                 const SweepConfig& config);

std::string accuracy_csv(const AccuracyTable& table);

}  // namespace atm
