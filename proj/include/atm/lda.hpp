#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "atm/matrix.hpp"
#include "atm/vocab.hpp"

namespace atm {

struct LdaModel {
  std::size_t n_topics = 0;
  std::size_t vocab_size = 0;
  std::vector<double> alpha;        // per topic, > 0
  double eta = 0.0;                 // > 0
  Matrix beta;                      // [K x V], rows on the simplex
  std::vector<double> topic_prior;  // corpus-level p(z)
  std::uint64_t seed = 0;
  std::size_t n_iters = 0;
};

/// Throws InvalidArgument if shapes or simplex constraints are violated.
void validate(const LdaModel& model, double tol = 1e-9);

/// theta per document, each a K-simplex.
using DocTopics = std::vector<std::vector<double>>;
/// z per document per token.
using TopicAssignments = std::vector<std::vector<std::uint32_t>>;

inline double default_alpha(std::size_t n_topics) { return 50.0 / static_cast<double>(n_topics); }
inline constexpr double kDefaultEta = 0.01;

struct GeneratorConfig {
  std::size_t n_topics = 3;
  std::size_t vocab_size = 30;
  double alpha = 0.5;
  double eta = 0.1;
  std::size_t n_docs = 200;
  std::size_t doc_len = 100;
  std::uint64_t seed = 0;
};

struct SyntheticCorpus {
  LdaModel model;  // true beta; topic_prior = empirical topic marginal of z
  Corpus corpus;
  DocTopics theta;
  TopicAssignments z;
};

/// Forward sampler of the generative process.
SyntheticCorpus generate_corpus(const GeneratorConfig& config);

struct GibbsConfig {
  std::size_t n_topics = 2;
  std::optional<double> alpha;  // symmetric; defaults to 50/K
  double eta = kDefaultEta;
  std::size_t n_iters = 500;
  std::optional<std::size_t> burn_in;  // defaults to n_iters/2
  std::uint64_t seed = 0;
  bool record_log_likelihood = false;
};

struct GibbsResult {
  LdaModel model;
  DocTopics doc_topics;
  TopicAssignments assignments;  // state after the final sweep
  /// log_likelihood of the smoothed point estimate after each sweep, when
  /// GibbsConfig::record_log_likelihood is set.
  std::vector<double> log_likelihood_trace;
};

/// Collapsed Gibbs sampler. Estimates are averaged over every sweep after
/// burn-in.
GibbsResult train_gibbs(const Corpus& corpus, const GibbsConfig& config);

/// Fold-in Gibbs for one document with beta held fixed. An empty document
/// yields the normalized alpha.
std::vector<double> infer_theta(const LdaModel& model, std::span<const WordId> tokens,
                                std::size_t n_iters, std::uint64_t seed);

inline std::vector<double> infer_theta(const LdaModel& model, const Document& document,
                                       std::size_t n_iters, std::uint64_t seed) {
  return infer_theta(model, document.tokens, n_iters, seed);
}

/// p(z = k | w) from topic_prior and beta.
std::vector<double> term_topic_posterior(const LdaModel& model, WordId word);

/// sum over tokens of log sum_k theta_d[k] * beta[k][w].
double log_likelihood(const LdaModel& model, const Corpus& corpus, const DocTopics& doc_topics);

}  // namespace atm
