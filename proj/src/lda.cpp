#include "atm/lda.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "atm/error.hpp"
#include "atm/rng.hpp"

namespace atm {
namespace {

void normalize(std::span<double> v) {
  double total = 0.0;
  for (double x : v) total += x;
  for (double& x : v) x /= total;
}

// Draws an index from unnormalized cumulative weights.
std::uint32_t draw_cumulative(std::span<const double> cumulative, Rng& rng) {
  const double target = rng.uniform() * cumulative.back();
  std::uint32_t k = 0;
  while (k + 1 < cumulative.size() && !(target < cumulative[k])) ++k;
  return k;
}

void check_tokens(const Corpus& corpus) {
  for (const auto& doc : corpus.documents) {
    for (WordId w : doc.tokens) {
      if (w >= corpus.vocab_size) {
        fail(ErrorCode::UnknownWord, "document '" + doc.song_id + "' has word " +
                                         std::to_string(w) + " >= vocab size " +
                                         std::to_string(corpus.vocab_size));
      }
    }
  }
}

}  // namespace

void validate(const LdaModel& m, double tol) {
  const auto bad = [](const std::string& what) { fail(ErrorCode::InvalidArgument, "lda model: " + what); };
  if (m.n_topics == 0 || m.vocab_size == 0) bad("empty dimensions");
  if (m.alpha.size() != m.n_topics) bad("alpha length != n_topics");
  for (double a : m.alpha) {
    if (!(a > 0.0)) bad("alpha entries must be positive");
  }
  if (!(m.eta > 0.0)) bad("eta must be positive");
  if (m.beta.rows() != m.n_topics || m.beta.cols() != m.vocab_size) bad("beta shape");
  for (std::size_t k = 0; k < m.n_topics; ++k) {
    double s = 0.0;
    for (double x : m.beta.row(k)) {
      if (!(x >= 0.0)) bad("negative beta entry");
      s += x;
    }
    if (std::abs(s - 1.0) > tol) bad("beta row " + std::to_string(k) + " sums to " + std::to_string(s));
  }
  if (m.topic_prior.size() != m.n_topics) bad("topic_prior length");
  double s = 0.0;
  for (double x : m.topic_prior) {
    if (!(x >= 0.0)) bad("negative topic_prior entry");
    s += x;
  }
  if (std::abs(s - 1.0) > tol) bad("topic_prior sums to " + std::to_string(s));
}

SyntheticCorpus generate_corpus(const GeneratorConfig& c) {
  if (c.n_topics == 0 || c.vocab_size == 0 || c.n_docs == 0 || c.doc_len == 0 ||
      !(c.alpha > 0.0) || !(c.eta > 0.0)) {
    fail(ErrorCode::InvalidArgument, "generate_corpus needs positive counts and hyperparameters");
  }
  Rng rng(c.seed);
  SyntheticCorpus out;
  LdaModel& m = out.model;
  m.n_topics = c.n_topics;
  m.vocab_size = c.vocab_size;
  m.alpha.assign(c.n_topics, c.alpha);
  m.eta = c.eta;
  m.seed = c.seed;
  m.beta = Matrix(c.n_topics, c.vocab_size);
  for (std::size_t k = 0; k < c.n_topics; ++k) {
    const auto row = rng.symmetric_dirichlet(c.vocab_size, c.eta);
    std::copy(row.begin(), row.end(), m.beta.row(k).begin());
  }

  out.corpus.vocab_size = c.vocab_size;
  out.corpus.genres = {"synthetic"};
  std::vector<double> topic_counts(c.n_topics, 0.0);
  for (std::size_t d = 0; d < c.n_docs; ++d) {
    auto theta = rng.dirichlet(m.alpha);
    Document doc{"doc" + std::to_string(d), "synthetic", {}};
    std::vector<std::uint32_t> z(c.doc_len);
    doc.tokens.resize(c.doc_len);
    for (std::size_t n = 0; n < c.doc_len; ++n) {
      z[n] = static_cast<std::uint32_t>(rng.categorical(theta));
      doc.tokens[n] = static_cast<WordId>(rng.categorical(m.beta.row(z[n])));
      topic_counts[z[n]] += 1.0;
    }
    out.corpus.documents.push_back(std::move(doc));
    out.theta.push_back(std::move(theta));
    out.z.push_back(std::move(z));
  }
  normalize(topic_counts);
  m.topic_prior = std::move(topic_counts);
  return out;
}

GibbsResult train_gibbs(const Corpus& corpus, const GibbsConfig& config) {
  if (config.n_topics == 0) fail(ErrorCode::InvalidArgument, "n_topics must be at least 1");
  if (corpus.documents.empty() || corpus.token_count() == 0) {
    fail(ErrorCode::EmptyCorpus, "no tokens to train on");
  }
  if (corpus.vocab_size == 0) fail(ErrorCode::InvalidArgument, "vocab_size must be positive");
  if (config.n_iters == 0) fail(ErrorCode::InvalidArgument, "n_iters must be positive");
  check_tokens(corpus);

  const std::size_t K = config.n_topics;
  const std::size_t V = corpus.vocab_size;
  const std::size_t D = corpus.documents.size();
  const double alpha = config.alpha.value_or(default_alpha(K));
  const double eta = config.eta;
  if (!(alpha > 0.0) || !(eta > 0.0)) fail(ErrorCode::InvalidArgument, "alpha and eta must be positive");
  const std::size_t burn_in = std::min(config.burn_in.value_or(config.n_iters / 2), config.n_iters - 1);
  const double alpha_sum = alpha * static_cast<double>(K);
  const double v_eta = eta * static_cast<double>(V);

  Rng rng(config.seed);
  std::vector<std::uint32_t> n_dk(D * K, 0);
  std::vector<std::uint32_t> n_kw(K * V, 0);
  std::vector<std::uint32_t> n_k(K, 0);
  TopicAssignments z(D);
  for (std::size_t d = 0; d < D; ++d) {
    const auto& tokens = corpus.documents[d].tokens;
    z[d].resize(tokens.size());
    for (std::size_t n = 0; n < tokens.size(); ++n) {
      const auto k = static_cast<std::uint32_t>(rng.below(K));
      z[d][n] = k;
      ++n_dk[d * K + k];
      ++n_kw[k * V + tokens[n]];
      ++n_k[k];
    }
  }

  const auto point_theta = [&](std::size_t d, std::size_t k) {
    return (n_dk[d * K + k] + alpha) /
           (static_cast<double>(corpus.documents[d].tokens.size()) + alpha_sum);
  };
  const auto point_beta = [&](std::size_t k, std::size_t w) {
    return (n_kw[k * V + w] + eta) / (n_k[k] + v_eta);
  };

  GibbsResult result;
  Matrix theta_acc(D, K);
  Matrix beta_acc(K, V);
  std::vector<double> prior_acc(K, 0.0);
  const double total_tokens = static_cast<double>(corpus.token_count());
  std::vector<double> cumulative(K);

  for (std::size_t sweep = 0; sweep < config.n_iters; ++sweep) {
    for (std::size_t d = 0; d < D; ++d) {
      const auto& tokens = corpus.documents[d].tokens;
      for (std::size_t n = 0; n < tokens.size(); ++n) {
        const WordId w = tokens[n];
        const std::uint32_t old = z[d][n];
        --n_dk[d * K + old];
        --n_kw[old * V + w];
        --n_k[old];
        double acc = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          acc += (n_dk[d * K + k] + alpha) * (n_kw[k * V + w] + eta) / (n_k[k] + v_eta);
          cumulative[k] = acc;
        }
        const std::uint32_t fresh = draw_cumulative(cumulative, rng);
        z[d][n] = fresh;
        ++n_dk[d * K + fresh];
        ++n_kw[fresh * V + w];
        ++n_k[fresh];
      }
    }

    if (config.record_log_likelihood) {
      double ll = 0.0;
      for (std::size_t d = 0; d < D; ++d) {
        for (WordId w : corpus.documents[d].tokens) {
          double p = 0.0;
          for (std::size_t k = 0; k < K; ++k) p += point_theta(d, k) * point_beta(k, w);
          ll += std::log(p);
        }
      }
      result.log_likelihood_trace.push_back(ll);
    }

    if (sweep >= burn_in) {
      for (std::size_t d = 0; d < D; ++d) {
        for (std::size_t k = 0; k < K; ++k) theta_acc(d, k) += point_theta(d, k);
      }
      for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t w = 0; w < V; ++w) beta_acc(k, w) += point_beta(k, w);
        prior_acc[k] += (n_k[k] + alpha) / (total_tokens + alpha_sum);
      }
    }
  }

  LdaModel& m = result.model;
  m.n_topics = K;
  m.vocab_size = V;
  m.alpha.assign(K, alpha);
  m.eta = eta;
  m.seed = config.seed;
  m.n_iters = config.n_iters;
  m.beta = std::move(beta_acc);
  for (std::size_t k = 0; k < K; ++k) normalize(m.beta.row(k));
  m.topic_prior = std::move(prior_acc);
  normalize(m.topic_prior);
  result.doc_topics.resize(D);
  for (std::size_t d = 0; d < D; ++d) {
    auto row = theta_acc.row(d);
    result.doc_topics[d].assign(row.begin(), row.end());
    normalize(result.doc_topics[d]);
  }
  result.assignments = std::move(z);
  return result;
}

std::vector<double> infer_theta(const LdaModel& model, std::span<const WordId> tokens,
                                std::size_t n_iters, std::uint64_t seed) {
  const std::size_t K = model.n_topics;
  for (WordId w : tokens) {
    if (w >= model.vocab_size) {
      fail(ErrorCode::UnknownWord, "word " + std::to_string(w) + " >= vocab size " +
                                       std::to_string(model.vocab_size));
    }
  }
  std::vector<double> theta = model.alpha;
  if (tokens.empty()) {
    normalize(theta);
    return theta;
  }
  if (n_iters == 0) fail(ErrorCode::InvalidArgument, "n_iters must be positive");

  const double alpha_sum = std::accumulate(model.alpha.begin(), model.alpha.end(), 0.0);
  const double len = static_cast<double>(tokens.size());
  const std::size_t burn_in = std::min(n_iters / 2, n_iters - 1);
  Rng rng(seed);
  std::vector<std::uint32_t> z(tokens.size());
  std::vector<std::uint32_t> n_k(K, 0);
  for (std::size_t n = 0; n < tokens.size(); ++n) {
    z[n] = static_cast<std::uint32_t>(rng.below(K));
    ++n_k[z[n]];
  }
  std::vector<double> acc(K, 0.0);
  std::vector<double> cumulative(K);
  for (std::size_t sweep = 0; sweep < n_iters; ++sweep) {
    for (std::size_t n = 0; n < tokens.size(); ++n) {
      --n_k[z[n]];
      double run = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        run += (n_k[k] + model.alpha[k]) * model.beta(k, tokens[n]);
        cumulative[k] = run;
      }
      if (!(run > 0.0)) {
        fail(ErrorCode::ZeroProbabilityWord, "word " + std::to_string(tokens[n]) +
                                                 " has zero probability under every topic");
      }
      z[n] = draw_cumulative(cumulative, rng);
      ++n_k[z[n]];
    }
    if (sweep >= burn_in) {
      for (std::size_t k = 0; k < K; ++k) acc[k] += (n_k[k] + model.alpha[k]) / (len + alpha_sum);
    }
  }
  normalize(acc);
  return acc;
}

std::vector<double> term_topic_posterior(const LdaModel& model, WordId word) {
  if (word >= model.vocab_size) {
    fail(ErrorCode::UnknownWord, "word " + std::to_string(word) + " >= vocab size " +
                                     std::to_string(model.vocab_size));
  }
  std::vector<double> post(model.n_topics);
  double denom = 0.0;
  for (std::size_t k = 0; k < model.n_topics; ++k) {
    post[k] = model.topic_prior[k] * model.beta(k, word);
    denom += post[k];
  }
  if (!(denom >= std::numeric_limits<double>::min())) {
    fail(ErrorCode::ZeroProbabilityWord, "word " + std::to_string(word) +
                                             " has no probability mass under any topic");
  }
  for (double& p : post) p /= denom;
  return post;
}

double log_likelihood(const LdaModel& model, const Corpus& corpus, const DocTopics& doc_topics) {
  if (doc_topics.size() != corpus.documents.size()) {
    fail(ErrorCode::DimensionMismatch, "doc_topics count != document count");
  }
  double ll = 0.0;
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    const auto& theta = doc_topics[d];
    if (theta.size() != model.n_topics) fail(ErrorCode::DimensionMismatch, "theta length != n_topics");
    for (WordId w : corpus.documents[d].tokens) {
      if (w >= model.vocab_size) fail(ErrorCode::UnknownWord, "word " + std::to_string(w));
      double p = 0.0;
      for (std::size_t k = 0; k < model.n_topics; ++k) p += theta[k] * model.beta(k, w);
      ll += std::log(p);
    }
  }
  return ll;
}

}  // namespace atm
