#include "atm/vocab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "atm/error.hpp"
#include "atm/rng.hpp"

namespace atm {
namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

WordId nearest(const Matrix& centroids, std::span<const double> x) {
  WordId best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = sq_dist(centroids.row(c), x);
    if (d < best_d) {
      best_d = d;
      best = static_cast<WordId>(c);
    }
  }
  return best;
}

Matrix kmeanspp_init(std::span<const std::vector<double>> points, std::size_t v, Rng& rng) {
  const std::size_t dim = points.front().size();
  Matrix centroids(v, dim);
  const auto place = [&](std::size_t c, std::size_t p) {
    std::copy(points[p].begin(), points[p].end(), centroids.row(c).begin());
  };
  place(0, rng.below(points.size()));
  std::vector<double> d2(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) d2[p] = sq_dist(points[p], centroids.row(0));
  for (std::size_t c = 1; c < v; ++c) {
    double total = 0.0;
    for (double d : d2) total += d;
    const std::size_t pick = total > 0.0 ? rng.categorical(d2) : rng.below(points.size());
    place(c, pick);
    for (std::size_t p = 0; p < points.size(); ++p) {
      d2[p] = std::min(d2[p], sq_dist(points[p], centroids.row(c)));
    }
  }
  return centroids;
}

// Gives every empty cluster the point farthest from its current centroid,
// taken only from clusters that keep at least one other member.
void repair_empty(std::span<const std::vector<double>> points, Matrix& centroids,
                  std::vector<WordId>& assignment) {
  std::vector<std::size_t> sizes(centroids.rows(), 0);
  for (WordId a : assignment) ++sizes[a];
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    if (sizes[c] != 0) continue;
    std::size_t far = points.size();
    double far_d = -1.0;
    for (std::size_t p = 0; p < points.size(); ++p) {
      const double d = sq_dist(points[p], centroids.row(assignment[p]));
      if (d > far_d) {
        far_d = d;
        far = p;
      }
    }
    std::copy(points[far].begin(), points[far].end(), centroids.row(c).begin());
    if (sizes[assignment[far]] > 1) {
      --sizes[assignment[far]];
      assignment[far] = static_cast<WordId>(c);
      ++sizes[c];
    }
  }
}

}  // namespace

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.tokens.size();
  return n;
}

double quantization_objective(std::span<const std::vector<double>> points,
                              const Matrix& centroids, std::span<const WordId> assignment) {
  double total = 0.0;
  for (std::size_t p = 0; p < points.size(); ++p) {
    total += sq_dist(points[p], centroids.row(assignment[p]));
  }
  return total;
}

KMeansResult kmeans_fit(std::span<const std::vector<double>> points, std::size_t v,
                        std::uint64_t seed, const KMeansOptions& options) {
  if (v == 0) fail(ErrorCode::InvalidArgument, "codebook size must be at least 1");
  if (points.size() < v) {
    fail(ErrorCode::InsufficientData, std::to_string(points.size()) + " points for " +
                                          std::to_string(v) + " clusters");
  }
  const std::size_t dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) fail(ErrorCode::DimensionMismatch, "feature vectors differ in length");
    for (double x : p) {
      if (!std::isfinite(x)) fail(ErrorCode::InvalidArgument, "non-finite feature value");
    }
  }

  Rng rng(seed);
  KMeansResult result;
  Matrix centroids = kmeanspp_init(points, v, rng);
  std::vector<WordId> assignment(points.size());

  for (std::size_t iter = 0; iter < options.max_iters; ++iter) {
    for (std::size_t p = 0; p < points.size(); ++p) assignment[p] = nearest(centroids, points[p]);
    repair_empty(points, centroids, assignment);
    const double current = quantization_objective(points, centroids, assignment);
    result.objective.push_back(current);
    result.iterations = iter + 1;

    Matrix updated = centroids;
    std::vector<std::size_t> counts(v, 0);
    for (std::size_t c = 0; c < v; ++c) std::fill(updated.row(c).begin(), updated.row(c).end(), 0.0);
    for (std::size_t p = 0; p < points.size(); ++p) {
      auto row = updated.row(assignment[p]);
      for (std::size_t j = 0; j < dim; ++j) row[j] += points[p][j];
      ++counts[assignment[p]];
    }
    for (std::size_t c = 0; c < v; ++c) {
      auto row = updated.row(c);
      if (counts[c] == 0) {
        std::copy(centroids.row(c).begin(), centroids.row(c).end(), row.begin());
      } else {
        for (double& x : row) x /= static_cast<double>(counts[c]);
      }
    }
    // The mean is the exact minimizer only in real arithmetic; at a fixed
    // point rounding can raise the objective by an ulp, so keep the old
    // centroids in that case and stop.
    if (quantization_objective(points, updated, assignment) > current) {
      result.converged = true;
      break;
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < v; ++c) {
      shift = std::max(shift, std::sqrt(sq_dist(centroids.row(c), updated.row(c))));
    }
    centroids = std::move(updated);
    if (shift < options.tol) {
      result.converged = true;
      break;
    }
  }

  result.vocabulary.centroids = std::move(centroids);
  result.vocabulary.seed = seed;
  return result;
}

WordId assign_word(const Vocabulary& vocabulary, std::span<const double> feature) {
  if (feature.size() != vocabulary.feature_dim()) {
    fail(ErrorCode::DimensionMismatch, "feature has " + std::to_string(feature.size()) +
                                           " values, vocabulary expects " +
                                           std::to_string(vocabulary.feature_dim()));
  }
  if (vocabulary.size() == 0) fail(ErrorCode::InvalidArgument, "empty vocabulary");
  return nearest(vocabulary.centroids, feature);
}

Corpus build_corpus(const std::map<std::string, std::vector<ClipFeature>>& per_song_features,
                    const std::map<std::string, std::string>& labels,
                    const Vocabulary& vocabulary, int bucket_id) {
  Corpus corpus;
  corpus.vocab_size = vocabulary.size();
  corpus.bucket_id = bucket_id;
  for (const auto& [song, features] : per_song_features) {
    const auto label = labels.find(song);
    if (label == labels.end()) fail(ErrorCode::MissingLabel, "song '" + song + "' has no genre label");
    if (features.empty()) fail(ErrorCode::EmptyDocument, "song '" + song + "' has no clips");
    Document doc{song, label->second, {}};
    doc.tokens.reserve(features.size());
    for (const auto& f : features) doc.tokens.push_back(assign_word(vocabulary, f));
    corpus.genres.insert(doc.genre);
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

}  // namespace atm
