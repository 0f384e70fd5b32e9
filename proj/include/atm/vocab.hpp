#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "atm/matrix.hpp"
#include "atm/mfcc.hpp"

namespace atm {

using WordId = std::uint32_t;

/// k-means codebook: each centroid is one "musical word".
struct Vocabulary {
  Matrix centroids;  // [V x feature_dim]
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return centroids.rows(); }
  std::size_t feature_dim() const noexcept { return centroids.cols(); }
};

struct Document {
  std::string song_id;
  std::string genre;
  std::vector<WordId> tokens;  // clip order
};

struct Corpus {
  std::vector<Document> documents;
  std::size_t vocab_size = 0;
  std::set<std::string> genres;
  int bucket_id = 0;

  std::size_t token_count() const;
};

struct KMeansOptions {
  std::size_t max_iters = 300;
  double tol = 1e-6;
};

struct KMeansResult {
  Vocabulary vocabulary;
  /// Quantization objective after each assignment step; non-increasing.
  std::vector<double> objective;
  std::size_t iterations = 0;
  bool converged = false;
};

KMeansResult kmeans_fit(std::span<const std::vector<double>> points, std::size_t v,
                        std::uint64_t seed, const KMeansOptions& options = {});

inline Vocabulary kmeans_fit(std::span<const ClipFeature> features, std::size_t v,
                             std::uint64_t seed, std::size_t max_iters = 300,
                             double tol = 1e-6) {
  std::vector<std::vector<double>> points;
  points.reserve(features.size());
  for (const auto& f : features) points.push_back(f.values);
  return kmeans_fit(points, v, seed, KMeansOptions{max_iters, tol}).vocabulary;
}

/// Sum of squared L2 distances from each point to its assigned centroid,
/// accumulated in point order.
double quantization_objective(std::span<const std::vector<double>> points,
                              const Matrix& centroids, std::span<const WordId> assignment);

/// Nearest centroid under L2; ties go to the lowest index.
WordId assign_word(const Vocabulary& vocabulary, std::span<const double> feature);

inline WordId assign_word(const Vocabulary& vocabulary, const ClipFeature& feature) {
  return assign_word(vocabulary, feature.values);
}

/// One document per song (ordered by song_id), tokens in clip order.
Corpus build_corpus(const std::map<std::string, std::vector<ClipFeature>>& per_song_features,
                    const std::map<std::string, std::string>& labels,
                    const Vocabulary& vocabulary, int bucket_id);

}  // namespace atm
