#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atm/lda.hpp"
#include "atm/vocab.hpp"

namespace atm {

/// Mixture over genre labels. Proportions sum to 1.
struct GenreDistribution {
  std::map<std::string, double> weights;

  double total() const;
  double operator[](const std::string& genre) const;
  friend bool operator==(const GenreDistribution&, const GenreDistribution&) = default;
};

/// Throws InvalidArgument unless every weight is >= 0 and they sum to 1
/// within tol.
void validate(const GenreDistribution& dist, double tol = 1e-9);

/// sum_i coeffs[i] * parts[i], renormalized. Parts with zero coefficient
/// are ignored.
GenreDistribution mix(std::span<const double> coeffs, std::span<const GenreDistribution> parts);

struct TimelineEntry {
  double start_time = 0.0;
  GenreDistribution distribution;
};

struct GenreTimeline {
  std::vector<TimelineEntry> entries;
};

enum class CountMode {
  PerClip,  // each clip assigned to the word contributes its song's genre once
  PerSong,  // each distinct song using the word contributes once
};

/// Optional per-id profiles, indexed by word or topic id.
using ProfileTable = std::vector<std::optional<GenreDistribution>>;

/// Genre make-up of the clips quantized to `word`.
GenreDistribution word_genre_profile(WordId word, const Corpus& corpus,
                                     CountMode mode = CountMode::PerClip);

/// word_genre_profile for every word; unused words are left empty.
ProfileTable word_genre_profiles(const Corpus& corpus, CountMode mode = CountMode::PerClip);

/// sum_w beta[topic][w] * word_profiles[w]. With skip_unused, words lacking a
/// profile are dropped and the rest renormalized; otherwise a missing profile
/// under positive beta is an error.
GenreDistribution topic_genre_profile(std::size_t topic, const LdaModel& model,
                                      const ProfileTable& word_profiles, bool skip_unused = true);

/// sum_k theta[k] * topic_profiles[k].
GenreDistribution doc_genre_profile(std::span<const double> theta, const ProfileTable& topic_profiles);

/// sum_k p(z=k | word) * topic_profiles[k].
GenreDistribution term_genre_profile(WordId word, const LdaModel& model,
                                     const ProfileTable& topic_profiles);

/// Entry i averages term profiles of tokens [i, i + window) and starts at
/// i * clip_seconds.
GenreTimeline progressive_timeline(const Document& document, double clip_seconds,
                                   std::span<const GenreDistribution> term_profiles,
                                   std::size_t window);

}  // namespace atm
