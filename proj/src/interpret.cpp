#include "atm/interpret.hpp"

#include <cmath>
#include <set>

#include "atm/error.hpp"

namespace atm {

double GenreDistribution::total() const {
  double s = 0.0;
  for (const auto& [_, w] : weights) s += w;
  return s;
}

double GenreDistribution::operator[](const std::string& genre) const {
  const auto it = weights.find(genre);
  return it == weights.end() ? 0.0 : it->second;
}

void validate(const GenreDistribution& dist, double tol) {
  for (const auto& [genre, w] : dist.weights) {
    if (!(w >= 0.0)) fail(ErrorCode::InvalidArgument, "negative proportion for " + genre);
  }
  const double s = dist.total();
  if (std::abs(s - 1.0) > tol) {
    fail(ErrorCode::InvalidArgument, "genre proportions sum to " + std::to_string(s));
  }
}

GenreDistribution mix(std::span<const double> coeffs, std::span<const GenreDistribution> parts) {
  if (coeffs.size() != parts.size()) fail(ErrorCode::DimensionMismatch, "mix: coefficient count");
  GenreDistribution out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (coeffs[i] == 0.0) continue;
    for (const auto& [genre, w] : parts[i].weights) out.weights[genre] += coeffs[i] * w;
  }
  const double s = out.total();
  if (!(s > 0.0)) fail(ErrorCode::InvalidArgument, "mixture has no mass");
  for (auto& [_, w] : out.weights) w /= s;
  return out;
}

namespace {

GenreDistribution from_counts(const std::map<std::string, std::size_t>& counts) {
  std::size_t total = 0;
  for (const auto& [_, c] : counts) total += c;
  GenreDistribution out;
  for (const auto& [genre, c] : counts) {
    out.weights[genre] = static_cast<double>(c) / static_cast<double>(total);
  }
  return out;
}

std::vector<std::map<std::string, std::size_t>> genre_counts(const Corpus& corpus, CountMode mode) {
  std::vector<std::map<std::string, std::size_t>> counts(corpus.vocab_size);
  for (const auto& doc : corpus.documents) {
    if (mode == CountMode::PerClip) {
      for (WordId w : doc.tokens) {
        if (w >= corpus.vocab_size) fail(ErrorCode::UnknownWord, "word " + std::to_string(w));
        ++counts[w][doc.genre];
      }
    } else {
      const std::set<WordId> used(doc.tokens.begin(), doc.tokens.end());
      for (WordId w : used) {
        if (w >= corpus.vocab_size) fail(ErrorCode::UnknownWord, "word " + std::to_string(w));
        ++counts[w][doc.genre];
      }
    }
  }
  return counts;
}

}  // namespace

GenreDistribution word_genre_profile(WordId word, const Corpus& corpus, CountMode mode) {
  if (word >= corpus.vocab_size) fail(ErrorCode::UnknownWord, "word " + std::to_string(word));
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : corpus.documents) {
    std::size_t hits = 0;
    for (WordId w : doc.tokens) hits += (w == word);
    if (hits == 0) continue;
    counts[doc.genre] += mode == CountMode::PerClip ? hits : 1;
  }
  if (counts.empty()) fail(ErrorCode::UnusedWord, "no clip is assigned to word " + std::to_string(word));
  return from_counts(counts);
}

ProfileTable word_genre_profiles(const Corpus& corpus, CountMode mode) {
  const auto counts = genre_counts(corpus, mode);
  ProfileTable out(corpus.vocab_size);
  for (std::size_t w = 0; w < counts.size(); ++w) {
    if (!counts[w].empty()) out[w] = from_counts(counts[w]);
  }
  return out;
}

GenreDistribution topic_genre_profile(std::size_t topic, const LdaModel& model,
                                      const ProfileTable& word_profiles, bool skip_unused) {
  if (topic >= model.n_topics) fail(ErrorCode::InvalidArgument, "topic " + std::to_string(topic));
  if (word_profiles.size() != model.vocab_size) {
    fail(ErrorCode::DimensionMismatch, "word profile table size != vocab size");
  }
  std::vector<double> coeffs;
  std::vector<GenreDistribution> parts;
  for (std::size_t w = 0; w < model.vocab_size; ++w) {
    const double b = model.beta(topic, w);
    if (b <= 0.0) continue;
    if (!word_profiles[w]) {
      if (skip_unused) continue;
      fail(ErrorCode::MissingWordProfile, "topic " + std::to_string(topic) + " uses word " +
                                              std::to_string(w) + " which has no genre profile");
    }
    coeffs.push_back(b);
    parts.push_back(*word_profiles[w]);
  }
  if (parts.empty()) {
    fail(ErrorCode::MissingWordProfile, "topic " + std::to_string(topic) + " has no interpretable words");
  }
  return mix(coeffs, parts);
}

GenreDistribution doc_genre_profile(std::span<const double> theta, const ProfileTable& topic_profiles) {
  if (theta.size() != topic_profiles.size()) fail(ErrorCode::DimensionMismatch, "theta length != topic count");
  std::vector<double> coeffs;
  std::vector<GenreDistribution> parts;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (theta[k] <= 0.0) continue;
    if (!topic_profiles[k]) fail(ErrorCode::MissingTopicProfile, "topic " + std::to_string(k));
    coeffs.push_back(theta[k]);
    parts.push_back(*topic_profiles[k]);
  }
  if (parts.empty()) fail(ErrorCode::InvalidArgument, "theta has no positive entry");
  return mix(coeffs, parts);
}

GenreDistribution term_genre_profile(WordId word, const LdaModel& model,
                                     const ProfileTable& topic_profiles) {
  const auto posterior = term_topic_posterior(model, word);
  return doc_genre_profile(posterior, topic_profiles);
}

GenreTimeline progressive_timeline(const Document& document, double clip_seconds,
                                   std::span<const GenreDistribution> term_profiles,
                                   std::size_t window) {
  if (window == 0) fail(ErrorCode::InvalidArgument, "window must be at least 1");
  if (document.tokens.empty()) fail(ErrorCode::EmptyDocument, document.song_id);
  if (window > document.tokens.size()) {
    fail(ErrorCode::WindowTooLarge, "window " + std::to_string(window) + " > " +
                                        std::to_string(document.tokens.size()) + " tokens in " +
                                        document.song_id);
  }
  for (WordId w : document.tokens) {
    if (w >= term_profiles.size()) fail(ErrorCode::UnknownWord, "word " + std::to_string(w));
  }
  GenreTimeline out;
  const std::size_t count = document.tokens.size() - window + 1;
  out.entries.reserve(count);
  const std::vector<double> coeffs(window, 1.0 / static_cast<double>(window));
  std::vector<GenreDistribution> parts(window);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < window; ++j) parts[j] = term_profiles[document.tokens[i + j]];
    out.entries.push_back({static_cast<double>(i) * clip_seconds, mix(coeffs, parts)});
  }
  return out;
}

}  // namespace atm
