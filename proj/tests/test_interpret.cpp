#include <random>

#include "atm/error.hpp"
#include "atm/interpret.hpp"
#include "doctest.h"

using namespace atm;

namespace {

Corpus corpus_of(std::vector<std::pair<std::string, std::vector<WordId>>> docs, std::size_t v) {
  Corpus c;
  c.vocab_size = v;
  int i = 0;
  for (auto& [g, toks] : docs) {
    c.documents.push_back({"s" + std::to_string(i++), g, toks});
    c.genres.insert(g);
  }
  return c;
}

GenreDistribution dist(std::map<std::string, double> w) { return {std::move(w)}; }

LdaModel model_with_beta(const std::vector<std::vector<double>>& beta) {
  LdaModel m;
  m.n_topics = beta.size();
  m.vocab_size = beta[0].size();
  m.alpha.assign(m.n_topics, 1.0);
  m.eta = 0.01;
  m.beta = Matrix(m.n_topics, m.vocab_size);
  for (std::size_t k = 0; k < m.n_topics; ++k)
    for (std::size_t w = 0; w < m.vocab_size; ++w) m.beta(k, w) = beta[k][w];
  m.topic_prior.assign(m.n_topics, 1.0 / double(m.n_topics));
  return m;
}

}  // namespace

TEST_CASE("word profile from clip labels") {
  const auto c = corpus_of({{"blues", {0, 1}}, {"country", {0}}, {"blues", {0}}}, 2);
  const auto p = word_genre_profile(0, c);
  CHECK(p["blues"] == doctest::Approx(2.0 / 3));
  CHECK(p["country"] == doctest::Approx(1.0 / 3));
  CHECK(std::abs(p["blues"] - 0.67) < 0.005);
  CHECK(std::abs(p["country"] - 0.33) < 0.005);

  const auto c2 = corpus_of({{"blues", {3}}, {"jazz", {3, 3}}, {"country", {3}}}, 4);
  const auto q = word_genre_profile(3, c2);
  CHECK(q["blues"] == 0.25);
  CHECK(q["jazz"] == 0.5);
  CHECK(q["country"] == 0.25);

  CHECK(word_genre_profile(1, c)["blues"] == 1.0);
  CHECK_THROWS_AS(word_genre_profile(1, c2), Error);
}

TEST_CASE("per-song counting") {
  const auto c = corpus_of({{"jazz", {0, 0, 0}}, {"blues", {0}}}, 1);
  CHECK(word_genre_profile(0, c, CountMode::PerClip)["jazz"] == 0.75);
  CHECK(word_genre_profile(0, c, CountMode::PerSong)["jazz"] == 0.5);
}

TEST_CASE("topic profile") {
  ProfileTable words(6);
  for (std::size_t w = 0; w < 6; ++w) words[w] = dist({{"rock", 0.1 * double(w)}, {"pop", 1 - 0.1 * double(w)}});
  const auto one_hot = model_with_beta({{0, 0, 0, 0, 0, 1}});
  CHECK(topic_genre_profile(0, one_hot, words) == *words[5]);

  ProfileTable clusters{dist({{"blues", 2.0 / 3}, {"country", 1.0 / 3}}),
                   dist({{"blues", 0.25}, {"jazz", 0.5}, {"country", 0.25}})};
  const auto m = model_with_beta({{0.6, 0.4}});
  const auto t = topic_genre_profile(0, m, clusters);
  // 0.6*(0.67, 0.33) + 0.4*(0.25, 0.25, 0.5) with the rounded profile gives 0.502/0.298/0.200.
  CHECK(std::abs(t["blues"] - 0.502) < 0.005);
  CHECK(std::abs(t["country"] - 0.298) < 0.005);
  CHECK(t["jazz"] == doctest::Approx(0.2));

  ProfileTable same{dist({{"a", 0.3}, {"b", 0.7}}), dist({{"a", 0.3}, {"b", 0.7}})};
  const auto u = topic_genre_profile(0, model_with_beta({{0.5, 0.5}}), same);
  CHECK(u["a"] == doctest::Approx(0.3));

  ProfileTable gap{dist({{"a", 1.0}}), std::nullopt};
  const auto skipped = topic_genre_profile(0, model_with_beta({{0.5, 0.5}}), gap);
  CHECK(skipped["a"] == 1.0);
  CHECK_THROWS_AS(topic_genre_profile(0, model_with_beta({{0.5, 0.5}}), gap, false), Error);
  ProfileTable none{std::nullopt, std::nullopt};
  CHECK_THROWS_AS(topic_genre_profile(0, model_with_beta({{0.5, 0.5}}), none), Error);
}

TEST_CASE("document profile") {
  ProfileTable topics{dist({{"blues", 0.33}, {"country", 0.33}, {"jazz", 0.34}}),
                      dist({{"jazz", 0.5}, {"country", 0.5}})};
  const std::vector<double> half{0.5, 0.5};
  const auto d = doc_genre_profile(half, topics);
  CHECK(d["blues"] == doctest::Approx(0.165));
  CHECK(d["country"] == doctest::Approx(0.415));
  CHECK(d["jazz"] == doctest::Approx(0.420));
  CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-12));
  const std::vector<double> hot{0.0, 1.0};
  CHECK(doc_genre_profile(hot, topics) == *topics[1]);
  ProfileTable missing{topics[0], std::nullopt};
  CHECK_THROWS_AS(doc_genre_profile(half, missing), Error);
}

TEST_CASE("term profile") {
  ProfileTable topics{dist({{"blues", 1.0}}), dist({{"blues", 0.5}, {"jazz", 0.5}})};
  auto m = model_with_beta({{0.7, 0.3}, {0.3, 0.7}});
  m.topic_prior = {0.5, 0.5};
  const auto p = term_genre_profile(0, m, topics);
  CHECK(p["blues"] == doctest::Approx(0.85));
  CHECK(p["jazz"] == doctest::Approx(0.15));

  const auto hot = model_with_beta({{0.0, 1.0}, {0.5, 0.5}});
  CHECK(term_genre_profile(0, hot, topics) == *topics[1]);
  ProfileTable single{dist({{"x", 0.4}, {"y", 0.6}})};
  CHECK(term_genre_profile(1, model_with_beta({{0.5, 0.5}}), single) == *single[0]);
}

TEST_CASE("progressive timeline") {
  std::vector<GenreDistribution> terms{dist({{"a", 1.0}}), dist({{"b", 1.0}}),
                                       dist({{"a", 0.25}, {"b", 0.75}})};
  Document same{"s", "a", std::vector<WordId>(20, 2)};
  const auto flat = progressive_timeline(same, 0.1, terms, 5);
  CHECK(flat.entries.size() == 16);
  for (const auto& e : flat.entries) {
    CHECK(e.distribution["a"] == doctest::Approx(0.25));
    CHECK(e.distribution["b"] == doctest::Approx(0.75));
  }

  Document alt{"s", "a", {0, 1, 1, 0}};
  const auto raw = progressive_timeline(alt, 0.1, terms, 1);
  REQUIRE(raw.entries.size() == 4);
  CHECK(raw.entries[0].distribution["a"] == 1.0);
  CHECK(raw.entries[1].distribution["b"] == 1.0);
  CHECK(raw.entries[3].start_time == doctest::Approx(0.3));

  std::vector<WordId> long_doc(300);
  for (std::size_t i = 0; i < 300; ++i) long_doc[i] = static_cast<WordId>(i % 3);
  const auto t = progressive_timeline({"s", "a", long_doc}, 0.1, terms, 11);
  REQUIRE(t.entries.size() == 290);
  CHECK(t.entries[1].start_time - t.entries[0].start_time == doctest::Approx(0.1));
  for (const auto& e : t.entries) CHECK(e.distribution.total() == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(progressive_timeline(alt, 0.1, terms, 5), Error);
}

TEST_CASE("mix renormalizes") {
  std::vector<GenreDistribution> parts{dist({{"a", 1.0}}), dist({{"b", 1.0}})};
  const std::vector<double> w{1.0, 3.0};
  const auto m = mix(w, parts);
  CHECK(m["a"] == 0.25);
  CHECK(m["b"] == 0.75);
}

TEST_CASE("word profiles equal a rescan of clip labels") {
  std::mt19937_64 gen(31);
  const std::vector<std::string> names{"disco", "hiphop", "reggae"};
  Corpus c;
  c.vocab_size = 7;
  for (int d = 0; d < 12; ++d) {
    Document doc{"d" + std::to_string(d), names[gen() % 3], {}};
    for (int i = 0; i < 25; ++i) doc.tokens.push_back(static_cast<WordId>(gen() % 7));
    c.genres.insert(doc.genre);
    c.documents.push_back(doc);
  }
  const auto table = word_genre_profiles(c);
  for (WordId w = 0; w < 7; ++w) {
    std::map<std::string, double> hits;
    double total = 0;
    for (const auto& doc : c.documents) {
      for (WordId t : doc.tokens) {
        if (t == w) hits[doc.genre] += 1, total += 1;
      }
    }
    REQUIRE(table[w]);
    for (const auto& [g, n] : hits) CHECK((*table[w])[g] == n / total);
  }
}
