#include <algorithm>

#include "atm/error.hpp"
#include "atm/eval.hpp"
#include "atm/lda.hpp"
#include "doctest.h"

using namespace atm;

namespace {

Corpus labelled(std::size_t genres, std::size_t per) {
  Corpus c;
  c.vocab_size = 2;
  for (std::size_t g = 0; g < genres; ++g) {
    const std::string name = "g" + std::to_string(g);
    c.genres.insert(name);
    for (std::size_t i = 0; i < per; ++i) {
      c.documents.push_back({name + "-" + std::to_string(i), name, {0, 1}});
    }
  }
  return c;
}

std::vector<std::string> ids(const Corpus& c) {
  std::vector<std::string> out;
  for (const auto& d : c.documents) out.push_back(d.song_id);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("stratified split") {
  const auto c = labelled(10, 10);
  const auto s = split_stratified(c, {0.8, 42, true});
  CHECK(s.train.documents.size() == 80);
  CHECK(s.test.documents.size() == 20);
  for (const auto& g : c.genres) {
    CHECK(std::count_if(s.test.documents.begin(), s.test.documents.end(),
                        [&](const Document& d) { return d.genre == g; }) == 2);
  }
  const auto again = split_stratified(c, {0.8, 42, true});
  CHECK(ids(again.train) == ids(s.train));
  auto all = ids(s.train);
  const auto test = ids(s.test);
  all.insert(all.end(), test.begin(), test.end());
  std::sort(all.begin(), all.end());
  CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
  CHECK(all == ids(c));

  CHECK_THROWS_AS(split_stratified(labelled(2, 1), {}), Error);
}

TEST_CASE("separable classes are fit exactly") {
  std::vector<std::vector<double>> x;
  std::vector<std::string> y;
  for (int i = 0; i < 20; ++i) {
    const double e = 0.01 * i;
    x.push_back({0.9 - e, 0.1 + e});
    y.push_back("left");
    x.push_back({0.1 + e, 0.9 - e});
    y.push_back("right");
  }
  const auto clf = train_classifier(x, y, {200, 1e-3, 5});
  CHECK(evaluate_accuracy(clf, x, y) == 1.0);
  const auto clf2 = train_classifier(x, y, {200, 1e-3, 5});
  CHECK(clf.weights == clf2.weights);
  CHECK(clf.bias == clf2.bias);

  std::vector<std::string> flipped;
  for (const auto& l : y) flipped.push_back(l == "left" ? "right" : "left");
  CHECK(evaluate_accuracy(clf, x, flipped) == 0.0);
  CHECK_THROWS_AS(train_classifier(x, std::vector<std::string>(x.size(), "left"), {}), Error);
  CHECK_THROWS_AS(evaluate_accuracy(clf, {}, {}), Error);
}

TEST_CASE("constant classifier on balanced labels") {
  LinearClassifier clf;
  clf.genres = {"a", "b", "c"};
  clf.weights.assign(3, std::vector<double>{0.0});
  clf.bias = {1.0, 0.0, 0.0};
  std::vector<std::vector<double>> x(9, std::vector<double>{1.0});
  std::vector<std::string> y{"a", "b", "c", "a", "b", "c", "a", "b", "c"};
  CHECK(evaluate_accuracy(clf, x, y) == doctest::Approx(1.0 / 3));
}

TEST_CASE("accuracy table shape") {
  AccuracyTable t;
  t.bucket_ids = {1, 2, 3};
  t.topic_counts = {2, 3, 4, 5};
  t.cells.assign(3, std::vector<std::optional<double>>(4, 0.5));
  t.seeds.assign(3, std::vector<std::uint64_t>(4, 0));
  t.errors.assign(3, std::vector<std::string>(4));
  t.cells[1][2].reset();
  validate(t);
  const auto csv = accuracy_csv(t);
  CHECK(csv == "bucket,2,3,4,5\nbucket1,0.5000,0.5000,0.5000,0.5000\n"
               "bucket2,0.5000,0.5000,NA,0.5000\nbucket3,0.5000,0.5000,0.5000,0.5000\n");
  t.cells[0][0] = 1.5;
  CHECK_THROWS_AS(validate(t), Error);
}

TEST_CASE("test documents never reach LDA training") {
  GeneratorConfig g;
  g.n_docs = 30;
  g.doc_len = 40;
  g.seed = 12;
  auto syn = generate_corpus(g);
  for (std::size_t d = 0; d < syn.corpus.documents.size(); ++d) {
    syn.corpus.documents[d].genre = d % 2 ? "odd" : "even";
  }
  syn.corpus.genres = {"even", "odd"};
  SweepConfig cfg;
  cfg.iters = 40;
  cfg.infer_iters = 10;
  const auto split = split_stratified(syn.corpus, {0.8, 1, true});
  Split no_test{split.train, split.test};
  for (auto& d : no_test.test.documents) d.tokens = {0};
  const auto a = fit_topic_features(split, 3, cfg, 77);
  const auto b = fit_topic_features(no_test, 3, cfg, 77);
  CHECK(a.model.beta == b.model.beta);
  CHECK(a.train_theta == b.train_theta);

  // Training accuracy is at least the majority-class rate.
  std::vector<std::string> labels;
  for (const auto& d : split.train.documents) labels.push_back(d.genre);
  const auto clf = train_classifier(a.train_theta, labels, cfg.svm);
  const auto evens = std::count(labels.begin(), labels.end(), "even");
  const double majority = double(std::max<long>(evens, long(labels.size()) - evens)) / double(labels.size());
  CHECK(evaluate_accuracy(clf, a.train_theta, labels) >= majority);
}
