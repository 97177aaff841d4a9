#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "test_util.hpp"
#include "tscope/embeddings.hpp"
#include "tscope/random.hpp"

using namespace tscope;

namespace {

EmbeddingStore store_from(const std::string& text) {
  std::istringstream in(text);
  return read_word_vectors(in);
}

EmbeddingStore random_store(std::size_t dim, const std::vector<std::string>& words, std::uint64_t seed) {
  EmbeddingStore s(dim);
  Rng rng(seed);
  for (const auto& w : words) {
    Vector v(dim);
    for (auto& x : v) x = rng.normal();
    s.set(w, v);
  }
  return s;
}

// Dominant right-singular vector of X by power iteration on X^T X.
Vector power_iteration(const std::vector<Vector>& rows, std::size_t dim) {
  Vector v(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  for (int it = 0; it < 5000; ++it) {
    Vector xv(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) xv[r] = dot(rows[r], v);
    Vector next(dim, 0.0);
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t d = 0; d < dim; ++d) next[d] += rows[r][d] * xv[r];
    const double n = norm(next);
    for (auto& x : next) x /= n;
    double diff = 0.0;
    for (std::size_t d = 0; d < dim; ++d) diff = std::max(diff, std::abs(next[d] - v[d]));
    v = next;
    if (diff < 1e-15) break;
  }
  return v;
}

}  // namespace

TEST(WordVectors, LoadsHeaderAndRows) {
  const auto s = store_from("2 3\nfoo 1 2 3\nbar -1 0.5 0\n");
  EXPECT_EQ(s.dim(), 3u);
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(s.vector("bar"), (Vector{-1, 0.5, 0}));
  EXPECT_EQ(s.total_count(), 0u);
}

TEST(WordVectors, ShortRowIsParseErrorWithLine) {
  try {
    store_from("2 3\nfoo 1 2 3\nbar 1 2\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(WordVectors, DuplicateWordLastWinsWithWarning) {
  testutil::WarningCapture w;
  const auto s = store_from("2 2\nfoo 1 0\nfoo 0 1\n");
  EXPECT_EQ(s.vector("foo"), (Vector{0, 1}));
  EXPECT_EQ(w.messages.size(), 1u);
}

TEST(WordVectors, WriteReadRoundTripIsExact) {
  auto s = random_store(5, {"alpha", "beta", "mesa-util"}, 3);
  std::ostringstream out;
  write_word_vectors(out, s);
  const auto back = store_from(out.str());
  for (const auto& w : s.words()) EXPECT_EQ(back.vector(w), s.vector(w));
}

TEST(Oov, DeterministicUnitAndDistinct) {
  EmbeddingStore s(16);
  const Vector a = s.vector("never-seen");
  EXPECT_EQ(a, s.vector("never-seen"));
  EXPECT_NEAR(norm(a), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(cosine(a, s.vector("never-seen")), 1.0);
  EXPECT_LT(std::abs(cosine(a, s.vector("other-unseen"))), 0.9);
}

TEST(Cosine, BasicValues) {
  const Vector v{0.3, -2, 5};
  const Vector neg{-0.3, 2, -5};
  EXPECT_NEAR(cosine(v, v), 1.0, 1e-15);
  EXPECT_NEAR(cosine(v, neg), -1.0, 1e-15);
  EXPECT_EQ(cosine(Vector{1, 0}, Vector{0, 1}), 0.0);
  EXPECT_THROW(cosine(Vector{0, 0}, Vector{1, 0}), SimilarityError);
  EXPECT_THROW(cosine(Vector{1, 0}, Vector{1, 0, 0}), SimilarityError);
}

TEST(Cosine, SymmetricAndScaleInvariant) {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    Vector u(7), v(7);
    for (auto& x : u) x = rng.normal();
    for (auto& x : v) x = rng.normal();
    EXPECT_EQ(cosine(u, v), cosine(v, u));
    const double alpha = rng.uniform(0.01, 100.0);
    Vector su = u;
    for (auto& x : su) x *= alpha;
    EXPECT_NEAR(cosine(su, v), cosine(u, v), 1e-12);
    const double c = cosine(u, v);
    EXPECT_GE(c, -1.0);
    EXPECT_LE(c, 1.0);
  }
}

TEST(PhraseAverage, SingleWordAndRepeats) {
  const auto s = random_store(6, {"visit", "history"}, 9);
  EXPECT_EQ(embed_phrase_average({"visit"}, s), s.vector("visit"));
  const Vector twice = embed_phrase_average({"visit", "visit"}, s);
  for (std::size_t d = 0; d < 6; ++d) EXPECT_NEAR(twice[d], s.vector("visit")[d], 1e-15);
}

TEST(PhraseAverage, ComponentwiseMean) {
  const auto s = random_store(6, {"visit", "history"}, 9);
  const Vector avg = embed_phrase_average({"visit", "history"}, s);
  const Vector a = s.vector("visit"), b = s.vector("history");
  for (std::size_t d = 0; d < 6; ++d) EXPECT_NEAR(avg[d], (a[d] + b[d]) / 2.0, 1e-15);
}

TEST(PhraseAverage, OovUsesHashVector) {
  const auto s = random_store(6, {"visit"}, 9);
  const Vector v = embed_phrase_average({"zzz"}, s);
  EXPECT_EQ(v, oov_vector("zzz", 6));
}

TEST(Sif, RareWordWeighsMore) {
  EmbeddingStore s(2);
  s.set_frequency("common", 900);
  s.set_frequency("rare", 3);
  EXPECT_GT(sif_weight("rare", s, kDefaultSifA), sif_weight("common", s, kDefaultSifA));
  EXPECT_EQ(s.total_count(), 903u);
}

TEST(Sif, ResidualsOrthogonalAndComponentMatchesPowerIteration) {
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "f", "g", "h"};
  auto s = random_store(10, vocab, 21);
  // Shared offset so there is a clear common direction.
  EmbeddingStore shifted(10);
  for (const auto& w : vocab) {
    Vector v = s.vector(w);
    v[0] += 3.0;
    shifted.set(w, v);
  }
  std::vector<Tokens> sentences = {{"a", "b", "a", "c"}, {"d", "e", "f"}, {"g", "h", "a"}};
  shifted.fit_frequencies(sentences);
  const std::vector<Tokens> phrases = {{"a", "b"}, {"c"}, {"d", "e", "f"}, {"g"}, {"h", "a"}, {"b", "c", "d"}};
  const auto ctx = fit_sif(phrases, shifted, kDefaultSifA);
  ASSERT_TRUE(ctx.removes_component());
  EXPECT_NEAR(norm(ctx.principal_component), 1.0, 1e-12);

  std::vector<Vector> rows;
  for (const auto& p : phrases) {
    // Oracle weights computed from raw counts.
    Vector r(10, 0.0);
    for (const auto& w : p) {
      const double pw = static_cast<double>(shifted.frequency(w)) / static_cast<double>(shifted.total_count());
      const double weight = kDefaultSifA / (kDefaultSifA + pw);
      for (std::size_t d = 0; d < 10; ++d) r[d] += weight * shifted.vector(w)[d] / static_cast<double>(p.size());
    }
    rows.push_back(r);
  }
  const Vector oracle = power_iteration(rows, 10);
  const double sign = dot(oracle, ctx.principal_component) >= 0 ? 1.0 : -1.0;
  for (std::size_t d = 0; d < 10; ++d) EXPECT_NEAR(ctx.principal_component[d], sign * oracle[d], 1e-5);

  for (const auto& p : phrases) {
    const Vector v = embed_phrase_sif(p, shifted, ctx);
    EXPECT_LT(std::abs(dot(v, ctx.principal_component)), 1e-6 * std::max(1.0, norm(v)));
  }
}

TEST(Sif, IdenticalPhrasesAreDegenerate) {
  auto s = random_store(4, {"x", "y"}, 2);
  testutil::WarningCapture w;
  const auto ctx = fit_sif({{"x", "y"}, {"x", "y"}}, s);
  EXPECT_FALSE(ctx.removes_component());
  EXPECT_EQ(w.messages.size(), 1u);
  EXPECT_EQ(embed_phrase_sif({"x"}, s, ctx), sif_weighted_average({"x"}, s, ctx.a));
}

TEST(Sif, JsonRoundTrip) {
  SifContext ctx;
  ctx.a = 0.01;
  ctx.principal_component = {0.6, 0.8};
  const auto back = sif_from_json(sif_to_json(ctx));
  EXPECT_EQ(back.a, ctx.a);
  EXPECT_EQ(back.principal_component, ctx.principal_component);
}

namespace {

std::vector<Tokens> cooccurrence_corpus() {
  // Ten topics of four words; each sentence draws from one topic. "alpha" and "beta" never
  // appear apart: every 30th sentence carries the adjacent pair. The pair is kept rare on
  // purpose; a very frequent pair is drawn as its own negative often enough to push the two
  // input vectors apart.
  Rng rng(4);
  std::vector<Tokens> out;
  for (int i = 0; i < 600; ++i) {
    const std::size_t topic = rng.index(10);
    Tokens s;
    for (int k = 0; k < 5; ++k) s.push_back("t" + std::to_string(topic) + "w" + std::to_string(rng.index(4)));
    if (i % 30 == 0) {
      const auto at = static_cast<std::ptrdiff_t>(rng.index(s.size() + 1));
      s.insert(s.begin() + at, {"alpha", "beta"});
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST(TrainEmbeddings, Deterministic) {
  SkipGramOptions o;
  o.dim = 8;
  o.epochs = 3;
  const auto corpus = cooccurrence_corpus();
  const auto a = train_embeddings(corpus, o);
  const auto b = train_embeddings(corpus, o);
  ASSERT_EQ(a.words(), b.words());
  for (const auto& w : a.words()) EXPECT_EQ(a.vector(w), b.vector(w));
  EXPECT_EQ(a.frequency("alpha"), 20u);
}

TEST(TrainEmbeddings, CooccurringPairMoreSimilarThanCorpusMean) {
  SkipGramOptions o;
  o.dim = 16;
  o.epochs = 10;
  const auto s = train_embeddings(cooccurrence_corpus(), o);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.words().size(); ++i)
    for (std::size_t j = i + 1; j < s.words().size(); ++j) {
      sum += cosine(s.vector(s.words()[i]), s.vector(s.words()[j]));
      ++n;
    }
  EXPECT_GT(cosine(s.vector("alpha"), s.vector("beta")), sum / static_cast<double>(n));
}

TEST(TrainEmbeddings, TinyVocabularyRejected) {
  SkipGramOptions o;
  EXPECT_THROW(train_embeddings({{"solo", "solo"}}, o), TrainingError);
  o.dim = 1;
  EXPECT_THROW(train_embeddings({{"a", "b"}}, o), TrainingError);
}

TEST(TrainEmbeddings, UnseenWordFallsBackToOov) {
  SkipGramOptions o;
  o.dim = 8;
  o.epochs = 1;
  const auto s = train_embeddings(cooccurrence_corpus(), o);
  EXPECT_FALSE(s.contains("absent"));
  EXPECT_EQ(s.vector("absent"), oov_vector("absent", 8));
}
