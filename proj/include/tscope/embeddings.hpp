#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "tscope/errors.hpp"
#include "tscope/preprocess.hpp"
#include "tscope/random.hpp"

namespace tscope {

using Vector = std::vector<double>;

inline double dot(std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

inline double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

inline bool is_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

// Cosine similarity. Throws SimilarityError for mismatched lengths or a zero vector.
inline double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw SimilarityError("cosine: vectors differ in length");
  const double uu = dot(u, u);
  const double vv = dot(v, v);
  if (uu == 0.0 || vv == 0.0) throw SimilarityError("cosine: zero vector");
  const double c = dot(u, v) / std::sqrt(uu * vv);
  return std::clamp(c, -1.0, 1.0);
}

// Deterministic unit vector for out-of-vocabulary words, seeded by a hash of the word.
inline Vector oov_vector(std::string_view word, std::size_t dim) {
  Rng rng(fnv1a(word));
  Vector v(dim);
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (auto& x : v) {
      x = rng.normal();
      n2 += x * x;
    }
  } while (n2 == 0.0);
  const double inv = 1.0 / std::sqrt(n2);
  for (auto& x : v) x *= inv;
  return v;
}

// Word -> vector table plus corpus unigram counts. Words keep insertion order.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw ConfigError("embedding dimension must be positive");
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  bool contains(std::string_view w) const { return index_.count(std::string(w)) != 0; }

  // Inserts or replaces a word vector. Returns false when the word already existed.
  bool set(const std::string& word, Vector v) {
    if (v.size() != dim_) throw ValidationError("vector for \"" + word + "\" has wrong dimension");
    auto [it, inserted] = index_.emplace(word, words_.size());
    if (inserted) {
      words_.push_back(word);
      vectors_.push_back(std::move(v));
    } else {
      vectors_[it->second] = std::move(v);
    }
    return inserted;
  }

  // In-vocabulary vector, or the hash-seeded OOV vector.
  Vector vector(std::string_view word) const {
    if (auto it = index_.find(std::string(word)); it != index_.end()) return vectors_[it->second];
    return oov_vector(word, dim_);
  }

  const Vector* find(std::string_view word) const {
    auto it = index_.find(std::string(word));
    return it == index_.end() ? nullptr : &vectors_[it->second];
  }

  std::uint64_t frequency(std::string_view word) const {
    auto it = frequencies_.find(std::string(word));
    return it == frequencies_.end() ? 0 : it->second;
  }
  std::uint64_t total_count() const { return total_count_; }

  double probability(std::string_view word) const {
    return total_count_ ? static_cast<double>(frequency(word)) / static_cast<double>(total_count_) : 0.0;
  }

  // Replaces unigram counts with those of the given token sequences.
  void fit_frequencies(const std::vector<Tokens>& sentences) {
    frequencies_.clear();
    total_count_ = 0;
    for (const auto& s : sentences)
      for (const auto& w : s) {
        if (w == kSep) continue;
        ++frequencies_[w];
        ++total_count_;
      }
  }

  void set_frequency(const std::string& word, std::uint64_t count) {
    auto& slot = frequencies_[word];
    total_count_ = total_count_ - slot + count;
    slot = count;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> words_;
  std::vector<Vector> vectors_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::string, std::uint64_t> frequencies_;
  std::uint64_t total_count_ = 0;
};

// ---------------------------------------------------------------------------
// word2vec text format: header "V D", then V lines "word v1 ... vD".

inline EmbeddingStore read_word_vectors(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::size_t declared = 0, dim = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!detail::trim(line).empty()) break;
  }
  {
    std::istringstream hs(line);
    if (!(hs >> declared >> dim) || dim == 0) throw ParseError("bad word2vec header", lineno);
  }
  EmbeddingStore store(dim);
  std::size_t read = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    Vector v;
    std::string tok;
    while (ls >> tok) {
      double x = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) throw ParseError("bad number \"" + tok + "\"", lineno);
      v.push_back(x);
    }
    if (v.size() != dim)
      throw ParseError("expected " + std::to_string(dim) + " values, got " + std::to_string(v.size()), lineno);
    if (!store.set(word, std::move(v))) warn("duplicate word \"" + word + "\" in vectors; last occurrence wins");
    ++read;
  }
  if (read != declared) warn("word2vec header declares " + std::to_string(declared) + " words, found " +
                             std::to_string(read));
  return store;
}

inline EmbeddingStore load_word_vectors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return read_word_vectors(in);
}

inline std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

inline void write_word_vectors(std::ostream& out, const EmbeddingStore& store) {
  out << store.size() << ' ' << store.dim() << '\n';
  for (const auto& w : store.words()) {
    out << w;
    for (double x : *store.find(w)) out << ' ' << format_double(x);
    out << '\n';
  }
}

inline void write_word_vectors(const std::string& path, const EmbeddingStore& store) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path);
  write_word_vectors(out, store);
}

// ---------------------------------------------------------------------------
// Skip-gram with negative sampling.

struct SkipGramOptions {
  std::size_t dim = 50;
  std::size_t window = 3;
  std::size_t epochs = 20;
  std::size_t negatives = 5;
  double learning_rate = 0.025;
  double min_learning_rate = 0.0001;
  std::uint64_t seed = 1;
};

inline EmbeddingStore train_embeddings(const std::vector<Tokens>& sentences, const SkipGramOptions& opt) {
  if (opt.dim < 2) throw TrainingError("embedding dimension must be at least 2");
  if (opt.window == 0 || opt.epochs == 0) throw TrainingError("window and epochs must be positive");

  std::map<std::string, std::uint64_t> counts;
  std::uint64_t total = 0;
  for (const auto& s : sentences)
    for (const auto& w : s)
      if (w != kSep) {
        ++counts[w];
        ++total;
      }
  if (counts.size() < 2) throw TrainingError("vocabulary must contain at least 2 words");

  // Vocabulary ordered by descending count, then lexicographically.
  std::vector<std::pair<std::string, std::uint64_t>> vocab(counts.begin(), counts.end());
  std::stable_sort(vocab.begin(), vocab.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::unordered_map<std::string, std::size_t> id;
  for (std::size_t i = 0; i < vocab.size(); ++i) id.emplace(vocab[i].first, i);

  std::vector<double> noise_cdf(vocab.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    acc += std::pow(static_cast<double>(vocab[i].second), 0.75);
    noise_cdf[i] = acc;
  }
  for (auto& x : noise_cdf) x /= acc;

  std::vector<std::vector<std::size_t>> encoded;
  encoded.reserve(sentences.size());
  for (const auto& s : sentences) {
    std::vector<std::size_t> e;
    for (const auto& w : s)
      if (w != kSep) e.push_back(id.at(w));
    if (!e.empty()) encoded.push_back(std::move(e));
  }

  const std::size_t V = vocab.size(), D = opt.dim;
  Rng rng(opt.seed);
  std::vector<double> in(V * D), out(V * D, 0.0);
  for (auto& x : in) x = (rng.uniform() - 0.5) / static_cast<double>(D);

  auto sample_noise = [&] {
    const double u = rng.uniform();
    auto it = std::upper_bound(noise_cdf.begin(), noise_cdf.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - noise_cdf.begin()), V - 1);
  };
  auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };

  const double total_steps = static_cast<double>(total) * static_cast<double>(opt.epochs);
  double processed = 0.0;
  std::vector<double> grad(D);
  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    for (const auto& sent : encoded) {
      for (std::size_t pos = 0; pos < sent.size(); ++pos) {
        const double lr =
            std::max(opt.min_learning_rate, opt.learning_rate * (1.0 - processed / (total_steps + 1.0)));
        processed += 1.0;
        const std::size_t reach = 1 + rng.index(opt.window);
        const std::size_t lo = pos >= reach ? pos - reach : 0;
        const std::size_t hi = std::min(sent.size() - 1, pos + reach);
        for (std::size_t c = lo; c <= hi; ++c) {
          if (c == pos) continue;
          double* center = &in[sent[pos] * D];
          std::fill(grad.begin(), grad.end(), 0.0);
          for (std::size_t k = 0; k <= opt.negatives; ++k) {
            std::size_t target;
            double label;
            if (k == 0) {
              target = sent[c];
              label = 1.0;
            } else {
              target = sample_noise();
              if (target == sent[c]) continue;
              label = 0.0;
            }
            double* ctx = &out[target * D];
            double f = 0.0;
            for (std::size_t d = 0; d < D; ++d) f += center[d] * ctx[d];
            const double g = (label - sigmoid(f)) * lr;
            for (std::size_t d = 0; d < D; ++d) {
              grad[d] += g * ctx[d];
              ctx[d] += g * center[d];
            }
          }
          for (std::size_t d = 0; d < D; ++d) center[d] += grad[d];
        }
      }
    }
  }

  EmbeddingStore store(D);
  for (std::size_t i = 0; i < V; ++i) {
    store.set(vocab[i].first, Vector(in.begin() + static_cast<std::ptrdiff_t>(i * D),
                                     in.begin() + static_cast<std::ptrdiff_t>((i + 1) * D)));
    store.set_frequency(vocab[i].first, vocab[i].second);
  }
  return store;
}

// ---------------------------------------------------------------------------
// Phrase vectors

// Elementwise mean of member word vectors; OOV words use oov_vector.
inline Vector embed_phrase_average(const Tokens& tokens, const EmbeddingStore& store) {
  Vector out(store.dim(), 0.0);
  if (tokens.empty()) return out;
  for (const auto& w : tokens) {
    if (const Vector* v = store.find(w)) {
      for (std::size_t d = 0; d < out.size(); ++d) out[d] += (*v)[d];
    } else {
      const Vector o = oov_vector(w, store.dim());
      for (std::size_t d = 0; d < out.size(); ++d) out[d] += o[d];
    }
  }
  const double inv = 1.0 / static_cast<double>(tokens.size());
  for (auto& x : out) x *= inv;
  return out;
}

inline constexpr double kDefaultSifA = 1e-3;

struct SifContext {
  double a = kDefaultSifA;
  // Unit-norm common direction; empty when the fit was degenerate (no removal).
  Vector principal_component;

  bool removes_component() const { return !principal_component.empty(); }
};

inline double sif_weight(std::string_view word, const EmbeddingStore& store, double a) {
  return a / (a + store.probability(word));
}

// Mean of a/(a + p(w)) * v_w over the phrase.
inline Vector sif_weighted_average(const Tokens& tokens, const EmbeddingStore& store, double a) {
  Vector out(store.dim(), 0.0);
  if (tokens.empty()) return out;
  for (const auto& w : tokens) {
    const double weight = sif_weight(w, store, a);
    const Vector v = store.vector(w);
    for (std::size_t d = 0; d < out.size(); ++d) out[d] += weight * v[d];
  }
  const double inv = 1.0 / static_cast<double>(tokens.size());
  for (auto& x : out) x *= inv;
  return out;
}

inline Vector remove_projection(Vector v, const Vector& unit) {
  const double p = dot(v, unit);
  for (std::size_t d = 0; d < v.size(); ++d) v[d] -= p * unit[d];
  return v;
}

// Fits the common component as the first right-singular vector of the stacked
// weighted phrase averages (one row per distinct phrase).
inline SifContext fit_sif(const std::vector<Tokens>& phrases, const EmbeddingStore& store, double a = kDefaultSifA) {
  if (!(a > 0.0)) throw ConfigError("SIF smoothing constant must be positive");
  SifContext ctx;
  ctx.a = a;
  std::set<Tokens> distinct;
  for (const auto& p : phrases)
    if (!p.empty()) distinct.insert(p);
  if (distinct.size() < 2) {
    warn("fit_sif: fewer than 2 distinct phrases; common-component removal disabled");
    return ctx;
  }
  Eigen::MatrixXd X(static_cast<Eigen::Index>(distinct.size()), static_cast<Eigen::Index>(store.dim()));
  Eigen::Index row = 0;
  for (const auto& p : distinct) {
    const Vector v = sif_weighted_average(p, store, a);
    for (std::size_t d = 0; d < v.size(); ++d) X(row, static_cast<Eigen::Index>(d)) = v[d];
    ++row;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinV);
  if (svd.singularValues().size() == 0 || !(svd.singularValues()(0) > 0.0)) {
    warn("fit_sif: phrase matrix is zero; common-component removal disabled");
    return ctx;
  }
  Eigen::VectorXd pc = svd.matrixV().col(0);
  pc.normalize();
  // Fix the sign so the largest-magnitude coordinate is positive.
  Eigen::Index arg = 0;
  pc.cwiseAbs().maxCoeff(&arg);
  if (pc(arg) < 0) pc = -pc;
  ctx.principal_component.assign(pc.data(), pc.data() + pc.size());
  return ctx;
}

inline Vector embed_phrase_sif(const Tokens& tokens, const EmbeddingStore& store, const SifContext& ctx) {
  Vector v = sif_weighted_average(tokens, store, ctx.a);
  if (ctx.removes_component()) {
    if (ctx.principal_component.size() != store.dim()) throw ConfigError("SIF component dimension mismatch");
    v = remove_projection(std::move(v), ctx.principal_component);
  }
  return v;
}

inline nlohmann::ordered_json sif_to_json(const SifContext& ctx) {
  nlohmann::ordered_json j;
  j["a"] = ctx.a;
  j["principal_component"] = ctx.principal_component;
  return j;
}

inline SifContext sif_from_json(const nlohmann::ordered_json& j) {
  SifContext ctx;
  try {
    ctx.a = j.at("a").get<double>();
    ctx.principal_component = j.at("principal_component").get<Vector>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad SIF record: ") + e.what());
  }
  if (!(ctx.a > 0.0)) throw ValidationError("SIF smoothing constant must be positive");
  if (ctx.removes_component() && std::abs(norm(ctx.principal_component) - 1.0) > 1e-9)
    throw ValidationError("SIF principal component is not unit-norm");
  return ctx;
}

}  // namespace tscope
