#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "tscope/categories.hpp"
#include "tscope/corpus.hpp"
#include "tscope/embeddings.hpp"
#include "tscope/errors.hpp"
#include "tscope/preprocess.hpp"
#include "tscope/random.hpp"

namespace tscope {

using EntityDistribution = std::array<double, kEntityClassCount>;
using RelationDistribution = std::array<double, kRelationClassCount>;

// ---------------------------------------------------------------------------
// Candidate spans

struct CandidateSpan {
  std::size_t sentence_index = 0;
  std::size_t token_start = 0;
  std::size_t token_end = 0;  // inclusive
  Vector pooled_vector;

  std::size_t length() const { return token_end - token_start + 1; }
  EntityAnnotation as_entity(EntityCategory c) const { return {sentence_index, token_start, token_end, c}; }
};

// Number of spans of length <= max_len in a sentence of n tokens.
constexpr std::size_t span_count(std::size_t n, std::size_t max_len = kMaxSpanLength) {
  std::size_t total = 0;
  for (std::size_t l = 1; l <= std::min(n, max_len); ++l) total += n - l + 1;
  return total;
}

inline Vector max_pool(const std::vector<const Vector*>& vectors, std::size_t dim) {
  Vector out(dim, -std::numeric_limits<double>::infinity());
  for (const Vector* v : vectors)
    for (std::size_t d = 0; d < dim; ++d) out[d] = std::max(out[d], (*v)[d]);
  return out;
}

// All spans up to max_len within each sentence, ordered by (sentence, start, length).
// pooled_vector is the elementwise max over member word vectors.
inline std::vector<CandidateSpan> enumerate_spans(const TokenizedCase& tc, const EmbeddingStore& store,
                                                  std::size_t max_len = kMaxSpanLength) {
  std::vector<CandidateSpan> spans;
  const std::size_t dim = store.dim();
  for (std::size_t s = 0; s < tc.sentences.size(); ++s) {
    const auto& sent = tc.sentences[s];
    std::vector<Vector> vecs;
    vecs.reserve(sent.size());
    for (const auto& w : sent) vecs.push_back(store.vector(w));
    for (std::size_t start = 0; start < sent.size(); ++start) {
      Vector pooled(dim, -std::numeric_limits<double>::infinity());
      for (std::size_t end = start; end < sent.size() && end - start + 1 <= max_len; ++end) {
        for (std::size_t d = 0; d < dim; ++d) pooled[d] = std::max(pooled[d], vecs[end][d]);
        spans.push_back(CandidateSpan{s, start, end, pooled});
      }
    }
  }
  return spans;
}

// Uniform mean of every token vector in the case (separators excluded).
inline Vector global_context(const TokenizedCase& tc, const EmbeddingStore& store) {
  return embed_phrase_average(tc.flat_tokens(), store);
}

// ---------------------------------------------------------------------------
// Model

// Dense affine map out = W x + b with W stored row-major (rows = classes).
struct LinearHead {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  LinearHead() = default;
  LinearHead(std::size_t in, std::size_t out) : inputs(in), outputs(out), weights(in * out, 0.0), bias(out, 0.0) {}

  std::vector<double> logits(std::span<const double> x) const {
    if (x.size() != inputs) throw ModelError("head input has dimension " + std::to_string(x.size()) +
                                             ", expected " + std::to_string(inputs));
    std::vector<double> z(bias);
    for (std::size_t k = 0; k < outputs; ++k) {
      const double* row = &weights[k * inputs];
      double s = 0.0;
      for (std::size_t i = 0; i < inputs; ++i) s += row[i] * x[i];
      z[k] += s;
    }
    return z;
  }

  bool operator==(const LinearHead&) const = default;
};

struct ExtractionHyperparams {
  double learning_rate = 0.05;
  std::size_t epochs = 30;
  double neg_ratio = 3.0;
  std::uint64_t seed = 1;
  std::size_t span_max_len = kMaxSpanLength;
  std::size_t c0_window = 5;
  std::size_t c1_cap = 20;

  bool operator==(const ExtractionHyperparams&) const = default;
};

struct ExtractionModel {
  std::size_t dim = 0;
  LinearHead entity_head;    // 2*dim -> 6
  LinearHead relation_head;  // 4*dim -> 5
  ExtractionHyperparams hyperparams;

  ExtractionModel() = default;
  ExtractionModel(std::size_t d, ExtractionHyperparams hp)
      : dim(d), entity_head(2 * d, kEntityClassCount), relation_head(4 * d, kRelationClassCount),
        hyperparams(hp) {}

  bool operator==(const ExtractionModel&) const = default;
};

// Softmax restricted to `allowed` entries; others get probability 0.
template <std::size_t N>
std::array<double, N> masked_softmax(const std::vector<double>& z, const std::array<bool, N>& allowed) {
  std::array<double, N> p{};
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < N; ++k)
    if (allowed[k]) m = std::max(m, z[k]);
  double sum = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    p[k] = allowed[k] ? std::exp(z[k] - m) : 0.0;
    sum += p[k];
  }
  for (auto& x : p) x /= sum;
  return p;
}

template <std::size_t N>
std::size_t argmax(const std::array<double, N>& p) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < N; ++k)
    if (p[k] > p[best]) best = k;
  return best;
}

inline Vector concat(std::initializer_list<const Vector*> parts) {
  Vector out;
  for (const Vector* p : parts) out.insert(out.end(), p->begin(), p->end());
  return out;
}

inline Vector entity_features(const Vector& pooled, const Vector& global) { return concat({&pooled, &global}); }

inline EntityDistribution classify_entity_features(const Vector& features, const ExtractionModel& model) {
  std::array<bool, kEntityClassCount> all{};
  all.fill(true);
  return masked_softmax(model.entity_head.logits(features), all);
}

// softmax(W [pooled; global] + b) over (Com, Beh, Pre, Man, Con, Non).
inline EntityDistribution classify_entity(const CandidateSpan& span, const Vector& global,
                                          const ExtractionModel& model) {
  if (span.pooled_vector.size() != model.dim || global.size() != model.dim)
    throw ModelError("span/global dimension does not match the model");
  return classify_entity_features(entity_features(span.pooled_vector, global), model);
}

inline std::array<bool, kRelationClassCount> relation_mask(EntityCategory head) {
  std::array<bool, kRelationClassCount> allowed{};
  allowed[kRelationNone] = true;
  if (auto r = relation_for_head(head)) allowed[index_of(*r)] = true;
  return allowed;
}

namespace detail {

// Start offset of each sentence in the SEP-joined token stream.
inline std::vector<std::size_t> sentence_offsets(const TokenizedCase& tc) {
  std::vector<std::size_t> off(tc.sentences.size(), 0);
  for (std::size_t s = 1; s < tc.sentences.size(); ++s) off[s] = off[s - 1] + tc.sentences[s - 1].size() + 1;
  return off;
}

}  // namespace detail

// Local-context input of the relation head: [V(C0); V(E_i); V(C1); V(E_j)], where E_i is the
// non-Component entity, E_j the Component, C0 up to c0_window tokens before E_i in its sentence,
// and C1 the tokens between the two spans (capped at c1_cap). V() is the phrase average; empty
// windows map to the zero vector.
inline Vector relation_features(const EntityAnnotation& head, const EntityAnnotation& component,
                                const TokenizedCase& tc, const EmbeddingStore& store,
                                const ExtractionHyperparams& hp) {
  const auto& flat = tc.sep_sequence;
  const auto off = detail::sentence_offsets(tc);
  const std::size_t hs = off.at(head.sentence_index) + head.token_start;
  const std::size_t he = off.at(head.sentence_index) + head.token_end;
  const std::size_t cs = off.at(component.sentence_index) + component.token_start;
  const std::size_t ce = off.at(component.sentence_index) + component.token_end;

  const std::size_t c0_begin = head.token_start >= hp.c0_window ? head.token_start - hp.c0_window : 0;
  const auto& hsent = tc.sentences.at(head.sentence_index);
  Tokens c0(hsent.begin() + static_cast<std::ptrdiff_t>(c0_begin),
            hsent.begin() + static_cast<std::ptrdiff_t>(head.token_start));

  Tokens c1;
  const std::size_t gap_begin = std::min(he, ce) + 1;
  const std::size_t gap_end = std::max(hs, cs);  // exclusive
  for (std::size_t i = gap_begin; i < gap_end && c1.size() < hp.c1_cap; ++i) c1.push_back(flat[i]);

  const Tokens ei(flat.begin() + static_cast<std::ptrdiff_t>(hs), flat.begin() + static_cast<std::ptrdiff_t>(he) + 1);
  const Tokens ej(flat.begin() + static_cast<std::ptrdiff_t>(cs), flat.begin() + static_cast<std::ptrdiff_t>(ce) + 1);
  const Vector v_c0 = embed_phrase_average(c0, store);
  const Vector v_ei = embed_phrase_average(ei, store);
  const Vector v_c1 = embed_phrase_average(c1, store);
  const Vector v_ej = embed_phrase_average(ej, store);
  return concat({&v_c0, &v_ei, &v_c1, &v_ej});
}

inline RelationDistribution classify_relation_features(const Vector& features, EntityCategory head,
                                                       const ExtractionModel& model) {
  return masked_softmax(model.relation_head.logits(features), relation_mask(head));
}

// Scores a candidate pair. Exactly one entity must be a Component; the pair is reordered so
// the non-Component entity is E_i. Incompatible relation classes get probability 0.
inline RelationDistribution classify_relation(const EntityAnnotation& a, const EntityAnnotation& b,
                                              const TokenizedCase& tc, const EmbeddingStore& store,
                                              const ExtractionModel& model) {
  const bool a_com = a.category == EntityCategory::Component;
  const bool b_com = b.category == EntityCategory::Component;
  if (a_com == b_com) throw ModelError("relation candidates need exactly one Component entity");
  if (store.dim() != model.dim) throw ModelError("store dimension does not match the model");
  const auto& head = a_com ? b : a;
  const auto& component = a_com ? a : b;
  return classify_relation_features(relation_features(head, component, tc, store, model.hyperparams),
                                    head.category, model);
}

// ---------------------------------------------------------------------------
// Loss and gradients

struct HeadGradient {
  std::vector<double> weights;
  std::vector<double> bias;
};

// Cross-entropy of the masked softmax against `label`, with its gradient w.r.t. the head.
template <std::size_t N>
double softmax_loss_and_gradient(const LinearHead& head, std::span<const double> x,
                                 const std::array<bool, N>& allowed, std::size_t label, HeadGradient* grad) {
  const auto p = masked_softmax(head.logits(x), allowed);
  const double loss = -std::log(std::max(p[label], std::numeric_limits<double>::min()));
  if (grad) {
    grad->weights.assign(head.weights.size(), 0.0);
    grad->bias.assign(head.bias.size(), 0.0);
    for (std::size_t k = 0; k < N; ++k) {
      if (!allowed[k]) continue;
      const double delta = p[k] - (k == label ? 1.0 : 0.0);
      grad->bias[k] = delta;
      double* row = &grad->weights[k * head.inputs];
      for (std::size_t i = 0; i < head.inputs; ++i) row[i] = delta * x[i];
    }
  }
  return loss;
}

inline double entity_loss_and_gradient(const ExtractionModel& model, std::span<const double> features,
                                       std::size_t label, HeadGradient* grad = nullptr) {
  std::array<bool, kEntityClassCount> all{};
  all.fill(true);
  return softmax_loss_and_gradient(model.entity_head, features, all, label, grad);
}

inline double relation_loss_and_gradient(const ExtractionModel& model, std::span<const double> features,
                                         EntityCategory head, std::size_t label, HeadGradient* grad = nullptr) {
  const auto allowed = relation_mask(head);
  if (!allowed.at(label)) throw ModelError("relation label is masked out for this head category");
  return softmax_loss_and_gradient(model.relation_head, features, allowed, label, grad);
}

// ---------------------------------------------------------------------------
// Joint training

struct TrainingResult {
  ExtractionModel model;
  std::vector<double> loss_trace;  // mean per-sample loss of each epoch
};

namespace detail {

struct EntitySample {
  Vector features;
  std::size_t label;
};

struct RelationSample {
  Vector features;
  EntityCategory head;
  std::size_t label;
};

struct CaseSamples {
  std::vector<EntitySample> gold;
  std::vector<EntitySample> negatives;  // pool, subsampled per epoch
  std::vector<RelationSample> relations;
};

inline void sgd_step(LinearHead& head, std::span<const double> x, const std::vector<double>& delta, double lr) {
  for (std::size_t k = 0; k < head.outputs; ++k) {
    if (delta[k] == 0.0) continue;
    head.bias[k] -= lr * delta[k];
    double* row = &head.weights[k * head.inputs];
    const double g = lr * delta[k];
    for (std::size_t i = 0; i < head.inputs; ++i) row[i] -= g * x[i];
  }
}

// One SGD update on a masked softmax head; returns the pre-update loss.
template <std::size_t N>
double train_step(LinearHead& head, std::span<const double> x, const std::array<bool, N>& allowed,
                  std::size_t label, double lr) {
  const auto p = masked_softmax(head.logits(x), allowed);
  std::vector<double> delta(N, 0.0);
  for (std::size_t k = 0; k < N; ++k)
    if (allowed[k]) delta[k] = p[k] - (k == label ? 1.0 : 0.0);
  sgd_step(head, x, delta, lr);
  return -std::log(std::max(p[label], std::numeric_limits<double>::min()));
}

}  // namespace detail

// Minimizes the summed cross-entropy of both heads with plain SGD. Entity samples are the
// gold spans plus neg_ratio times as many non-gold spans (resampled each epoch) labelled
// none; relation samples are every (non-Component, Component) gold-entity pair, labelled
// with the gold relation or none.
inline TrainingResult train_joint(const AnnotatedCorpus& corpus, const EmbeddingStore& store,
                                  const ExtractionHyperparams& hp) {
  if (corpus.empty()) throw TrainingError("cannot train on an empty corpus");
  if (hp.epochs == 0) throw TrainingError("epochs must be positive");
  if (!(hp.learning_rate > 0.0)) throw TrainingError("learning rate must be positive");
  if (hp.neg_ratio < 0.0) throw TrainingError("negative ratio must be non-negative");

  std::vector<detail::CaseSamples> cases;
  std::size_t gold_entities = 0;
  for (const auto& ac : corpus) {
    detail::CaseSamples cs;
    const Vector global = global_context(ac.tokens, store);
    std::map<std::array<std::size_t, 3>, EntityCategory> gold;
    for (const auto& e : ac.entities) gold[{e.sentence_index, e.token_start, e.token_end}] = e.category;
    for (auto& span : enumerate_spans(ac.tokens, store, hp.span_max_len)) {
      auto it = gold.find({span.sentence_index, span.token_start, span.token_end});
      if (it != gold.end())
        cs.gold.push_back({entity_features(span.pooled_vector, global), index_of(it->second)});
      else
        cs.negatives.push_back({entity_features(span.pooled_vector, global), kEntityNone});
    }
    gold_entities += ac.entities.size();
    for (std::size_t h = 0; h < ac.entities.size(); ++h) {
      const auto& head = ac.entities[h];
      if (head.category == EntityCategory::Component) continue;
      for (std::size_t c = 0; c < ac.entities.size(); ++c) {
        if (ac.entities[c].category != EntityCategory::Component) continue;
        std::size_t label = kRelationNone;
        for (const auto& r : ac.relations)
          if (r.head_entity == h && r.component_entity == c) label = index_of(r.category);
        cs.relations.push_back(
            {relation_features(head, ac.entities[c], ac.tokens, store, hp), head.category, label});
      }
    }
    cases.push_back(std::move(cs));
  }
  if (gold_entities == 0) throw TrainingError("corpus has no gold entities");

  TrainingResult result{ExtractionModel(store.dim(), hp), {}};
  auto& model = result.model;
  Rng rng(hp.seed);
  std::array<bool, kEntityClassCount> all{};
  all.fill(true);

  struct Ref {
    bool relation;
    const void* sample;
  };
  std::vector<Ref> order;
  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    order.clear();
    for (const auto& cs : cases) {
      for (const auto& s : cs.gold) order.push_back({false, &s});
      const std::size_t want = std::min(
          cs.negatives.size(),
          static_cast<std::size_t>(std::llround(hp.neg_ratio * static_cast<double>(std::max<std::size_t>(1, cs.gold.size())))));
      std::vector<std::size_t> idx(cs.negatives.size());
      std::iota(idx.begin(), idx.end(), 0);
      for (std::size_t i = 0; i < want; ++i) {
        std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);
        order.push_back({false, &cs.negatives[idx[i]]});
      }
      for (const auto& s : cs.relations) order.push_back({true, &s});
    }
    rng.shuffle(order);
    // Linear decay to 10% of the base rate over the run.
    const double lr = hp.learning_rate *
                      (1.0 - 0.9 * static_cast<double>(epoch) / static_cast<double>(std::max<std::size_t>(1, hp.epochs - 1)));
    double total = 0.0;
    for (const auto& ref : order) {
      if (ref.relation) {
        const auto* s = static_cast<const detail::RelationSample*>(ref.sample);
        total += detail::train_step(model.relation_head, s->features, relation_mask(s->head), s->label, lr);
      } else {
        const auto* s = static_cast<const detail::EntitySample*>(ref.sample);
        total += detail::train_step(model.entity_head, s->features, all, s->label, lr);
      }
    }
    result.loss_trace.push_back(order.empty() ? 0.0 : total / static_cast<double>(order.size()));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Extraction

enum class Provenance { Model, Imported, Gold };

constexpr std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Model: return "model";
    case Provenance::Imported: return "imported";
    case Provenance::Gold: return "gold";
  }
  return "model";
}

struct Extraction {
  std::string case_id;
  std::string project;
  TokenizedCase tokens;
  std::vector<EntityAnnotation> entities;
  std::vector<RelationAnnotation> relations;
  std::vector<double> entity_scores;    // parallel to entities
  std::vector<double> relation_scores;  // parallel to relations
  Provenance provenance = Provenance::Model;

  Tokens entity_tokens(std::size_t i) const {
    const auto& e = entities.at(i);
    const auto& s = tokens.sentences.at(e.sentence_index);
    return Tokens(s.begin() + static_cast<std::ptrdiff_t>(e.token_start),
                  s.begin() + static_cast<std::ptrdiff_t>(e.token_end) + 1);
  }
};

inline Extraction extraction_from_annotations(const AnnotatedCase& ac, Provenance provenance = Provenance::Gold) {
  Extraction ex;
  ex.case_id = ac.test_case.id;
  ex.project = ac.test_case.project;
  ex.tokens = ac.tokens;
  ex.entities = ac.entities;
  ex.relations = ac.relations;
  ex.entity_scores.assign(ex.entities.size(), 1.0);
  ex.relation_scores.assign(ex.relations.size(), 1.0);
  ex.provenance = provenance;
  return ex;
}

inline std::vector<Extraction> gold_extractions(const AnnotatedCorpus& corpus) {
  std::vector<Extraction> out;
  out.reserve(corpus.size());
  for (const auto& ac : corpus) out.push_back(extraction_from_annotations(ac));
  return out;
}

// Runs the span classifier, resolves overlaps (highest class probability wins, ties go to the
// longer span), then scores every (non-Component, Component) pair with the relation head.
inline Extraction extract(const TestCase& tc, const ExtractionModel& model, const EmbeddingStore& store) {
  if (store.dim() != model.dim) throw ModelError("store dimension does not match the model");
  Extraction ex;
  ex.case_id = tc.id;
  ex.project = tc.project;
  ex.tokens = assemble_sequence(tc);
  ex.provenance = Provenance::Model;

  const Vector global = global_context(ex.tokens, store);
  struct Accepted {
    EntityAnnotation entity;
    double score;
  };
  std::vector<Accepted> candidates;
  for (const auto& span : enumerate_spans(ex.tokens, store, model.hyperparams.span_max_len)) {
    const auto p = classify_entity(span, global, model);
    const std::size_t k = argmax(p);
    if (k == kEntityNone) continue;
    candidates.push_back({span.as_entity(kAllEntityCategories[k]), p[k]});
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Accepted& a, const Accepted& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.entity.length() > b.entity.length();
  });
  std::vector<Accepted> kept;
  for (const auto& c : candidates) {
    bool clash = std::any_of(kept.begin(), kept.end(), [&](const Accepted& k) { return k.entity.overlaps(c.entity); });
    if (!clash) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end(), [](const Accepted& a, const Accepted& b) {
    return std::tie(a.entity.sentence_index, a.entity.token_start) < std::tie(b.entity.sentence_index, b.entity.token_start);
  });
  for (const auto& k : kept) {
    ex.entities.push_back(k.entity);
    ex.entity_scores.push_back(k.score);
  }

  for (std::size_t h = 0; h < ex.entities.size(); ++h) {
    if (ex.entities[h].category == EntityCategory::Component) continue;
    for (std::size_t c = 0; c < ex.entities.size(); ++c) {
      if (ex.entities[c].category != EntityCategory::Component) continue;
      const auto p = classify_relation(ex.entities[h], ex.entities[c], ex.tokens, store, model);
      const std::size_t k = argmax(p);
      if (k == kRelationNone) continue;
      ex.relations.push_back({h, c, kAllRelationCategories[k]});
      ex.relation_scores.push_back(p[k]);
    }
  }
  return ex;
}

inline std::vector<Extraction> extract_all(const Corpus& corpus, const ExtractionModel& model,
                                           const EmbeddingStore& store) {
  std::vector<Extraction> out;
  out.reserve(corpus.size());
  for (const auto& tc : corpus.cases) out.push_back(extract(tc, model, store));
  return out;
}

// ---------------------------------------------------------------------------
// Interchange (annotation file format, with optional per-item "score")

inline Json extraction_to_json(const Extraction& ex) {
  Json j = annotation_to_json(ex.case_id, ex.entities, ex.relations);
  if (ex.provenance == Provenance::Model) {
    for (std::size_t i = 0; i < ex.entities.size(); ++i) j["entities"][i]["score"] = ex.entity_scores.at(i);
    for (std::size_t i = 0; i < ex.relations.size(); ++i) j["relations"][i]["score"] = ex.relation_scores.at(i);
  }
  return j;
}

inline void write_extractions(std::ostream& out, const std::vector<Extraction>& extractions) {
  for (const auto& ex : extractions) out << extraction_to_json(ex).dump() << '\n';
}

inline void write_extractions(const std::string& path, const std::vector<Extraction>& extractions) {
  auto out = detail::open_output(path);
  write_extractions(out, extractions);
}

// Reads externally produced extractions; validated exactly like gold annotations. Scores
// in the file are kept, otherwise every item scores 1.
inline std::vector<Extraction> read_extractions(std::istream& in, const Corpus& corpus,
                                                Provenance provenance = Provenance::Imported,
                                                std::size_t max_span = kMaxSpanLength) {
  const auto records = read_annotation_records(in);
  const auto annotated = attach_annotations(records, corpus, max_span);
  std::vector<Extraction> out;
  out.reserve(annotated.size());
  std::map<std::string, const AnnotationRecord*> by_id;
  for (const auto& r : records) by_id[r.id] = &r;
  for (const auto& ac : annotated) {
    auto ex = extraction_from_annotations(ac, provenance);
    if (auto it = by_id.find(ac.test_case.id); it != by_id.end()) {
      if (!it->second->entity_scores.empty()) ex.entity_scores = it->second->entity_scores;
      if (!it->second->relation_scores.empty()) ex.relation_scores = it->second->relation_scores;
    }
    out.push_back(std::move(ex));
  }
  return out;
}

inline std::vector<Extraction> import_extractions(const std::string& path, const Corpus& corpus,
                                                  std::size_t max_span = kMaxSpanLength) {
  auto in = detail::open_input(path);
  return read_extractions(in, corpus, Provenance::Imported, max_span);
}

inline AnnotatedCase to_annotated(const Extraction& ex, const TestCase& tc) {
  return AnnotatedCase{tc, ex.tokens, ex.entities, ex.relations};
}

// ---------------------------------------------------------------------------
// Model persistence

inline Json head_to_json(const LinearHead& h) {
  Json j;
  j["rows"] = h.outputs;
  j["cols"] = h.inputs;
  j["weights"] = h.weights;
  j["bias"] = h.bias;
  return j;
}

inline LinearHead head_from_json(const Json& j) {
  LinearHead h(j.at("cols").get<std::size_t>(), j.at("rows").get<std::size_t>());
  h.weights = j.at("weights").get<std::vector<double>>();
  h.bias = j.at("bias").get<std::vector<double>>();
  if (h.weights.size() != h.inputs * h.outputs || h.bias.size() != h.outputs)
    throw ParseError("classifier head has inconsistent sizes");
  return h;
}

inline Json model_to_json(const ExtractionModel& m) {
  Json j;
  j["format"] = "tscope-extraction-model";
  j["dim"] = m.dim;
  j["span_max_len"] = m.hyperparams.span_max_len;
  j["c0_window"] = m.hyperparams.c0_window;
  j["c1_cap"] = m.hyperparams.c1_cap;
  j["entity_head"] = head_to_json(m.entity_head);
  j["relation_head"] = head_to_json(m.relation_head);
  j["learning_rate"] = m.hyperparams.learning_rate;
  j["epochs"] = m.hyperparams.epochs;
  j["neg_ratio"] = m.hyperparams.neg_ratio;
  j["seed"] = m.hyperparams.seed;
  return j;
}

inline ExtractionModel model_from_json(const Json& j) {
  try {
    if (j.value("format", "") != "tscope-extraction-model") throw ParseError("not an extraction model record");
    ExtractionModel m;
    m.dim = j.at("dim").get<std::size_t>();
    m.hyperparams.span_max_len = j.at("span_max_len").get<std::size_t>();
    m.hyperparams.c0_window = j.at("c0_window").get<std::size_t>();
    m.hyperparams.c1_cap = j.at("c1_cap").get<std::size_t>();
    m.hyperparams.learning_rate = j.at("learning_rate").get<double>();
    m.hyperparams.epochs = j.at("epochs").get<std::size_t>();
    m.hyperparams.neg_ratio = j.at("neg_ratio").get<double>();
    m.hyperparams.seed = j.at("seed").get<std::uint64_t>();
    m.entity_head = head_from_json(j.at("entity_head"));
    m.relation_head = head_from_json(j.at("relation_head"));
    if (m.entity_head.inputs != 2 * m.dim || m.entity_head.outputs != kEntityClassCount ||
        m.relation_head.inputs != 4 * m.dim || m.relation_head.outputs != kRelationClassCount)
      throw ParseError("classifier head shapes do not match dim");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad model record: ") + e.what());
  }
}

inline void save_model(const std::string& path, const ExtractionModel& m) {
  auto out = detail::open_output(path);
  out << model_to_json(m).dump() << '\n';
}

inline ExtractionModel load_model(const std::string& path) {
  auto in = detail::open_input(path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("bad model file: ") + e.what());
  }
  return model_from_json(j);
}

}  // namespace tscope
