#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "tscope/compare.hpp"
#include "tscope/corpus.hpp"
#include "tscope/extraction.hpp"
#include "tscope/random.hpp"
#include "tscope/stats.hpp"

namespace tscope {

// Rates are absent when their denominator is zero.
struct MetricReport {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::size_t total = 0;  // items judged, for accuracy
  std::optional<double> precision, recall, f1, accuracy;

  static MetricReport from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn,
                                  std::optional<std::size_t> total = std::nullopt) {
    MetricReport m;
    m.tp = tp;
    m.fp = fp;
    m.fn = fn;
    m.tn = tn;
    m.total = total.value_or(tp + fp + fn + tn);
    if (tp + fp) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (m.precision && m.recall)
      m.f1 = (*m.precision + *m.recall) > 0.0 ? 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall) : 0.0;
    if (m.total) m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(m.total);
    return m;
  }
};

inline std::string format_rate(const std::optional<double>& x, int digits = 4) {
  return x ? format_fixed(*x, digits) : std::string("n/a");
}

inline Json metric_to_json(const MetricReport& m) {
  auto opt = [](const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); };
  Json j;
  j["precision"] = opt(m.precision);
  j["recall"] = opt(m.recall);
  j["f1"] = opt(m.f1);
  j["accuracy"] = opt(m.accuracy);
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["fn"] = m.fn;
  j["tn"] = m.tn;
  j["total"] = m.total;
  return j;
}

// ---------------------------------------------------------------------------
// Extraction scoring (exact span + category match)

struct ExtractionReport {
  std::array<MetricReport, kEntityCategoryCount> entity;
  std::array<MetricReport, kRelationCategoryCount> relation;
  MetricReport entity_micro;
  MetricReport relation_micro;
};

namespace detail {

using SpanKey = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>;  // sentence, start, end, category

inline SpanKey span_key(const EntityAnnotation& e) {
  return {e.sentence_index, e.token_start, e.token_end, index_of(e.category)};
}

using RelationKey = std::tuple<SpanKey, SpanKey, std::size_t>;

template <typename Key>
void count_matches(const std::multiset<Key>& pred, const std::multiset<Key>& gold, std::size_t& tp,
                   std::size_t& fp, std::size_t& fn) {
  std::multiset<Key> remaining = gold;
  for (const auto& k : pred) {
    auto it = remaining.find(k);
    if (it != remaining.end()) {
      ++tp;
      remaining.erase(it);
    } else {
      ++fp;
    }
  }
  fn += remaining.size();
}

}  // namespace detail

inline ExtractionReport extraction_metrics(const std::vector<Extraction>& predicted,
                                           const std::vector<Extraction>& gold) {
  std::map<std::string, const Extraction*> pred_by_id;
  for (const auto& p : predicted) pred_by_id[p.case_id] = &p;
  if (pred_by_id.size() != gold.size()) throw EvaluationError("predicted and gold extractions cover different cases");

  std::array<std::array<std::size_t, 3>, kEntityCategoryCount> ec{};
  std::array<std::array<std::size_t, 3>, kRelationCategoryCount> rc{};
  for (const auto& g : gold) {
    auto it = pred_by_id.find(g.case_id);
    if (it == pred_by_id.end()) throw EvaluationError("no prediction for case " + g.case_id);
    const Extraction& p = *it->second;
    for (auto cat : kAllEntityCategories) {
      std::multiset<detail::SpanKey> ps, gs;
      for (const auto& e : p.entities)
        if (e.category == cat) ps.insert(detail::span_key(e));
      for (const auto& e : g.entities)
        if (e.category == cat) gs.insert(detail::span_key(e));
      auto& c = ec[index_of(cat)];
      detail::count_matches(ps, gs, c[0], c[1], c[2]);
    }
    for (auto cat : kAllRelationCategories) {
      auto keys = [&](const Extraction& x) {
        std::multiset<detail::RelationKey> out;
        for (const auto& r : x.relations)
          if (r.category == cat)
            out.insert({detail::span_key(x.entities[r.head_entity]), detail::span_key(x.entities[r.component_entity]),
                        index_of(r.category)});
        return out;
      };
      auto& c = rc[index_of(cat)];
      detail::count_matches(keys(p), keys(g), c[0], c[1], c[2]);
    }
  }
  ExtractionReport rep;
  std::size_t etp = 0, efp = 0, efn = 0, rtp = 0, rfp = 0, rfn = 0;
  for (std::size_t i = 0; i < kEntityCategoryCount; ++i) {
    rep.entity[i] = MetricReport::from_counts(ec[i][0], ec[i][1], ec[i][2], 0, 0);
    etp += ec[i][0];
    efp += ec[i][1];
    efn += ec[i][2];
  }
  for (std::size_t i = 0; i < kRelationCategoryCount; ++i) {
    rep.relation[i] = MetricReport::from_counts(rc[i][0], rc[i][1], rc[i][2], 0, 0);
    rtp += rc[i][0];
    rfp += rc[i][1];
    rfn += rc[i][2];
  }
  rep.entity_micro = MetricReport::from_counts(etp, efp, efn, 0, 0);
  rep.relation_micro = MetricReport::from_counts(rtp, rfp, rfn, 0, 0);
  return rep;
}

// ---------------------------------------------------------------------------
// Detection scoring

namespace detail {

inline std::set<Direction> covering_set(Direction d) {
  switch (d) {
    case Direction::ACoversB: return {Direction::ACoversB};
    case Direction::BCoversA: return {Direction::BCoversA};
    case Direction::Mutual: return {Direction::ACoversB, Direction::BCoversA};
    case Direction::None: break;
  }
  return {};
}

inline Direction flip(Direction d) {
  if (d == Direction::ACoversB) return Direction::BCoversA;
  if (d == Direction::BCoversA) return Direction::ACoversB;
  return d;
}

}  // namespace detail

// Pair-level scoring on the redundant class. A predicted redundant pair is correct when its
// covering direction agrees with the label; for totally equivalent pairs either direction
// counts. Labelled pairs whose cases were skipped count as predicted non-redundant.
inline MetricReport detection_metrics(const std::vector<RedundancyVerdict>& verdicts,
                                      const std::vector<RedundancyLabel>& labels,
                                      const std::vector<std::string>& skipped = {}) {
  std::map<std::pair<std::string, std::string>, const RedundancyVerdict*> by_pair;
  for (const auto& v : verdicts) by_pair[{std::min(v.id_a, v.id_b), std::max(v.id_a, v.id_b)}] = &v;
  const std::set<std::string> skipped_set(skipped.begin(), skipped.end());

  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::vector<std::string> missing;
  for (const auto& l : labels) {
    auto it = by_pair.find({std::min(l.id_a, l.id_b), std::max(l.id_a, l.id_b)});
    bool pred_redundant = false, total_eq = false;
    Direction pred_dir = Direction::None;
    if (it != by_pair.end()) {
      pred_redundant = it->second->redundant;
      total_eq = it->second->totally_equivalent;
      // Express the prediction in the label's orientation.
      const bool same_order = it->second->id_a == l.id_a;
      pred_dir = same_order ? it->second->direction() : detail::flip(it->second->direction());
    } else if (!skipped_set.count(l.id_a) && !skipped_set.count(l.id_b)) {
      missing.push_back(l.id_a + "/" + l.id_b);
      continue;
    }
    bool direction_ok = false;
    if (pred_redundant && l.redundant) {
      const auto ps = detail::covering_set(pred_dir);
      const auto ls = detail::covering_set(l.direction);
      direction_ok = total_eq || std::any_of(ps.begin(), ps.end(), [&](Direction d) { return ls.count(d) > 0; });
    }
    if (pred_redundant && l.redundant && direction_ok) ++tp;
    else if (!pred_redundant && !l.redundant) ++tn;
    else {
      if (pred_redundant) ++fp;
      if (l.redundant) ++fn;
    }
  }
  if (!missing.empty()) {
    std::string msg = "no verdict for labelled pair(s):";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += " " + missing[i];
    if (missing.size() > 20) msg += " ...";
    throw EvaluationError(msg);
  }
  return MetricReport::from_counts(tp, fp, fn, tn, labels.size());
}

// ---------------------------------------------------------------------------
// Splits

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Repeated random train/test partitions of n items; repeat r uses a seed derived from (seed, r).
inline std::vector<Split> split_train_test(std::size_t n, double ratio = 0.8, std::uint64_t seed = 1,
                                           std::size_t repeats = 5) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must lie in (0, 1)");
  if (n < 5) throw ValidationError("need at least 5 cases to split");
  if (repeats == 0) throw ConfigError("repeats must be positive");
  const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  std::vector<Split> out;
  for (std::size_t r = 0; r < repeats; ++r) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(derive_seed(seed, r));
    rng.shuffle(idx);
    Split s;
    s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    out.push_back(std::move(s));
  }
  return out;
}

template <typename T>
std::vector<T> select(const std::vector<T>& items, const std::vector<std::size_t>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(items.at(i));
  return out;
}

// ---------------------------------------------------------------------------
// Ablation

struct AblationResult {
  EntityCategory dropped = EntityCategory::Component;
  MetricReport full;
  MetricReport ablated;
  std::set<std::pair<std::string, std::string>> full_redundant;
  std::set<std::pair<std::string, std::string>> ablated_redundant;

  std::optional<double> delta(std::optional<double> MetricReport::*field) const {
    if (!(ablated.*field) || !(full.*field)) return std::nullopt;
    return *(ablated.*field) - *(full.*field);
  }
};

inline std::set<std::pair<std::string, std::string>> redundant_pairs(const DetectionResult& r) {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& v : r.verdicts)
    if (v.redundant) out.emplace(v.id_a, v.id_b);
  return out;
}

// Re-runs detection with one slot excluded from tuple comparison.
inline AblationResult ablate(const std::vector<CaseTuples>& cases, EntityCategory drop, const EmbeddingStore& store,
                             const ComparisonConfig& config, const std::vector<RedundancyLabel>& labels) {
  AblationResult out;
  out.dropped = drop;
  const auto full = detect_redundancy(cases, store, config);
  ComparisonConfig ablated_config = config;
  ablated_config.excluded[index_of(drop)] = true;
  const auto ablated = detect_redundancy(cases, store, ablated_config);
  out.full = detection_metrics(full.verdicts, labels, full.skipped);
  out.ablated = detection_metrics(ablated.verdicts, labels, ablated.skipped);
  out.full_redundant = redundant_pairs(full);
  out.ablated_redundant = redundant_pairs(ablated);
  return out;
}

inline std::string ablation_header() {
  return "variant          precision  recall     f1         accuracy   d_precision  d_recall   d_f1";
}

// One row shaped like the per-category ablation table: "Tscope-<Category>" metrics and deltas.
inline std::string ablation_row(const AblationResult& r) {
  auto signed_rate = [](const std::optional<double>& x) {
    if (!x) return std::string("n/a");
    return (*x >= 0 ? "+" : "") + format_fixed(*x);
  };
  std::ostringstream os;
  os << std::left << std::setw(16) << ("-" + std::string(to_string(r.dropped))) << ' ' << std::setw(10)
     << format_rate(r.ablated.precision) << ' ' << std::setw(10) << format_rate(r.ablated.recall) << ' '
     << std::setw(10) << format_rate(r.ablated.f1) << ' ' << std::setw(10) << format_rate(r.ablated.accuracy) << ' '
     << std::setw(12) << signed_rate(r.delta(&MetricReport::precision)) << ' ' << std::setw(10)
     << signed_rate(r.delta(&MetricReport::recall)) << ' ' << signed_rate(r.delta(&MetricReport::f1));
  return os.str();
}

}  // namespace tscope
