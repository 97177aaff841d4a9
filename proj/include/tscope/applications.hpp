#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "tscope/compare.hpp"
#include "tscope/extraction.hpp"

namespace tscope {

// Heuristic dependence rule: B depends on A when some Component of A is equivalent
// (noun-phrase strategy) to some Manner of B. Directional.
inline bool detect_dependence(const Extraction& a, const Extraction& b, const Comparator& cmp) {
  for (std::size_t i = 0; i < a.entities.size(); ++i) {
    if (a.entities[i].category != EntityCategory::Component) continue;
    const auto component = a.entity_tokens(i);
    for (std::size_t j = 0; j < b.entities.size(); ++j) {
      if (b.entities[j].category != EntityCategory::Manner) continue;
      try {
        if (cmp.noun_phrase(component, b.entity_tokens(j)).equivalent) return true;
      } catch (const SimilarityError&) {
      }
    }
  }
  return false;
}

inline bool detect_dependence(const Extraction& a, const Extraction& b, const EmbeddingStore& store,
                              const ComparisonConfig& config) {
  return detect_dependence(a, b, Comparator(store, config));
}

struct DependenceEdge {
  std::string prerequisite_case;  // A
  std::string dependent_case;     // B, depends on A
};

inline std::vector<DependenceEdge> dependence_report(const std::vector<Extraction>& extractions,
                                                     const EmbeddingStore& store, const ComparisonConfig& config) {
  const Comparator cmp(store, config);
  std::vector<const Extraction*> sorted;
  for (const auto& e : extractions) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(), [](auto* x, auto* y) { return x->case_id < y->case_id; });
  std::vector<DependenceEdge> out;
  for (const auto* a : sorted)
    for (const auto* b : sorted) {
      if (a == b) continue;
      if (config.scope == PairScope::PerProject && a->project != b->project) continue;
      if (detect_dependence(*a, *b, cmp)) out.push_back({a->case_id, b->case_id});
    }
  return out;
}

// Connected components of cases under prerequisite equivalence (indicative-word strategy).
// Cases without Prerequisite entities are singletons. Groups are sorted by their first id.
inline std::vector<std::vector<std::string>> group_by_prerequisite(const std::vector<Extraction>& extractions,
                                                                   const EmbeddingStore& store,
                                                                   const ComparisonConfig& config) {
  const Comparator cmp(store, config);
  const std::size_t n = extractions.size();
  std::vector<std::vector<Phrase>> prereqs(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t e = 0; e < extractions[i].entities.size(); ++e)
      if (extractions[i].entities[e].category == EntityCategory::Prerequisite)
        prereqs[i].push_back(extractions[i].entity_tokens(e));

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (find(i) == find(j)) continue;
      bool linked = false;
      for (const auto& pa : prereqs[i]) {
        for (const auto& pb : prereqs[j]) {
          try {
            if (cmp.prerequisite(pa, pb).equivalent) linked = true;
          } catch (const SimilarityError&) {
          }
          if (linked) break;
        }
        if (linked) break;
      }
      if (linked) parent[find(i)] = find(j);
    }
  std::map<std::size_t, std::vector<std::string>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(extractions[i].case_id);
  std::vector<std::vector<std::string>> out;
  for (auto& [root, members] : groups) {
    std::sort(members.begin(), members.end());
    out.push_back(std::move(members));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Entity categories with no extracted entity, in category order.
inline std::vector<EntityCategory> completeness_check(const Extraction& ex) {
  std::vector<EntityCategory> absent;
  for (auto c : kAllEntityCategories) {
    const bool present =
        std::any_of(ex.entities.begin(), ex.entities.end(), [&](const EntityAnnotation& e) { return e.category == c; });
    if (!present) absent.push_back(c);
  }
  return absent;
}

}  // namespace tscope
