#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tscope/categories.hpp"
#include "tscope/extraction.hpp"
#include "tscope/preprocess.hpp"

namespace tscope {

using Phrase = Tokens;

// <Component, Behavior, Prerequisite, Manner, Constraint>; an empty optional is NULL.
// The Component slot is always set.
struct TestTuple {
  std::array<std::optional<Phrase>, kEntityCategoryCount> slots;

  TestTuple() = default;
  explicit TestTuple(Phrase component) { slots[index_of(EntityCategory::Component)] = std::move(component); }

  const std::optional<Phrase>& operator[](EntityCategory c) const { return slots[index_of(c)]; }
  std::optional<Phrase>& operator[](EntityCategory c) { return slots[index_of(c)]; }
  const Phrase& component() const { return *slots[index_of(EntityCategory::Component)]; }

  bool operator==(const TestTuple&) const = default;
};

inline std::string to_string(const TestTuple& t) {
  std::string s = "<";
  for (std::size_t i = 0; i < kEntityCategoryCount; ++i) {
    if (i) s += ", ";
    s += t.slots[i] ? "\"" + join(*t.slots[i]) + "\"" : std::string("NULL");
  }
  return s + ">";
}

struct Dissection {
  std::vector<TestTuple> tuples;
  bool flagged = false;  // no Component was extracted
};

// One tuple per (Component, associated Behavior); a Component without Behaviors yields one
// tuple with a NULL behavior. Each tuple carries the Component's Prerequisite, Manner and
// Constraint; if several compete for a slot, the highest-scoring relation wins (first listed
// on ties).
inline Dissection dissect(const Extraction& ex) {
  Dissection out;
  for (std::size_t c = 0; c < ex.entities.size(); ++c) {
    if (ex.entities[c].category != EntityCategory::Component) continue;
    TestTuple base(ex.entity_tokens(c));
    std::vector<Phrase> behaviors;
    std::array<double, kEntityCategoryCount> best_score{};
    std::array<std::size_t, kEntityCategoryCount> competing{};
    for (std::size_t r = 0; r < ex.relations.size(); ++r) {
      const auto& rel = ex.relations[r];
      if (rel.component_entity != c) continue;
      const auto head = head_for_relation(rel.category);
      const double score = r < ex.relation_scores.size() ? ex.relation_scores[r] : 1.0;
      if (head == EntityCategory::Behavior) {
        behaviors.push_back(ex.entity_tokens(rel.head_entity));
        continue;
      }
      const std::size_t slot = index_of(head);
      ++competing[slot];
      if (!base.slots[slot] || score > best_score[slot]) {
        base.slots[slot] = ex.entity_tokens(rel.head_entity);
        best_score[slot] = score;
      }
    }
    for (auto cat : {EntityCategory::Prerequisite, EntityCategory::Manner, EntityCategory::Constraint})
      if (competing[index_of(cat)] > 1)
        warn("case " + ex.case_id + ": component \"" + join(base.component()) + "\" has " +
             std::to_string(competing[index_of(cat)]) + " " + std::string(to_string(cat)) +
             " relations; keeping the highest-scoring one");
    if (behaviors.empty()) {
      out.tuples.push_back(base);
    } else {
      for (auto& b : behaviors) {
        TestTuple t = base;
        t[EntityCategory::Behavior] = std::move(b);
        out.tuples.push_back(std::move(t));
      }
    }
  }
  out.flagged = out.tuples.empty();
  if (out.flagged) warn("case " + ex.case_id + ": no Component extracted; excluded from comparison");
  return out;
}

inline Json tuple_to_json(const TestTuple& t) {
  Json j;
  for (auto c : kAllEntityCategories) {
    const auto& slot = t[c];
    j[std::string(to_string(c))] = slot ? Json(join(*slot)) : Json(nullptr);
  }
  return j;
}

inline Json tuples_to_json(const std::vector<TestTuple>& tuples) {
  Json arr = Json::array();
  for (const auto& t : tuples) arr.push_back(tuple_to_json(t));
  return arr;
}

// Annotation record extended with a "tuples" array.
inline void write_tuples(std::ostream& out, const std::vector<Extraction>& extractions) {
  for (const auto& ex : extractions) {
    Json j = extraction_to_json(ex);
    const auto d = dissect(ex);
    j["tuples"] = tuples_to_json(d.tuples);
    j["flagged"] = d.flagged;
    out << j.dump() << '\n';
  }
}

}  // namespace tscope
