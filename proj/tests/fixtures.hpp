#pragma once

#include <map>
#include <string>
#include <vector>

#include "tscope/compare.hpp"
#include "tscope/corpus.hpp"
#include "tscope/extraction.hpp"

namespace testutil {

inline std::string worked_dir() { return std::string(TSCOPE_DATA_DIR) + "/worked_examples"; }

inline tscope::AnnotatedCorpus worked_examples() {
  const auto corpus = tscope::load_corpus(worked_dir() + "/corpus.jsonl");
  return tscope::load_annotations(worked_dir() + "/annotations.jsonl", corpus);
}

inline std::map<std::string, tscope::Extraction> worked_extractions() {
  std::map<std::string, tscope::Extraction> out;
  for (auto& ex : tscope::gold_extractions(worked_examples())) out.emplace(ex.case_id, ex);
  return out;
}

struct Ent {
  std::size_t start, end;
  tscope::EntityCategory category;
  std::size_t sentence = 0;
};

struct Rel {
  std::size_t head, component;
  tscope::RelationCategory category;
  double score = 1.0;
};

// Hand-built extraction over `summary`; spans index the tokenized sentences.
inline tscope::Extraction make_extraction(const std::string& id, const std::string& summary,
                                          const std::vector<Ent>& entities, const std::vector<Rel>& relations,
                                          const std::string& project = "P") {
  tscope::Extraction ex;
  ex.case_id = id;
  ex.project = project;
  ex.tokens = tscope::assemble_sequence(summary);
  for (const auto& e : entities) {
    ex.entities.push_back({e.sentence, e.start, e.end, e.category});
    ex.entity_scores.push_back(1.0);
  }
  for (const auto& r : relations) {
    ex.relations.push_back({r.head, r.component, r.category});
    ex.relation_scores.push_back(r.score);
  }
  return ex;
}

inline tscope::TestTuple tuple_of(const std::string& component, const std::string& behavior = "",
                                  const std::string& prerequisite = "", const std::string& manner = "",
                                  const std::string& constraint = "") {
  using tscope::EntityCategory;
  tscope::TestTuple t(tscope::normalize_tokens(component));
  auto put = [&](EntityCategory c, const std::string& s) {
    if (!s.empty()) t[c] = tscope::normalize_tokens(s);
  };
  put(EntityCategory::Behavior, behavior);
  put(EntityCategory::Prerequisite, prerequisite);
  put(EntityCategory::Manner, manner);
  put(EntityCategory::Constraint, constraint);
  return t;
}

}  // namespace testutil
