#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tscope/categories.hpp"
#include "tscope/errors.hpp"
#include "tscope/preprocess.hpp"

namespace tscope {

using Json = nlohmann::ordered_json;

inline constexpr std::size_t kMaxSpanLength = 10;

struct TestCase {
  std::string id;
  std::string project;
  std::string summary;

  bool operator==(const TestCase&) const = default;
};

inline TokenizedCase assemble_sequence(const TestCase& tc) { return assemble_sequence(tc.summary); }

struct EntityAnnotation {
  std::size_t sentence_index = 0;
  std::size_t token_start = 0;
  std::size_t token_end = 0;  // inclusive
  EntityCategory category = EntityCategory::Component;

  std::size_t length() const { return token_end - token_start + 1; }
  bool same_span(const EntityAnnotation& o) const {
    return sentence_index == o.sentence_index && token_start == o.token_start && token_end == o.token_end;
  }
  bool overlaps(const EntityAnnotation& o) const {
    return sentence_index == o.sentence_index && token_start <= o.token_end && o.token_start <= token_end;
  }
  bool operator==(const EntityAnnotation&) const = default;
};

struct RelationAnnotation {
  std::size_t head_entity = 0;       // index of the non-Component entity
  std::size_t component_entity = 0;  // index of the Component entity
  RelationCategory category = RelationCategory::Act;

  bool operator==(const RelationAnnotation&) const = default;
};

enum class Direction { ACoversB, BCoversA, Mutual, None };

constexpr std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::ACoversB: return "a_covers_b";
    case Direction::BCoversA: return "b_covers_a";
    case Direction::Mutual: return "mutual";
    case Direction::None: return "none";
  }
  return "none";
}

inline std::optional<Direction> parse_direction(std::string_view s) {
  for (auto d : {Direction::ACoversB, Direction::BCoversA, Direction::Mutual, Direction::None})
    if (to_string(d) == s) return d;
  return std::nullopt;
}

inline Direction direction_of(bool a_covers_b, bool b_covers_a) {
  if (a_covers_b && b_covers_a) return Direction::Mutual;
  if (a_covers_b) return Direction::ACoversB;
  if (b_covers_a) return Direction::BCoversA;
  return Direction::None;
}

struct RedundancyLabel {
  std::string id_a;
  std::string id_b;
  bool redundant = false;
  Direction direction = Direction::None;

  bool operator==(const RedundancyLabel&) const = default;
};

struct Corpus {
  std::vector<TestCase> cases;

  std::size_t size() const { return cases.size(); }
  bool empty() const { return cases.empty(); }

  const TestCase* find(std::string_view id) const {
    for (const auto& c : cases)
      if (c.id == id) return &c;
    return nullptr;
  }
};

// A test case with its tokenization and gold (or imported) annotations.
struct AnnotatedCase {
  TestCase test_case;
  TokenizedCase tokens;
  std::vector<EntityAnnotation> entities;
  std::vector<RelationAnnotation> relations;

  Tokens entity_tokens(std::size_t i) const {
    const auto& e = entities.at(i);
    const auto& s = tokens.sentences.at(e.sentence_index);
    return Tokens(s.begin() + static_cast<std::ptrdiff_t>(e.token_start),
                  s.begin() + static_cast<std::ptrdiff_t>(e.token_end) + 1);
  }
};

using AnnotatedCorpus = std::vector<AnnotatedCase>;

inline Corpus corpus_of(const AnnotatedCorpus& annotated) {
  Corpus c;
  for (const auto& a : annotated) c.cases.push_back(a.test_case);
  return c;
}

// ---------------------------------------------------------------------------
// Validation

inline void validate_corpus(const Corpus& corpus) {
  std::set<std::string> seen;
  for (const auto& tc : corpus.cases) {
    if (tc.id.empty()) throw ValidationError("test case with empty id");
    if (tc.summary.empty()) throw ValidationError("test case " + tc.id + " has an empty summary");
    if (!seen.insert(tc.id).second) throw ValidationError("duplicate test case id \"" + tc.id + "\"");
  }
}

inline void validate_entity(const EntityAnnotation& e, const TokenizedCase& tokens, const std::string& id,
                            std::size_t max_span = kMaxSpanLength) {
  const std::string where = "case " + id + ": ";
  if (e.sentence_index >= tokens.sentences.size())
    throw ValidationError(where + "entity sentence_index " + std::to_string(e.sentence_index) + " out of range");
  if (e.token_start > e.token_end) throw ValidationError(where + "entity token_start > token_end");
  if (e.token_end >= tokens.sentences[e.sentence_index].size())
    throw ValidationError(where + "entity span [" + std::to_string(e.token_start) + "," +
                          std::to_string(e.token_end) + "] exceeds sentence length");
  if (e.length() > max_span)
    throw ValidationError(where + "entity span longer than " + std::to_string(max_span) + " tokens");
}

inline void validate_relations(const std::vector<EntityAnnotation>& entities,
                               const std::vector<RelationAnnotation>& relations, const std::string& id) {
  const std::string where = "case " + id + ": ";
  for (const auto& r : relations) {
    if (r.head_entity >= entities.size() || r.component_entity >= entities.size())
      throw ValidationError(where + "relation references an unknown entity index");
    const auto head = entities[r.head_entity].category;
    const auto tail = entities[r.component_entity].category;
    if (tail != EntityCategory::Component)
      throw ValidationError(where + "relation target is " + std::string(to_string(tail)) + ", not Component");
    if (!compatible(r.category, head, tail))
      throw ValidationError(where + "relation " + std::string(to_string(r.category)) + " is incompatible with head " +
                            std::string(to_string(head)));
  }
}

inline void validate_annotations(const AnnotatedCase& ac, std::size_t max_span = kMaxSpanLength) {
  for (const auto& e : ac.entities) validate_entity(e, ac.tokens, ac.test_case.id, max_span);
  validate_relations(ac.entities, ac.relations, ac.test_case.id);
}

// ---------------------------------------------------------------------------
// Line-delimited JSON helpers

namespace detail {

template <typename Fn>
void for_each_json_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("malformed record: ") + e.what(), lineno);
    }
    if (!j.is_object()) throw ParseError("record is not an object", lineno);
    fn(j, lineno);
  }
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path);
  return out;
}

inline std::string require_string(const Json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) throw ParseError(std::string("missing string field \"") + key + "\"", line);
  return it->get<std::string>();
}

inline std::size_t require_index(const Json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer() || it->get<long long>() < 0)
    throw ParseError(std::string("missing non-negative integer field \"") + key + "\"", line);
  return it->get<std::size_t>();
}

inline bool require_bool(const Json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_boolean()) throw ParseError(std::string("missing boolean field \"") + key + "\"", line);
  return it->get<bool>();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Corpus file: one {"id", "project", "summary"} object per line.

inline Corpus read_corpus(std::istream& in) {
  Corpus corpus;
  detail::for_each_json_line(in, [&](const Json& j, std::size_t line) {
    TestCase tc{detail::require_string(j, "id", line), detail::require_string(j, "project", line),
                detail::require_string(j, "summary", line)};
    if (tc.id.empty()) throw ParseError("empty id", line);
    if (tc.summary.empty()) throw ParseError("empty summary", line);
    corpus.cases.push_back(std::move(tc));
  });
  if (corpus.empty()) warn("corpus is empty");
  validate_corpus(corpus);
  return corpus;
}

inline Corpus load_corpus(const std::string& path) {
  auto in = detail::open_input(path);
  return read_corpus(in);
}

inline void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& tc : corpus.cases) {
    Json j;
    j["id"] = tc.id;
    j["project"] = tc.project;
    j["summary"] = tc.summary;
    out << j.dump() << '\n';
  }
}

inline void write_corpus(const std::string& path, const Corpus& corpus) {
  auto out = detail::open_output(path);
  write_corpus(out, corpus);
}

// ---------------------------------------------------------------------------
// Annotation file: one {"id", "entities": [...], "relations": [...]} object per line.
// Extra keys (e.g. "tuples") are ignored on read.

struct AnnotationRecord {
  std::string id;
  std::vector<EntityAnnotation> entities;
  std::vector<RelationAnnotation> relations;
  // Optional per-item confidence ("score" keys); empty when the file carries none.
  std::vector<double> entity_scores;
  std::vector<double> relation_scores;
  std::size_t line = 0;
};

namespace detail {
inline void read_score(const Json& item, std::vector<double>& scores, std::size_t index, std::size_t line) {
  auto it = item.find("score");
  if (it == item.end()) {
    if (!scores.empty()) throw ParseError("\"score\" present on some items but not others", line);
    return;
  }
  if (!it->is_number()) throw ParseError("\"score\" is not a number", line);
  if (scores.size() != index) throw ParseError("\"score\" present on some items but not others", line);
  scores.push_back(it->get<double>());
}
}  // namespace detail

inline Json entities_to_json(const std::vector<EntityAnnotation>& entities) {
  Json arr = Json::array();
  for (const auto& e : entities) {
    Json je;
    je["sentence_index"] = e.sentence_index;
    je["token_start"] = e.token_start;
    je["token_end"] = e.token_end;
    je["category"] = to_string(e.category);
    arr.push_back(std::move(je));
  }
  return arr;
}

inline Json relations_to_json(const std::vector<RelationAnnotation>& relations) {
  Json arr = Json::array();
  for (const auto& r : relations) {
    Json jr;
    jr["head"] = r.head_entity;
    jr["component"] = r.component_entity;
    jr["category"] = to_string(r.category);
    arr.push_back(std::move(jr));
  }
  return arr;
}

inline std::vector<AnnotationRecord> read_annotation_records(std::istream& in) {
  std::vector<AnnotationRecord> records;
  detail::for_each_json_line(in, [&](const Json& j, std::size_t line) {
    AnnotationRecord rec;
    rec.id = detail::require_string(j, "id", line);
    rec.line = line;
    if (auto it = j.find("entities"); it != j.end()) {
      if (!it->is_array()) throw ParseError("\"entities\" is not an array", line);
      for (const auto& je : *it) {
        EntityAnnotation e;
        e.sentence_index = detail::require_index(je, "sentence_index", line);
        e.token_start = detail::require_index(je, "token_start", line);
        e.token_end = detail::require_index(je, "token_end", line);
        auto cat = parse_entity_category(detail::require_string(je, "category", line));
        if (!cat) throw ParseError("unknown entity category", line);
        e.category = *cat;
        detail::read_score(je, rec.entity_scores, rec.entities.size(), line);
        rec.entities.push_back(e);
      }
    }
    if (auto it = j.find("relations"); it != j.end()) {
      if (!it->is_array()) throw ParseError("\"relations\" is not an array", line);
      for (const auto& jr : *it) {
        RelationAnnotation r;
        r.head_entity = detail::require_index(jr, "head", line);
        r.component_entity = detail::require_index(jr, "component", line);
        auto cat = parse_relation_category(detail::require_string(jr, "category", line));
        if (!cat) throw ParseError("unknown relation category", line);
        r.category = *cat;
        detail::read_score(jr, rec.relation_scores, rec.relations.size(), line);
        rec.relations.push_back(r);
      }
    }
    records.push_back(std::move(rec));
  });
  return records;
}

// Attaches annotation records to a corpus. Cases without a record get no annotations.
inline AnnotatedCorpus attach_annotations(const std::vector<AnnotationRecord>& records, const Corpus& corpus,
                                          std::size_t max_span = kMaxSpanLength) {
  AnnotatedCorpus out;
  std::map<std::string, std::size_t> index;
  for (const auto& tc : corpus.cases) {
    index.emplace(tc.id, out.size());
    out.push_back(AnnotatedCase{tc, assemble_sequence(tc), {}, {}});
  }
  std::set<std::string> seen;
  for (const auto& rec : records) {
    auto it = index.find(rec.id);
    if (it == index.end()) throw ValidationError("annotation references unknown test case \"" + rec.id + "\"");
    if (!seen.insert(rec.id).second) throw ValidationError("duplicate annotation record for \"" + rec.id + "\"");
    auto& ac = out[it->second];
    ac.entities = rec.entities;
    ac.relations = rec.relations;
    validate_annotations(ac, max_span);
  }
  return out;
}

inline AnnotatedCorpus load_annotations(const std::string& path, const Corpus& corpus,
                                        std::size_t max_span = kMaxSpanLength) {
  auto in = detail::open_input(path);
  return attach_annotations(read_annotation_records(in), corpus, max_span);
}

inline Json annotation_to_json(const std::string& id, const std::vector<EntityAnnotation>& entities,
                               const std::vector<RelationAnnotation>& relations) {
  Json j;
  j["id"] = id;
  j["entities"] = entities_to_json(entities);
  j["relations"] = relations_to_json(relations);
  return j;
}

inline void write_annotations(std::ostream& out, const AnnotatedCorpus& corpus) {
  for (const auto& ac : corpus) out << annotation_to_json(ac.test_case.id, ac.entities, ac.relations).dump() << '\n';
}

inline void write_annotations(const std::string& path, const AnnotatedCorpus& corpus) {
  auto out = detail::open_output(path);
  write_annotations(out, corpus);
}

// ---------------------------------------------------------------------------
// Label file: one {"id_a", "id_b", "redundant", "direction"} object per line.

inline void validate_label(const RedundancyLabel& l) {
  if (l.id_a == l.id_b) throw ValidationError("label pairs \"" + l.id_a + "\" with itself");
  if ((l.direction == Direction::None) == l.redundant)
    throw ValidationError("label " + l.id_a + "/" + l.id_b + ": direction must be none iff not redundant");
}

inline std::vector<RedundancyLabel> read_labels(std::istream& in) {
  std::vector<RedundancyLabel> labels;
  detail::for_each_json_line(in, [&](const Json& j, std::size_t line) {
    RedundancyLabel l;
    l.id_a = detail::require_string(j, "id_a", line);
    l.id_b = detail::require_string(j, "id_b", line);
    l.redundant = detail::require_bool(j, "redundant", line);
    auto d = parse_direction(detail::require_string(j, "direction", line));
    if (!d) throw ParseError("unknown direction", line);
    l.direction = *d;
    try {
      validate_label(l);
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(e.what()) + " (line " + std::to_string(line) + ")");
    }
    labels.push_back(std::move(l));
  });
  return labels;
}

inline std::vector<RedundancyLabel> load_labels(const std::string& path) {
  auto in = detail::open_input(path);
  return read_labels(in);
}

inline void write_labels(std::ostream& out, const std::vector<RedundancyLabel>& labels) {
  for (const auto& l : labels) {
    Json j;
    j["id_a"] = l.id_a;
    j["id_b"] = l.id_b;
    j["redundant"] = l.redundant;
    j["direction"] = to_string(l.direction);
    out << j.dump() << '\n';
  }
}

inline void write_labels(const std::string& path, const std::vector<RedundancyLabel>& labels) {
  auto out = detail::open_output(path);
  write_labels(out, labels);
}

}  // namespace tscope
