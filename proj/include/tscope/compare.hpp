#pragma once

#include <algorithm>
#include <array>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "tscope/categories.hpp"
#include "tscope/embeddings.hpp"
#include "tscope/errors.hpp"
#include "tscope/extraction.hpp"
#include "tscope/tuples.hpp"

namespace tscope {

// Closed word lists whose mismatch alone separates two Prerequisites.
struct IndicativeLexicon {
  std::set<std::string> logic_words;
  std::set<std::string> temporal_words;

  bool contains(const std::string& w) const { return logic_words.count(w) || temporal_words.count(w); }

  void validate() const {
    if (logic_words.empty() || temporal_words.empty()) throw ConfigError("indicative word lists must be non-empty");
    for (const auto& w : logic_words)
      if (temporal_words.count(w)) throw ConfigError("indicative word \"" + w + "\" is both logic and temporal");
  }
};

inline IndicativeLexicon default_lexicon() {
  return {{"no", "not", "without", "non", "cannot", "unable", "disabled"},
          {"before", "after", "when", "while", "during", "until"}};
}

inline IndicativeLexicon lexicon_from_json(const Json& j) {
  IndicativeLexicon lex;
  try {
    for (const auto& w : j.at("logic")) lex.logic_words.insert(w.get<std::string>());
    for (const auto& w : j.at("temporal")) lex.temporal_words.insert(w.get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad lexicon: ") + e.what());
  }
  lex.validate();
  return lex;
}

inline IndicativeLexicon load_lexicon(const std::string& path) {
  auto in = detail::open_input(path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("bad lexicon file: ") + e.what());
  }
  return lexicon_from_json(j);
}

enum class PairScope { PerProject, Global };

struct ComparisonConfig {
  double threshold = 0.95;
  IndicativeLexicon lexicon = default_lexicon();
  SifContext sif;
  PairScope scope = PairScope::PerProject;
  // Slots left out of tuple comparison (ablation); excluded slots always match.
  std::array<bool, kEntityCategoryCount> excluded{};

  void validate() const {
    if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("threshold must lie in (0, 1]");
    lexicon.validate();
  }
};

struct SlotComparison {
  bool equivalent = false;
  double score = 0.0;
};

// Lexicon hits in order of appearance.
inline Tokens indicative_words(const Phrase& p, const IndicativeLexicon& lex) {
  Tokens out;
  for (const auto& w : p)
    if (lex.contains(w)) out.push_back(w);
  return out;
}

inline bool same_indicative_multiset(const Phrase& a, const Phrase& b, const IndicativeLexicon& lex) {
  auto wa = indicative_words(a, lex);
  auto wb = indicative_words(b, lex);
  std::sort(wa.begin(), wa.end());
  std::sort(wb.begin(), wb.end());
  return wa == wb;
}

struct SlotReason {
  EntityCategory slot = EntityCategory::Component;
  std::optional<Phrase> value_a;
  std::optional<Phrase> value_b;
  std::optional<double> similarity;
  std::string note;  // null-mismatch | below-threshold | indicative-words | unembeddable
};

struct TupleMatch {
  bool equivalent = true;
  std::vector<SlotReason> reasons;
};

// Slot and tuple comparison with per-phrase vector caching. Not thread-safe.
class Comparator {
 public:
  Comparator(const EmbeddingStore& store, const ComparisonConfig& config) : store_(store), config_(config) {
    config_.validate();
  }

  const ComparisonConfig& config() const { return config_; }

  // Strategy 1: phrase average + cosine, equivalent iff score > threshold.
  SlotComparison behavior(const Phrase& a, const Phrase& b) const {
    if (a == b) return {true, 1.0};
    const double s = cosine(average(a), average(b));
    return {s > config_.threshold, s};
  }

  // Strategy 2: SIF phrase vectors + cosine. Falls back to Strategy 1 without a fitted component.
  SlotComparison noun_phrase(const Phrase& a, const Phrase& b) const {
    if (a == b) return {true, 1.0};
    if (!config_.sif.removes_component()) {
      if (!warned_sif_) {
        warn("SIF context is degenerate; noun-phrase slots use plain averaging");
        warned_sif_ = true;
      }
      return behavior(a, b);
    }
    const double s = cosine(sif(a), sif(b));
    return {s > config_.threshold, s};
  }

  // Strategy 3: indicative-word multisets must agree, then Strategy 1.
  SlotComparison prerequisite(const Phrase& a, const Phrase& b) const {
    if (a == b) return {true, 1.0};
    if (!same_indicative_multiset(a, b, config_.lexicon)) return {false, 0.0};
    return behavior(a, b);
  }

  SlotComparison slot(EntityCategory c, const Phrase& a, const Phrase& b) const {
    switch (c) {
      case EntityCategory::Behavior: return behavior(a, b);
      case EntityCategory::Prerequisite: return prerequisite(a, b);
      default: return noun_phrase(a, b);
    }
  }

  // Compares all five slots; NULL matches only NULL. Every failing slot is reported.
  TupleMatch tuple(const TestTuple& ta, const TestTuple& tb) const {
    TupleMatch m;
    for (auto c : kAllEntityCategories) {
      if (config_.excluded[index_of(c)]) continue;
      const auto& va = ta[c];
      const auto& vb = tb[c];
      if (!va && !vb) continue;
      if (!va || !vb) {
        m.equivalent = false;
        m.reasons.push_back({c, va, vb, std::nullopt, "null-mismatch"});
        continue;
      }
      try {
        const auto r = slot(c, *va, *vb);
        if (!r.equivalent) {
          m.equivalent = false;
          const bool indicative = c == EntityCategory::Prerequisite && r.score == 0.0 &&
                                  !same_indicative_multiset(*va, *vb, config_.lexicon);
          m.reasons.push_back({c, va, vb, r.score, indicative ? "indicative-words" : "below-threshold"});
        }
      } catch (const SimilarityError&) {
        m.equivalent = false;
        m.reasons.push_back({c, va, vb, std::nullopt, "unembeddable"});
      }
    }
    return m;
  }

  // Tuple Covering Rule: every tuple of `b` has an equivalent tuple in `a`.
  bool covers(const std::vector<TestTuple>& a, const std::vector<TestTuple>& b) const {
    if (a.empty() || b.empty()) throw CoverageError("coverage is undefined for a case without tuples");
    return std::all_of(b.begin(), b.end(), [&](const TestTuple& tb) {
      return std::any_of(a.begin(), a.end(), [&](const TestTuple& ta) { return tuple(ta, tb).equivalent; });
    });
  }

  Vector average(const Phrase& p) const {
    const auto key = join(p);
    auto it = avg_cache_.find(key);
    if (it == avg_cache_.end()) it = avg_cache_.emplace(key, embed_phrase_average(p, store_)).first;
    return it->second;
  }

  Vector sif(const Phrase& p) const {
    const auto key = join(p);
    auto it = sif_cache_.find(key);
    if (it == sif_cache_.end()) it = sif_cache_.emplace(key, embed_phrase_sif(p, store_, config_.sif)).first;
    return it->second;
  }

 private:
  const EmbeddingStore& store_;
  ComparisonConfig config_;
  mutable std::unordered_map<std::string, Vector> avg_cache_;
  mutable std::unordered_map<std::string, Vector> sif_cache_;
  mutable bool warned_sif_ = false;
};

inline SlotComparison compare_behavior(const Phrase& a, const Phrase& b, const EmbeddingStore& store,
                                       const ComparisonConfig& config) {
  return Comparator(store, config).behavior(a, b);
}

inline SlotComparison compare_nounphrase(const Phrase& a, const Phrase& b, const EmbeddingStore& store,
                                         const ComparisonConfig& config) {
  return Comparator(store, config).noun_phrase(a, b);
}

inline SlotComparison compare_prerequisite(const Phrase& a, const Phrase& b, const EmbeddingStore& store,
                                           const ComparisonConfig& config) {
  return Comparator(store, config).prerequisite(a, b);
}

inline TupleMatch tuple_equivalent(const TestTuple& a, const TestTuple& b, const EmbeddingStore& store,
                                   const ComparisonConfig& config) {
  return Comparator(store, config).tuple(a, b);
}

inline bool covers(const std::vector<TestTuple>& a, const std::vector<TestTuple>& b, const EmbeddingStore& store,
                   const ComparisonConfig& config) {
  return Comparator(store, config).covers(a, b);
}

// Fits the SIF component over every Component, Manner and Constraint phrase in the tuples.
inline SifContext fit_sif_for_tuples(const std::vector<std::vector<TestTuple>>& tuple_sets,
                                     const EmbeddingStore& store, double a = kDefaultSifA) {
  std::vector<Phrase> phrases;
  for (const auto& set : tuple_sets)
    for (const auto& t : set)
      for (auto c : {EntityCategory::Component, EntityCategory::Manner, EntityCategory::Constraint})
        if (t[c]) phrases.push_back(*t[c]);
  return fit_sif(phrases, store, a);
}

// ---------------------------------------------------------------------------
// Redundancy detection

struct CaseTuples {
  std::string id;
  std::string project;
  std::vector<TestTuple> tuples;
  bool flagged = false;
};

inline CaseTuples case_tuples(const Extraction& ex) {
  auto d = dissect(ex);
  return {ex.case_id, ex.project, std::move(d.tuples), d.flagged};
}

inline std::vector<CaseTuples> case_tuples(const std::vector<Extraction>& extractions) {
  std::vector<CaseTuples> out;
  out.reserve(extractions.size());
  for (const auto& ex : extractions) out.push_back(case_tuples(ex));
  return out;
}

struct VerdictReason {
  Direction check = Direction::ACoversB;  // the covering direction that failed
  std::size_t tuple_index = 0;            // uncovered tuple on the covered side
  SlotReason slot;
};

struct RedundancyVerdict {
  std::string id_a;
  std::string id_b;
  bool a_covers_b = false;
  bool b_covers_a = false;
  bool redundant = false;
  bool totally_equivalent = false;
  std::vector<VerdictReason> reasons;

  Direction direction() const { return direction_of(a_covers_b, b_covers_a); }
};

struct DetectionResult {
  std::vector<RedundancyVerdict> verdicts;
  std::vector<std::string> skipped;  // cases without tuples
};

inline bool in_scope(const CaseTuples& a, const CaseTuples& b, PairScope scope) {
  return scope == PairScope::Global || a.project == b.project;
}

// Judges one pair. `a` must sort before `b`.
inline RedundancyVerdict judge_pair(const CaseTuples& a, const CaseTuples& b, const Comparator& cmp) {
  RedundancyVerdict v;
  v.id_a = a.id;
  v.id_b = b.id;
  const std::size_t na = a.tuples.size(), nb = b.tuples.size();
  std::vector<TupleMatch> m(na * nb);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j) m[i * nb + j] = cmp.tuple(a.tuples[i], b.tuples[j]);

  // Reasons for an uncovered tuple come from the closest candidate (fewest failing slots).
  auto check = [&](bool a_side_covers) {
    const std::size_t n_cov = a_side_covers ? nb : na;
    const std::size_t n_src = a_side_covers ? na : nb;
    bool all = true;
    for (std::size_t t = 0; t < n_cov; ++t) {
      const TupleMatch* best = nullptr;
      bool found = false;
      for (std::size_t s = 0; s < n_src && !found; ++s) {
        const auto& tm = a_side_covers ? m[s * nb + t] : m[t * nb + s];
        if (tm.equivalent) found = true;
        else if (!best || tm.reasons.size() < best->reasons.size()) best = &tm;
      }
      if (found) continue;
      all = false;
      for (const auto& r : best->reasons) {
        VerdictReason vr{a_side_covers ? Direction::ACoversB : Direction::BCoversA, t, r};
        v.reasons.push_back(std::move(vr));
      }
    }
    return all;
  };
  v.a_covers_b = check(true);
  v.b_covers_a = check(false);
  v.redundant = v.a_covers_b || v.b_covers_a;
  v.totally_equivalent = v.a_covers_b && v.b_covers_a && na == nb;
  return v;
}

// Compares every in-scope pair of dissected cases, in lexicographic id order.
inline DetectionResult detect_redundancy(std::vector<CaseTuples> cases, const EmbeddingStore& store,
                                         const ComparisonConfig& config) {
  DetectionResult out;
  std::sort(cases.begin(), cases.end(), [](const CaseTuples& x, const CaseTuples& y) { return x.id < y.id; });
  std::vector<const CaseTuples*> active;
  for (const auto& c : cases) {
    if (c.flagged || c.tuples.empty()) out.skipped.push_back(c.id);
    else active.push_back(&c);
  }
  const Comparator cmp(store, config);
  for (std::size_t i = 0; i < active.size(); ++i)
    for (std::size_t j = i + 1; j < active.size(); ++j)
      if (in_scope(*active[i], *active[j], config.scope)) out.verdicts.push_back(judge_pair(*active[i], *active[j], cmp));
  return out;
}

inline DetectionResult detect_redundancy(const std::vector<Extraction>& extractions, const EmbeddingStore& store,
                                         const ComparisonConfig& config) {
  return detect_redundancy(case_tuples(extractions), store, config);
}

// ---------------------------------------------------------------------------
// Output

inline Json phrase_json(const std::optional<Phrase>& p) { return p ? Json(join(*p)) : Json(nullptr); }

inline Json verdict_to_json(const RedundancyVerdict& v) {
  Json j;
  j["id_a"] = v.id_a;
  j["id_b"] = v.id_b;
  j["redundant"] = v.redundant;
  j["direction"] = to_string(v.direction());
  j["totally_equivalent"] = v.totally_equivalent;
  Json reasons = Json::array();
  for (const auto& r : v.reasons) {
    Json jr;
    jr["check"] = to_string(r.check);
    jr["tuple"] = r.tuple_index;
    jr["slot"] = to_string(r.slot.slot);
    jr["value_a"] = phrase_json(r.slot.value_a);
    jr["value_b"] = phrase_json(r.slot.value_b);
    jr["similarity"] = r.slot.similarity ? Json(*r.slot.similarity) : Json(nullptr);
    jr["note"] = r.slot.note;
    reasons.push_back(std::move(jr));
  }
  j["reasons"] = std::move(reasons);
  return j;
}

inline void write_verdicts(std::ostream& out, const std::vector<RedundancyVerdict>& verdicts) {
  for (const auto& v : verdicts) out << verdict_to_json(v).dump() << '\n';
}

inline void write_verdicts(const std::string& path, const std::vector<RedundancyVerdict>& verdicts) {
  auto out = detail::open_output(path);
  write_verdicts(out, verdicts);
}

inline std::optional<Phrase> phrase_from_json(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return normalize_tokens(j.get<std::string>());
}

inline std::vector<RedundancyVerdict> read_verdicts(std::istream& in) {
  std::vector<RedundancyVerdict> out;
  detail::for_each_json_line(in, [&](const Json& j, std::size_t line) {
    RedundancyVerdict v;
    v.id_a = detail::require_string(j, "id_a", line);
    v.id_b = detail::require_string(j, "id_b", line);
    v.redundant = detail::require_bool(j, "redundant", line);
    auto d = parse_direction(detail::require_string(j, "direction", line));
    if (!d) throw ParseError("unknown direction", line);
    v.a_covers_b = *d == Direction::ACoversB || *d == Direction::Mutual;
    v.b_covers_a = *d == Direction::BCoversA || *d == Direction::Mutual;
    if (v.redundant != (v.a_covers_b || v.b_covers_a)) throw ParseError("redundant flag disagrees with direction", line);
    v.totally_equivalent = j.value("totally_equivalent", false);
    if (auto it = j.find("reasons"); it != j.end() && it->is_array()) {
      for (const auto& jr : *it) {
        VerdictReason r;
        auto check = parse_direction(jr.value("check", "a_covers_b"));
        r.check = check.value_or(Direction::ACoversB);
        r.tuple_index = jr.value("tuple", std::size_t{0});
        auto slot = parse_entity_category(jr.value("slot", ""));
        if (!slot) throw ParseError("unknown slot in reason", line);
        r.slot.slot = *slot;
        r.slot.value_a = phrase_from_json(jr.value("value_a", Json(nullptr)));
        r.slot.value_b = phrase_from_json(jr.value("value_b", Json(nullptr)));
        if (auto s = jr.find("similarity"); s != jr.end() && s->is_number()) r.slot.similarity = s->get<double>();
        r.slot.note = jr.value("note", "");
        v.reasons.push_back(std::move(r));
      }
    }
    out.push_back(std::move(v));
  });
  return out;
}

inline std::vector<RedundancyVerdict> load_verdicts(const std::string& path) {
  auto in = detail::open_input(path);
  return read_verdicts(in);
}

inline std::string format_fixed(double x, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << x;
  return os.str();
}

// Human-readable report with one reason table per non-redundant pair.
inline void write_report(std::ostream& out, const std::vector<RedundancyVerdict>& verdicts,
                         const std::vector<std::string>& skipped = {}) {
  std::size_t redundant = 0, total_eq = 0;
  for (const auto& v : verdicts) {
    redundant += v.redundant;
    total_eq += v.totally_equivalent;
  }
  out << "Redundancy report\n";
  out << "pairs compared: " << verdicts.size() << "\n";
  out << "redundant pairs: " << redundant << " (totally equivalent: " << total_eq << ")\n";
  out << "skipped cases: " << skipped.size() << "\n";
  for (const auto& s : skipped) out << "  skipped " << s << " (no tuples)\n";
  out << "\n";
  for (const auto& v : verdicts) {
    out << v.id_a << " vs " << v.id_b << ": " << (v.redundant ? "REDUNDANT" : "non-redundant") << " ["
        << to_string(v.direction()) << (v.totally_equivalent ? ", totally equivalent" : "") << "]\n";
    if (v.reasons.empty()) continue;
    out << "  check        tuple  slot          value_a                         value_b                         "
           "similarity  note\n";
    for (const auto& r : v.reasons) {
      auto cell = [](const std::optional<Phrase>& p) { return p ? join(*p) : std::string("NULL"); };
      out << "  " << std::left << std::setw(12) << to_string(r.check) << ' ' << std::setw(6) << r.tuple_index << ' '
          << std::setw(13) << to_string(r.slot.slot) << ' ' << std::setw(31) << cell(r.slot.value_a) << ' '
          << std::setw(31) << cell(r.slot.value_b) << ' ' << std::setw(11)
          << (r.slot.similarity ? format_fixed(*r.slot.similarity) : std::string("-")) << ' ' << r.slot.note << "\n";
    }
  }
}

}  // namespace tscope
