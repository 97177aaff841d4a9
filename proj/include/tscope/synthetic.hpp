#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tscope/categories.hpp"
#include "tscope/corpus.hpp"
#include "tscope/embeddings.hpp"
#include "tscope/errors.hpp"
#include "tscope/random.hpp"

namespace tscope {

// Slot-filling generator for labelled test-case corpora. Each entity category has a lexicon
// of concepts; every concept has word-aligned synonym variants, so two realizations of the
// same concept are paraphrases and gold annotations come for free.

struct SynthSpec {
  std::size_t n_cases = 50;
  std::size_t n_projects = 2;
  double redundancy_rate = 0.3;  // share of cases derived as paraphrases of an earlier case
  double near_pair_rate = 0.2;   // share of cases derived by changing exactly one slot
  double paraphrase_rate = 0.5;  // per-slot probability of switching synonym variant in a paraphrase
  std::size_t template_count = 8;
  std::optional<EntityCategory> near_slot;  // force near pairs to differ in this category
};

struct NearPairAudit {
  std::string id_a;
  std::string id_b;
  EntityCategory slot;
};

struct SyntheticCorpus {
  AnnotatedCorpus corpus;
  std::vector<RedundancyLabel> labels;
  std::vector<NearPairAudit> near_pairs;
  std::vector<std::pair<std::string, std::string>> paraphrase_pairs;  // (base, derived)
};

namespace synth {

using Variants = std::vector<Tokens>;

struct Lexicon {
  std::array<std::vector<Variants>, kEntityCategoryCount> concepts;
  std::vector<std::string> function_words;
};

inline Tokens words(std::string_view s) { return normalize_tokens(s); }

inline Variants variants(std::initializer_list<std::string_view> forms) {
  Variants v;
  for (auto f : forms) v.push_back(words(f));
  return v;
}

inline const Lexicon& lexicon() {
  static const Lexicon lex = [] {
    Lexicon l;
    auto& com = l.concepts[index_of(EntityCategory::Component)];
    com = {variants({"visit history", "browsing history"}),
           variants({"taskbar window", "taskbar panel"}),
           variants({"gear rotation processing", "gear rotation handling"}),
           variants({"cpu utilization", "processor utilization"}),
           variants({"hard disk", "hard drive"}),
           variants({"network adapter", "network card"}),
           variants({"file manager", "file explorer"}),
           variants({"login screen", "sign-in screen"}),
           variants({"audio mixer", "sound mixer"}),
           variants({"print queue", "printer queue"}),
           variants({"system clock", "system time"}),
           variants({"wireless connection", "wifi connection"}),
           variants({"user account", "user profile"}),
           variants({"desktop wallpaper", "desktop background"}),
           variants({"monitor brightness", "display brightness"}),
           variants({"font settings", "font preferences"}),
           variants({"power management", "power control"}),
           variants({"boot loader", "boot manager"}),
           variants({"firewall rules", "firewall policies"}),
           variants({"contents of each resource directory", "contents of every resource directory"}),
           variants({"input method", "typing method"}),
           variants({"clipboard history", "clipboard log"}),
           variants({"backup archive", "backup snapshot"})};
    auto& beh = l.concepts[index_of(EntityCategory::Behavior)];
    beh = {variants({"browse", "view"}),       variants({"switch", "toggle"}),    variants({"open", "launch"}),
           variants({"close", "exit"}),        variants({"delete", "remove"}),    variants({"create", "add"}),
           variants({"modify", "edit"}),       variants({"search", "query"}),     variants({"export", "extract"}),
           variants({"import", "load"}),       variants({"restart", "reboot"}),   variants({"configure", "adjust"}),
           variants({"install", "deploy"}),    variants({"uninstall", "purge"}),  variants({"copy", "duplicate"}),
           variants({"rename", "relabel"}),    variants({"refresh", "reload"}),   variants({"partition", "split"})};
    auto& pre = l.concepts[index_of(EntityCategory::Prerequisite)];
    pre = {variants({"when drawing 3d graphics", "when rendering 3d graphics"}),
           variants({"after os installation", "after os setup"}),
           variants({"before os installation", "before os setup"}),
           variants({"while wlan is disconnected", "while wlan is offline"}),
           variants({"when no apps are installed", "when no programs are installed"}),
           variants({"when apps are installed", "when programs are installed"}),
           variants({"during heavy io pressure", "during intense io pressure"}),
           variants({"when battery is low", "when battery is weak"}),
           variants({"after operator logs in", "after operator signs in"}),
           variants({"before lockscreen appears", "before lockscreen shows"})};
    auto& man = l.concepts[index_of(EntityCategory::Manner)];
    man = {variants({"mouse", "pointer"}),
           variants({"keyboard shortcut", "keyboard hotkey"}),
           variants({"mesa-util tool", "mesa-util utility"}),
           variants({"unixbench tool", "unixbench utility"}),
           variants({"command line", "command prompt"}),
           variants({"touch gesture", "touch swipe"}),
           variants({"context menu", "popup menu"}),
           variants({"speech recognition", "voice recognition"}),
           variants({"remote session", "remote terminal"}),
           variants({"stylus pen", "stylus pencil"})};
    auto& con = l.concepts[index_of(EntityCategory::Constraint)];
    con = {variants({"within five seconds", "within five secs"}),
           variants({"including ftp application", "including ftp app"}),
           variants({"without data loss", "without data corruption"}),
           variants({"under peak traffic", "under high traffic"}),
           variants({"without memory leak", "without memory leakage"}),
           variants({"for all tenants", "for any tenant"}),
           variants({"at maximum resolution", "at highest resolution"}),
           variants({"across two monitors", "across dual monitors"}),
           variants({"with factory defaults", "with stock defaults"}),
           variants({"below sixty seconds", "under sixty seconds"})};
    l.function_words = {"test", "check", "verify", "that", "users", "we", "one", "can", "the", "and",
                        "using", "via", "through", "by"};
    return l;
  }();
  return lex;
}

// Structural problems that would make entity boundaries ambiguous: a word shared across
// categories or with the template vocabulary, a word that starts one phrase but sits inside
// another, or two concepts of one category with identical surface forms.
inline std::vector<std::string> lexicon_problems(const Lexicon& lex) {
  std::vector<std::string> problems;
  std::map<std::string, std::size_t> category_of;
  std::set<std::string> starts, ends, non_starts, non_ends;
  for (std::size_t c = 0; c < kEntityCategoryCount; ++c) {
    std::set<Tokens> seen;
    for (const auto& concept_variants : lex.concepts[c])
      for (const auto& v : concept_variants) {
        if (v.empty()) problems.push_back("empty variant");
        if (!seen.insert(v).second) problems.push_back("duplicate phrase: " + join(v));
        for (std::size_t k = 0; k < v.size(); ++k) {
          auto [it, inserted] = category_of.emplace(v[k], c);
          if (!inserted && it->second != c) problems.push_back("word in two categories: " + v[k]);
          (k == 0 ? starts : non_starts).insert(v[k]);
          (k + 1 == v.size() ? ends : non_ends).insert(v[k]);
        }
      }
  }
  for (const auto& w : lex.function_words)
    if (category_of.count(w)) problems.push_back("template word in lexicon: " + w);
  for (const auto& w : starts)
    if (non_starts.count(w)) problems.push_back("word both starts and continues a phrase: " + w);
  for (const auto& w : ends)
    if (non_ends.count(w)) problems.push_back("word both ends and precedes within a phrase: " + w);
  return problems;
}

struct Template {
  enum class Lead { Plain, TestThat, VerifyThat, CheckThat } lead;
  bool prerequisite_first;
  std::string_view manner_connector;
  bool constraint_last;
};

inline constexpr std::array<Template, 8> kTemplates = {{
    {Template::Lead::Plain, false, "using", false},
    {Template::Lead::TestThat, true, "via", true},
    {Template::Lead::VerifyThat, false, "through", false},
    {Template::Lead::Plain, true, "by", true},
    {Template::Lead::CheckThat, false, "using", true},
    {Template::Lead::TestThat, false, "via", false},
    {Template::Lead::VerifyThat, true, "using", false},
    {Template::Lead::Plain, false, "through", true},
}};

inline constexpr std::size_t kNull = static_cast<std::size_t>(-1);

// A concept reference plus the synonym variant used to realize it.
struct Slot {
  std::size_t concept_id = kNull;
  std::size_t variant = 0;
  bool present() const { return concept_id != kNull; }
};

struct Clause {
  Slot component;
  std::vector<Slot> behaviors;  // 0..2
  Slot prerequisite, manner, constraint;
  std::size_t template_id = 0;

  Slot& slot(EntityCategory c) {
    switch (c) {
      case EntityCategory::Component: return component;
      case EntityCategory::Prerequisite: return prerequisite;
      case EntityCategory::Manner: return manner;
      case EntityCategory::Constraint: return constraint;
      case EntityCategory::Behavior: break;
    }
    return behaviors.at(0);
  }
};

struct CaseSpec {
  std::vector<Clause> clauses;
  bool joined = false;  // two clauses joined by "and" in one sentence
};

// Semantic tuple: concept ids per slot, kNull for NULL.
using SemTuple = std::array<std::size_t, kEntityCategoryCount>;

inline std::vector<SemTuple> semantic_tuples(const CaseSpec& cs) {
  std::vector<SemTuple> out;
  for (const auto& c : cs.clauses) {
    SemTuple base{};
    base.fill(kNull);
    base[index_of(EntityCategory::Component)] = c.component.concept_id;
    base[index_of(EntityCategory::Prerequisite)] = c.prerequisite.concept_id;
    base[index_of(EntityCategory::Manner)] = c.manner.concept_id;
    base[index_of(EntityCategory::Constraint)] = c.constraint.concept_id;
    if (c.behaviors.empty()) out.push_back(base);
    for (const auto& b : c.behaviors) {
      SemTuple t = base;
      t[index_of(EntityCategory::Behavior)] = b.concept_id;
      out.push_back(t);
    }
  }
  return out;
}

// Tuple Covering Rule over concept identity.
inline bool semantic_covers(const std::vector<SemTuple>& a, const std::vector<SemTuple>& b) {
  return std::all_of(b.begin(), b.end(),
                     [&](const SemTuple& t) { return std::find(a.begin(), a.end(), t) != a.end(); });
}

struct Realized {
  Tokens tokens;  // one sentence
  std::vector<EntityAnnotation> entities;  // sentence_index filled by caller
  std::vector<RelationAnnotation> relations;
};

class Generator {
 public:
  Generator(const SynthSpec& spec, std::uint64_t seed) : spec_(spec), rng_(seed) {
    if (spec.template_count == 0) throw ConfigError("synthetic spec needs at least one template");
    if (spec.n_cases == 0 || spec.n_projects == 0) throw ConfigError("synthetic spec sizes must be >= 1");
    for (double r : {spec.redundancy_rate, spec.near_pair_rate, spec.paraphrase_rate})
      if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("synthetic rates must lie in [0, 1]");
    if (spec.redundancy_rate + spec.near_pair_rate > 1.0)
      throw ConfigError("redundancy_rate + near_pair_rate must not exceed 1");
  }

  SyntheticCorpus run() {
    SyntheticCorpus out;
    std::vector<CaseSpec> specs;
    std::vector<std::string> ids, projects;
    for (std::size_t i = 0; i < spec_.n_cases; ++i) {
      const std::string project = "P" + std::to_string(i % spec_.n_projects + 1);
      char buf[32];
      std::snprintf(buf, sizeof buf, "%s-TC%04zu", project.c_str(), i + 1);
      const std::string id = buf;
      std::vector<std::size_t> same_project;
      for (std::size_t j = 0; j < ids.size(); ++j)
        if (projects[j] == project) same_project.push_back(j);

      CaseSpec cs;
      const double u = rng_.uniform();
      bool made = false;
      if (!same_project.empty() && u < spec_.redundancy_rate) {
        const std::size_t base = same_project[rng_.index(same_project.size())];
        cs = paraphrase(specs[base]);
        out.paraphrase_pairs.emplace_back(ids[base], id);
        made = true;
      } else if (!same_project.empty() && u < spec_.redundancy_rate + spec_.near_pair_rate) {
        const std::size_t base = same_project[rng_.index(same_project.size())];
        EntityCategory changed{};
        if (auto near = near_variant(specs[base], changed)) {
          cs = *near;
          out.near_pairs.push_back({ids[base], id, changed});
          made = true;
        }
      }
      if (!made) cs = fresh();

      TestCase tc;
      tc.id = id;
      tc.project = project;
      AnnotatedCase ac = realize(cs, tc);
      out.corpus.push_back(std::move(ac));
      specs.push_back(std::move(cs));
      ids.push_back(id);
      projects.push_back(project);
    }

    // Labels for every within-project pair by brute-force semantic covering.
    std::vector<std::vector<SemTuple>> sem;
    for (const auto& s : specs) sem.push_back(semantic_tuples(s));
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        if (projects[i] != projects[j]) continue;
        const bool ab = semantic_covers(sem[i], sem[j]);
        const bool ba = semantic_covers(sem[j], sem[i]);
        out.labels.push_back({ids[i], ids[j], ab || ba, direction_of(ab, ba)});
      }
    return out;
  }

 private:
  Slot random_slot(EntityCategory c) {
    const auto& concepts = lexicon().concepts[index_of(c)];
    const std::size_t id = rng_.index(concepts.size());
    return {id, rng_.index(concepts[id].size())};
  }

  std::size_t random_template() { return rng_.index(std::min(spec_.template_count, kTemplates.size())); }

  Clause fresh_clause(const std::set<std::size_t>& used_components) {
    Clause c;
    do {
      c.component = random_slot(EntityCategory::Component);
    } while (used_components.count(c.component.concept_id));
    const double r = rng_.uniform();
    const std::size_t n_beh = r < 0.2 ? 0 : (r < 0.85 ? 1 : 2);
    while (c.behaviors.size() < n_beh) {
      auto b = random_slot(EntityCategory::Behavior);
      bool dup = std::any_of(c.behaviors.begin(), c.behaviors.end(),
                             [&](const Slot& s) { return s.concept_id == b.concept_id; });
      if (!dup) c.behaviors.push_back(b);
    }
    if (rng_.bernoulli(0.35)) c.prerequisite = random_slot(EntityCategory::Prerequisite);
    if (rng_.bernoulli(0.5)) c.manner = random_slot(EntityCategory::Manner);
    if (rng_.bernoulli(0.35)) c.constraint = random_slot(EntityCategory::Constraint);
    c.template_id = random_template();
    return c;
  }

  CaseSpec fresh() {
    CaseSpec cs;
    const std::size_t n = rng_.bernoulli(0.3) ? 2 : 1;
    std::set<std::size_t> used;
    for (std::size_t i = 0; i < n; ++i) {
      cs.clauses.push_back(fresh_clause(used));
      used.insert(cs.clauses.back().component.concept_id);
    }
    cs.joined = n == 2 && rng_.bernoulli(0.5);
    return cs;
  }

  void maybe_swap_variant(Slot& s, EntityCategory c) {
    if (!s.present() || !rng_.bernoulli(spec_.paraphrase_rate)) return;
    const auto& concepts = lexicon().concepts[index_of(c)];
    s.variant = (s.variant + 1 + rng_.index(concepts[s.concept_id].size() - 1)) % concepts[s.concept_id].size();
  }

  // Same tuples, reworded: new templates and synonym variants, possibly reordered clauses.
  // Occasionally drops or adds a clause so that coverage is one-directional.
  CaseSpec paraphrase(const CaseSpec& base) {
    CaseSpec cs = base;
    for (auto& c : cs.clauses) {
      c.template_id = random_template();
      maybe_swap_variant(c.component, EntityCategory::Component);
      for (auto& b : c.behaviors) maybe_swap_variant(b, EntityCategory::Behavior);
      maybe_swap_variant(c.prerequisite, EntityCategory::Prerequisite);
      maybe_swap_variant(c.manner, EntityCategory::Manner);
      maybe_swap_variant(c.constraint, EntityCategory::Constraint);
    }
    const double r = rng_.uniform();
    if (cs.clauses.size() == 2 && r < 0.2) {
      cs.clauses.erase(cs.clauses.begin() + static_cast<std::ptrdiff_t>(rng_.index(2)));
    } else if (cs.clauses.size() == 1 && r < 0.2) {
      cs.clauses.push_back(fresh_clause({cs.clauses[0].component.concept_id}));
    }
    if (cs.clauses.size() == 2 && rng_.bernoulli(0.5)) std::swap(cs.clauses[0], cs.clauses[1]);
    cs.joined = cs.clauses.size() == 2 && rng_.bernoulli(0.5);
    return cs;
  }

  // Identical surface form except one slot value, which moves to a different concept.
  std::optional<CaseSpec> near_variant(const CaseSpec& base, EntityCategory& changed) {
    struct Choice {
      std::size_t clause;
      EntityCategory cat;
      std::size_t behavior;
    };
    std::vector<Choice> choices;
    for (std::size_t ci = 0; ci < base.clauses.size(); ++ci) {
      const auto& c = base.clauses[ci];
      for (auto cat : kAllEntityCategories) {
        if (spec_.near_slot && *spec_.near_slot != cat) continue;
        if (cat == EntityCategory::Behavior) {
          for (std::size_t b = 0; b < c.behaviors.size(); ++b) choices.push_back({ci, cat, b});
        } else {
          Clause copy = c;
          if (copy.slot(cat).present()) choices.push_back({ci, cat, 0});
        }
      }
    }
    if (choices.empty()) return std::nullopt;
    const Choice ch = choices[rng_.index(choices.size())];
    CaseSpec cs = base;
    Clause& c = cs.clauses[ch.clause];
    Slot& s = ch.cat == EntityCategory::Behavior ? c.behaviors[ch.behavior] : c.slot(ch.cat);
    const auto& concepts = lexicon().concepts[index_of(ch.cat)];
    std::set<std::size_t> taken{s.concept_id};
    if (ch.cat == EntityCategory::Behavior)
      for (const auto& b : c.behaviors) taken.insert(b.concept_id);
    if (ch.cat == EntityCategory::Component)
      for (const auto& other : cs.clauses) taken.insert(other.component.concept_id);
    std::vector<std::size_t> options;
    for (std::size_t k = 0; k < concepts.size(); ++k)
      if (!taken.count(k)) options.push_back(k);
    if (options.empty()) return std::nullopt;
    s.concept_id = options[rng_.index(options.size())];
    s.variant = std::min(s.variant, concepts[s.concept_id].size() - 1);
    changed = ch.cat;
    return cs;
  }

  static const Tokens& surface(EntityCategory c, const Slot& s) {
    return lexicon().concepts[index_of(c)].at(s.concept_id).at(s.variant);
  }

  // Realizes one clause as tokens with entity spans and relations (indices local to the clause).
  Realized realize_clause(const Clause& c) const {
    const Template& t = kTemplates[c.template_id];
    Realized r;
    auto emit_entity = [&](EntityCategory cat, const Slot& s) {
      const auto& w = surface(cat, s);
      EntityAnnotation e;
      e.token_start = r.tokens.size();
      r.tokens.insert(r.tokens.end(), w.begin(), w.end());
      e.token_end = r.tokens.size() - 1;
      e.category = cat;
      r.entities.push_back(e);
      return r.entities.size() - 1;
    };
    auto emit = [&](std::initializer_list<std::string_view> ws) {
      for (auto w : ws) r.tokens.emplace_back(w);
    };
    std::vector<std::pair<std::size_t, RelationCategory>> heads;

    if (c.prerequisite.present() && t.prerequisite_first)
      heads.emplace_back(emit_entity(EntityCategory::Prerequisite, c.prerequisite), RelationCategory::Require);
    if (c.behaviors.empty()) {
      switch (t.lead) {
        case Template::Lead::VerifyThat: emit({"verify"}); break;
        case Template::Lead::CheckThat: emit({"check"}); break;
        default: emit({"test"}); break;
      }
    } else {
      switch (t.lead) {
        case Template::Lead::TestThat: emit({"test", "that", "users", "can"}); break;
        case Template::Lead::VerifyThat: emit({"verify", "that", "we", "can"}); break;
        case Template::Lead::CheckThat: emit({"check", "that", "one", "can"}); break;
        case Template::Lead::Plain: break;
      }
      for (std::size_t b = 0; b < c.behaviors.size(); ++b) {
        if (b) emit({"and"});
        heads.emplace_back(emit_entity(EntityCategory::Behavior, c.behaviors[b]), RelationCategory::Act);
      }
    }
    emit({"the"});
    const std::size_t component = emit_entity(EntityCategory::Component, c.component);
    if (c.constraint.present() && !t.constraint_last)
      heads.emplace_back(emit_entity(EntityCategory::Constraint, c.constraint), RelationCategory::Satisfy);
    if (c.manner.present()) {
      r.tokens.emplace_back(t.manner_connector);
      heads.emplace_back(emit_entity(EntityCategory::Manner, c.manner), RelationCategory::Use);
    }
    if (c.constraint.present() && t.constraint_last)
      heads.emplace_back(emit_entity(EntityCategory::Constraint, c.constraint), RelationCategory::Satisfy);
    if (c.prerequisite.present() && !t.prerequisite_first)
      heads.emplace_back(emit_entity(EntityCategory::Prerequisite, c.prerequisite), RelationCategory::Require);
    for (const auto& [h, rel] : heads) r.relations.push_back({h, component, rel});
    return r;
  }

  static std::string render_sentence(const Tokens& tokens, const std::optional<std::size_t>& comma_after) {
    std::string s;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i) s += ' ';
      s += tokens[i];
      if (comma_after && *comma_after == i) s += ',';
    }
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s + ".";
  }

  AnnotatedCase realize(const CaseSpec& cs, TestCase tc) const {
    AnnotatedCase ac;
    std::vector<std::string> sentences;
    auto append = [&](std::size_t sentence, std::size_t offset, const Realized& r) {
      const std::size_t base = ac.entities.size();
      for (auto e : r.entities) {
        e.sentence_index = sentence;
        e.token_start += offset;
        e.token_end += offset;
        ac.entities.push_back(e);
      }
      for (auto rel : r.relations) {
        rel.head_entity += base;
        rel.component_entity += base;
        ac.relations.push_back(rel);
      }
    };
    auto comma_for = [](const Clause& c, const Realized& r) -> std::optional<std::size_t> {
      if (c.prerequisite.present() && kTemplates[c.template_id].prerequisite_first) return r.entities[0].token_end;
      return std::nullopt;
    };
    if (cs.joined && cs.clauses.size() == 2) {
      const Realized r1 = realize_clause(cs.clauses[0]);
      const Realized r2 = realize_clause(cs.clauses[1]);
      Tokens all = r1.tokens;
      all.emplace_back("and");
      const std::size_t offset = all.size();
      all.insert(all.end(), r2.tokens.begin(), r2.tokens.end());
      std::string sentence = render_sentence(all, comma_for(cs.clauses[0], r1));
      if (auto c2 = comma_for(cs.clauses[1], r2)) {
        // re-render with the second comma as well
        std::string s;
        for (std::size_t i = 0; i < all.size(); ++i) {
          if (i) s += ' ';
          s += all[i];
          if ((comma_for(cs.clauses[0], r1) && *comma_for(cs.clauses[0], r1) == i) || offset + *c2 == i) s += ',';
        }
        s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
        sentence = s + ".";
      }
      sentences.push_back(sentence);
      append(0, 0, r1);
      append(0, offset, r2);
    } else {
      for (std::size_t i = 0; i < cs.clauses.size(); ++i) {
        const Realized r = realize_clause(cs.clauses[i]);
        sentences.push_back(render_sentence(r.tokens, comma_for(cs.clauses[i], r)));
        append(i, 0, r);
      }
    }
    for (std::size_t i = 0; i < sentences.size(); ++i) tc.summary += (i ? " " : "") + sentences[i];
    ac.test_case = std::move(tc);
    ac.tokens = assemble_sequence(ac.test_case);
    validate_annotations(ac);
    return ac;
  }

  SynthSpec spec_;
  Rng rng_;
};

}  // namespace synth

// Deterministic in (seed, spec).
inline SyntheticCorpus generate_synthetic_corpus(std::uint64_t seed, const SynthSpec& spec) {
  return synth::Generator(spec, seed).run();
}

// Word classes induced by synonym alignment: position k of every variant of a concept is one class.
inline std::map<std::string, std::size_t> synthetic_word_classes() {
  std::map<std::string, std::size_t> word_id;
  std::vector<std::size_t> parent;
  auto id = [&](const std::string& w) {
    auto [it, inserted] = word_id.emplace(w, parent.size());
    if (inserted) parent.push_back(parent.size());
    return it->second;
  };
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  const auto& lex = synth::lexicon();
  for (const auto& cat : lex.concepts)
    for (const auto& concept_variants : cat) {
      for (const auto& v : concept_variants)
        for (const auto& w : v) id(w);
      for (std::size_t k = 0; k < concept_variants[0].size(); ++k)
        for (const auto& v : concept_variants)
          if (k < v.size()) parent[find(id(v[k]))] = find(id(concept_variants[0][k]));
    }
  for (const auto& w : lex.function_words) id(w);
  std::map<std::string, std::size_t> out;
  for (const auto& [w, i] : word_id) out[w] = find(i);
  return out;
}

struct CalibratedEmbeddingOptions {
  std::size_t dim = 64;
  double shared_weight = 0.6;  // common direction shared by every word
  double class_weight = 1.0;   // synonym-class direction
  double word_weight = 0.05;   // per-word noise
};

// Embeddings for the generator vocabulary in which synonyms are near-parallel and distinct
// classes are weakly correlated through one shared direction.
inline EmbeddingStore synthetic_embeddings(std::uint64_t seed, const CalibratedEmbeddingOptions& opt = {}) {
  const auto classes = synthetic_word_classes();
  auto gaussian_unit = [&](std::uint64_t stream) {
    Rng rng(derive_seed(seed, stream));
    Vector v(opt.dim);
    for (auto& x : v) x = rng.normal();
    const double n = norm(v);
    for (auto& x : v) x /= n;
    return v;
  };
  const Vector shared = gaussian_unit(0);
  EmbeddingStore store(opt.dim);
  for (const auto& [word, cls] : classes) {
    const Vector cv = gaussian_unit(1 + cls);
    const Vector wv = gaussian_unit(fnv1a(word));
    Vector v(opt.dim);
    for (std::size_t d = 0; d < opt.dim; ++d)
      v[d] = opt.shared_weight * shared[d] + opt.class_weight * cv[d] + opt.word_weight * wv[d];
    const double n = norm(v);
    for (auto& x : v) x /= n;
    store.set(word, std::move(v));
  }
  return store;
}

inline std::vector<Tokens> corpus_sentences(const AnnotatedCorpus& corpus) {
  std::vector<Tokens> out;
  for (const auto& ac : corpus)
    for (const auto& s : ac.tokens.sentences) out.push_back(s);
  return out;
}

inline std::vector<Tokens> corpus_sentences(const Corpus& corpus) {
  std::vector<Tokens> out;
  for (const auto& tc : corpus.cases) {
    try {
      for (auto& s : assemble_sequence(tc).sentences) out.push_back(std::move(s));
    } catch (const PreprocessError&) {
    }
  }
  return out;
}

}  // namespace tscope
