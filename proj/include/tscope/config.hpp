#pragma once

#include <optional>
#include <set>
#include <string>

#include "tscope/compare.hpp"
#include "tscope/corpus.hpp"
#include "tscope/embeddings.hpp"
#include "tscope/errors.hpp"
#include "tscope/extraction.hpp"

namespace tscope {

// Pipeline defaults. A JSON config file may set any subset; command-line flags override it.
struct PipelineConfig {
  double threshold = 0.95;
  std::size_t span_max_len = kMaxSpanLength;
  double sif_a = kDefaultSifA;
  std::string lexicon_path;  // empty: built-in indicative words
  std::size_t c0_window = 5;
  std::size_t c1_cap = 20;
  std::size_t embed_dim = 80;
  std::size_t embed_window = 3;
  std::size_t embed_epochs = 40;
  double neg_ratio = 3.0;
  double learning_rate = 0.05;
  std::size_t model_epochs = 40;
  std::uint64_t seed = 7;
  PairScope scope = PairScope::PerProject;

  void validate() const {
    if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("threshold must lie in (0, 1]");
    if (span_max_len == 0 || span_max_len > kMaxSpanLength)
      throw ConfigError("span_max_len must lie in [1, " + std::to_string(kMaxSpanLength) + "]");
    if (!(sif_a > 0.0)) throw ConfigError("sif_a must be positive");
    if (embed_dim < 2) throw ConfigError("embed_dim must be at least 2");
    if (embed_window == 0) throw ConfigError("embed_window must be positive");
    if (embed_epochs == 0 || model_epochs == 0) throw ConfigError("epoch counts must be positive");
    if (!(neg_ratio >= 0.0)) throw ConfigError("neg_ratio must be non-negative");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  }

  ExtractionHyperparams extraction() const {
    ExtractionHyperparams hp;
    hp.learning_rate = learning_rate;
    hp.epochs = model_epochs;
    hp.neg_ratio = neg_ratio;
    hp.seed = seed;
    hp.span_max_len = span_max_len;
    hp.c0_window = c0_window;
    hp.c1_cap = c1_cap;
    return hp;
  }

  SkipGramOptions skipgram() const {
    SkipGramOptions o;
    o.dim = embed_dim;
    o.window = embed_window;
    o.epochs = embed_epochs;
    o.seed = seed;
    return o;
  }

  // SIF context is left degenerate; callers fit it over their tuples.
  ComparisonConfig comparison() const {
    ComparisonConfig c;
    c.threshold = threshold;
    c.scope = scope;
    if (!lexicon_path.empty()) c.lexicon = load_lexicon(lexicon_path);
    c.validate();
    return c;
  }
};

inline std::optional<PairScope> parse_scope(std::string_view s) {
  if (s == "per_project") return PairScope::PerProject;
  if (s == "global") return PairScope::Global;
  return std::nullopt;
}

inline std::string_view to_string(PairScope s) { return s == PairScope::Global ? "global" : "per_project"; }

inline PipelineConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  PipelineConfig c;
  auto number = [&](const std::string& key, const Json& v) {
    if (!v.is_number()) throw ConfigError("config key " + key + " must be a number");
    return v.get<double>();
  };
  auto count = [&](const std::string& key, const Json& v) -> std::size_t {
    if (!v.is_number_integer() || v.get<long long>() < 0)
      throw ConfigError("config key " + key + " must be a non-negative integer");
    return v.get<std::size_t>();
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "threshold") c.threshold = number(key, v);
    else if (key == "span_max_len") c.span_max_len = count(key, v);
    else if (key == "sif_a") c.sif_a = number(key, v);
    else if (key == "lexicon_path") {
      if (v.is_null()) c.lexicon_path.clear();
      else if (v.is_string()) c.lexicon_path = v.get<std::string>();
      else throw ConfigError("config key lexicon_path must be a string");
    } else if (key == "c0_window") c.c0_window = count(key, v);
    else if (key == "c1_cap") c.c1_cap = count(key, v);
    else if (key == "embed_dim") c.embed_dim = count(key, v);
    else if (key == "embed_window") c.embed_window = count(key, v);
    else if (key == "embed_epochs") c.embed_epochs = count(key, v);
    else if (key == "neg_ratio") c.neg_ratio = number(key, v);
    else if (key == "learning_rate") c.learning_rate = number(key, v);
    else if (key == "model_epochs") c.model_epochs = count(key, v);
    else if (key == "seed") c.seed = count(key, v);
    else if (key == "scope") {
      auto s = v.is_string() ? parse_scope(v.get<std::string>()) : std::nullopt;
      if (!s) throw ConfigError("config key scope must be \"per_project\" or \"global\"");
      c.scope = *s;
    } else {
      throw ConfigError("unknown config key: " + key);
    }
  }
  c.validate();
  return c;
}

inline PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

inline Json config_to_json(const PipelineConfig& c) {
  Json j;
  j["threshold"] = c.threshold;
  j["span_max_len"] = c.span_max_len;
  j["sif_a"] = c.sif_a;
  j["lexicon_path"] = c.lexicon_path.empty() ? Json(nullptr) : Json(c.lexicon_path);
  j["c0_window"] = c.c0_window;
  j["c1_cap"] = c.c1_cap;
  j["embed_dim"] = c.embed_dim;
  j["embed_window"] = c.embed_window;
  j["embed_epochs"] = c.embed_epochs;
  j["neg_ratio"] = c.neg_ratio;
  j["learning_rate"] = c.learning_rate;
  j["model_epochs"] = c.model_epochs;
  j["seed"] = c.seed;
  j["scope"] = std::string(to_string(c.scope));
  return j;
}

}  // namespace tscope
