#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tscope/applications.hpp"
#include "tscope/baselines.hpp"
#include "tscope/config.hpp"
#include "tscope/evaluate.hpp"
#include "tscope/synthetic.hpp"
#include "tscope/tuples.hpp"

namespace tscope::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitInternal = 2;

namespace detail {

// Flags that may override config-file values. Unset flags leave the config alone.
struct Overrides {
  std::optional<double> threshold, sif_a, neg_ratio, learning_rate;
  std::optional<std::size_t> span_max_len, c0_window, c1_cap, embed_dim, embed_window, embed_epochs, model_epochs;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> lexicon_path, scope;

  void apply(PipelineConfig& c) const {
    if (threshold) c.threshold = *threshold;
    if (sif_a) c.sif_a = *sif_a;
    if (neg_ratio) c.neg_ratio = *neg_ratio;
    if (learning_rate) c.learning_rate = *learning_rate;
    if (span_max_len) c.span_max_len = *span_max_len;
    if (c0_window) c.c0_window = *c0_window;
    if (c1_cap) c.c1_cap = *c1_cap;
    if (embed_dim) c.embed_dim = *embed_dim;
    if (embed_window) c.embed_window = *embed_window;
    if (embed_epochs) c.embed_epochs = *embed_epochs;
    if (model_epochs) c.model_epochs = *model_epochs;
    if (seed) c.seed = *seed;
    if (lexicon_path) c.lexicon_path = *lexicon_path;
    if (scope) {
      auto s = parse_scope(*scope);
      if (!s) throw ConfigError("--scope must be per_project or global");
      c.scope = *s;
    }
    c.validate();
  }
};

inline EmbeddingStore load_store_for(const std::string& path, const Corpus& corpus) {
  auto store = load_word_vectors(path);
  store.fit_frequencies(corpus_sentences(corpus));
  return store;
}

inline ComparisonConfig comparison_for(const PipelineConfig& cfg, const std::vector<CaseTuples>& cases,
                                       const EmbeddingStore& store) {
  ComparisonConfig cc = cfg.comparison();
  std::vector<std::vector<TestTuple>> sets;
  for (const auto& c : cases) sets.push_back(c.tuples);
  cc.sif = fit_sif_for_tuples(sets, store, cfg.sif_a);
  return cc;
}

inline void write_text(const std::string& path, const std::string& text) {
  auto out = tscope::detail::open_output(path);
  out << text;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// Library errors exit 1, anything else 2; the message goes to `err`.
// Cases in the corpus that appear in no verdict were skipped by detection.
inline std::vector<std::string> skipped_cases(const std::string& corpus_path,
                                              const std::vector<RedundancyVerdict>& verdicts) {
  if (corpus_path.empty()) return {};
  std::set<std::string> seen;
  for (const auto& v : verdicts) seen.insert({v.id_a, v.id_b});
  std::vector<std::string> out;
  for (const auto& tc : load_corpus(corpus_path).cases)
    if (!seen.count(tc.id)) out.push_back(tc.id);
  return out;
}

template <class Body>
int guarded(Body&& body, std::ostream& err) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace detail

// Runs one command line; returns the process exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Tuple-based redundancy detection for natural-language test cases", "tscope"};
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<std::string> config_path;
  app.add_option("--config", config_path, "JSON config file supplying defaults");

  detail::Overrides ov;
  auto add_model_flags = [&](CLI::App* sub) {
    sub->add_option("--span-max-len", ov.span_max_len);
    sub->add_option("--c0-window", ov.c0_window);
    sub->add_option("--c1-cap", ov.c1_cap);
    sub->add_option("--neg-ratio", ov.neg_ratio);
    sub->add_option("--learning-rate", ov.learning_rate);
    sub->add_option("--model-epochs", ov.model_epochs);
  };
  auto add_compare_flags = [&](CLI::App* sub) {
    sub->add_option("--threshold", ov.threshold);
    sub->add_option("--sif-a", ov.sif_a);
    sub->add_option("--lexicon", ov.lexicon_path);
    sub->add_option("--scope", ov.scope, "per_project or global");
  };

  std::string corpus_path, annotations_path, embeddings_path, model_path, extractions_path, out_path, labels_path,
      verdicts_path, out_dir, report_path, import_path, tuples_out, loss_out, predicted_path, gold_path, drop = "all",
      near_slot;
  std::size_t n_cases = 50, n_projects = 2, templates = synth::kTemplates.size();
  double redundancy_rate = 0.3, near_pair_rate = 0.2, paraphrase_rate = 0.5;

  auto* synth_cmd = app.add_subcommand("synth", "generate a labelled synthetic corpus");
  synth_cmd->add_option("--out-dir", out_dir)->required();
  synth_cmd->add_option("--cases", n_cases);
  synth_cmd->add_option("--projects", n_projects);
  synth_cmd->add_option("--redundancy-rate", redundancy_rate);
  synth_cmd->add_option("--near-pair-rate", near_pair_rate);
  synth_cmd->add_option("--paraphrase-rate", paraphrase_rate);
  synth_cmd->add_option("--templates", templates);
  synth_cmd->add_option("--near-slot", near_slot, "force near pairs to differ in this category");
  synth_cmd->add_option("--embed-dim", ov.embed_dim);
  synth_cmd->add_option("--seed", ov.seed);

  auto* pre_cmd = app.add_subcommand("preprocess", "split and tokenize a corpus");
  pre_cmd->add_option("--corpus", corpus_path)->required();
  pre_cmd->add_option("--out", out_path)->required();

  auto* emb_cmd = app.add_subcommand("train-embeddings", "train skip-gram word vectors on a corpus");
  emb_cmd->add_option("--corpus", corpus_path)->required();
  emb_cmd->add_option("--out", out_path)->required();
  emb_cmd->add_option("--embed-dim", ov.embed_dim);
  emb_cmd->add_option("--embed-window", ov.embed_window);
  emb_cmd->add_option("--embed-epochs", ov.embed_epochs);
  emb_cmd->add_option("--seed", ov.seed);

  auto* train_cmd = app.add_subcommand("train-model", "train the joint entity/relation model");
  train_cmd->add_option("--corpus", corpus_path)->required();
  train_cmd->add_option("--annotations", annotations_path)->required();
  train_cmd->add_option("--embeddings", embeddings_path)->required();
  train_cmd->add_option("--out", out_path)->required();
  train_cmd->add_option("--loss-out", loss_out, "write the per-epoch loss trace");
  train_cmd->add_option("--seed", ov.seed);
  add_model_flags(train_cmd);

  auto* extract_cmd = app.add_subcommand("extract", "extract entities and relations");
  extract_cmd->add_option("--corpus", corpus_path)->required();
  extract_cmd->add_option("--model", model_path);
  extract_cmd->add_option("--embeddings", embeddings_path);
  extract_cmd->add_option("--import", import_path, "import extractions produced elsewhere instead of running a model");
  extract_cmd->add_option("--out", out_path)->required();
  extract_cmd->add_option("--tuples-out", tuples_out, "also write dissected tuples");

  auto* detect_cmd = app.add_subcommand("detect", "detect redundant test-case pairs");
  detect_cmd->add_option("--corpus", corpus_path)->required();
  detect_cmd->add_option("--extractions", extractions_path)->required();
  detect_cmd->add_option("--embeddings", embeddings_path)->required();
  detect_cmd->add_option("--out", out_path)->required();
  detect_cmd->add_option("--report", report_path, "also write a human-readable report");
  add_compare_flags(detect_cmd);

  auto* eval_cmd = app.add_subcommand("evaluate", "score verdicts against labels, or extractions against gold");
  eval_cmd->add_option("--verdicts", verdicts_path);
  eval_cmd->add_option("--labels", labels_path);
  eval_cmd->add_option("--corpus", corpus_path, "with --verdicts: cases absent from the verdicts count as skipped");
  eval_cmd->add_option("--predicted", predicted_path);
  eval_cmd->add_option("--gold", gold_path);
  eval_cmd->add_option("--out", out_path);

  auto* ablate_cmd = app.add_subcommand("ablate", "re-run detection with one slot ignored");
  ablate_cmd->add_option("--corpus", corpus_path)->required();
  ablate_cmd->add_option("--extractions", extractions_path)->required();
  ablate_cmd->add_option("--embeddings", embeddings_path)->required();
  ablate_cmd->add_option("--labels", labels_path);
  ablate_cmd->add_option("--drop", drop, "entity category, or all");
  ablate_cmd->add_option("--out", out_path);
  add_compare_flags(ablate_cmd);

  auto* base_cmd = app.add_subcommand("baseline", "whole-text cosine baseline");
  base_cmd->add_option("--corpus", corpus_path)->required();
  base_cmd->add_option("--embeddings", embeddings_path)->required();
  base_cmd->add_option("--out", out_path)->required();
  base_cmd->add_option("--threshold", ov.threshold);
  base_cmd->add_option("--scope", ov.scope);

  auto* apps_cmd = app.add_subcommand("apps", "dependence, prerequisite grouping and completeness");
  apps_cmd->add_option("--corpus", corpus_path)->required();
  apps_cmd->add_option("--extractions", extractions_path)->required();
  apps_cmd->add_option("--embeddings", embeddings_path)->required();
  apps_cmd->add_option("--out", out_path)->required();
  add_compare_flags(apps_cmd);

  auto* report_cmd = app.add_subcommand("report", "render verdicts as a readable report");
  report_cmd->add_option("--verdicts", verdicts_path)->required();
  report_cmd->add_option("--labels", labels_path, "append detection metrics");
  report_cmd->add_option("--corpus", corpus_path, "cases absent from the verdicts count as skipped");
  report_cmd->add_option("--out", out_path);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitValidation;
  }

  ScopedWarningHandler warnings([&](std::string_view msg) { err << "warning: " << msg << "\n"; });
  return detail::guarded([&]() -> int {
    PipelineConfig cfg = config_path ? load_config(*config_path) : PipelineConfig{};
    ov.apply(cfg);

    auto emit = [&](const std::string& text) {
      if (out_path.empty()) out << text;
      else detail::write_text(out_path, text);
    };

    if (synth_cmd->parsed()) {
      SynthSpec spec;
      spec.n_cases = n_cases;
      spec.n_projects = n_projects;
      spec.redundancy_rate = redundancy_rate;
      spec.near_pair_rate = near_pair_rate;
      spec.paraphrase_rate = paraphrase_rate;
      spec.template_count = templates;
      if (!near_slot.empty()) {
        spec.near_slot = parse_entity_category(near_slot);
        if (!spec.near_slot) throw ConfigError("unknown entity category: " + near_slot);
      }
      const auto syn = generate_synthetic_corpus(cfg.seed, spec);
      std::filesystem::create_directories(out_dir);
      const std::filesystem::path dir(out_dir);
      write_corpus((dir / "corpus.jsonl").string(), corpus_of(syn.corpus));
      write_annotations((dir / "annotations.jsonl").string(), syn.corpus);
      write_labels((dir / "labels.jsonl").string(), syn.labels);
      {
        auto near = tscope::detail::open_output((dir / "near_pairs.jsonl").string());
        for (const auto& n : syn.near_pairs) {
          Json j;
          j["id_a"] = n.id_a;
          j["id_b"] = n.id_b;
          j["slot"] = std::string(to_string(n.slot));
          near << j.dump() << "\n";
        }
      }
      CalibratedEmbeddingOptions eo;
      eo.dim = cfg.embed_dim;
      write_word_vectors((dir / "calibrated_vectors.txt").string(), synthetic_embeddings(cfg.seed, eo));
      out << "wrote " << syn.corpus.size() << " cases, " << syn.labels.size() << " labelled pairs to " << out_dir
          << "\n";
      return kExitOk;
    }

    if (pre_cmd->parsed()) {
      const Corpus corpus = load_corpus(corpus_path);
      auto file = tscope::detail::open_output(out_path);
      for (const auto& tc : corpus.cases) {
        const auto tokens = assemble_sequence(tc);
        Json j;
        j["id"] = tc.id;
        j["sentences"] = tokens.sentences;
        j["sequence"] = tokens.sep_sequence;
        file << j.dump() << "\n";
      }
      return kExitOk;
    }

    if (emb_cmd->parsed()) {
      const Corpus corpus = load_corpus(corpus_path);
      write_word_vectors(out_path, train_embeddings(corpus_sentences(corpus), cfg.skipgram()));
      return kExitOk;
    }

    if (train_cmd->parsed()) {
      const Corpus corpus = load_corpus(corpus_path);
      const auto annotated = load_annotations(annotations_path, corpus, cfg.span_max_len);
      const auto store = load_word_vectors(embeddings_path);
      const auto result = train_joint(annotated, store, cfg.extraction());
      save_model(out_path, result.model);
      if (!loss_out.empty()) {
        std::ostringstream os;
        for (std::size_t e = 0; e < result.loss_trace.size(); ++e)
          os << e + 1 << ' ' << format_double(result.loss_trace[e]) << "\n";
        detail::write_text(loss_out, os.str());
      }
      return kExitOk;
    }

    if (extract_cmd->parsed()) {
      const Corpus corpus = load_corpus(corpus_path);
      std::vector<Extraction> extractions;
      if (!import_path.empty()) {
        extractions = import_extractions(import_path, corpus);
      } else {
        if (model_path.empty() || embeddings_path.empty())
          throw ValidationError("extract needs --model and --embeddings, or --import");
        const auto model = load_model(model_path);
        const auto store = load_word_vectors(embeddings_path);
        extractions = extract_all(corpus, model, store);
      }
      write_extractions(out_path, extractions);
      if (!tuples_out.empty()) {
        auto file = tscope::detail::open_output(tuples_out);
        write_tuples(file, extractions);
      }
      return kExitOk;
    }

    if (detect_cmd->parsed()) {
      const Corpus corpus = load_corpus(corpus_path);
      const auto extractions = import_extractions(extractions_path, corpus);
      const auto store = detail::load_store_for(embeddings_path, corpus);
      const auto cases = case_tuples(extractions);
      const auto result = detect_redundancy(cases, store, detail::comparison_for(cfg, cases, store));
      write_verdicts(out_path, result.verdicts);
      if (!report_path.empty()) {
        std::ostringstream os;
        write_report(os, result.verdicts, result.skipped);
        detail::write_text(report_path, os.str());
      }
      return kExitOk;
    }

    if (eval_cmd->parsed()) {
      Json j;
      if (!verdicts_path.empty() || !labels_path.empty()) {
        if (verdicts_path.empty() || labels_path.empty())
          throw ValidationError("detection evaluation needs both --verdicts and --labels");
        const auto labels = load_labels(labels_path);
        const auto verdicts = load_verdicts(verdicts_path);
        j["detection"] =
            metric_to_json(detection_metrics(verdicts, labels, detail::skipped_cases(corpus_path, verdicts)));
      } else if (!predicted_path.empty() || !gold_path.empty()) {
        if (predicted_path.empty() || gold_path.empty() || corpus_path.empty())
          throw ValidationError("extraction evaluation needs --corpus, --predicted and --gold");
        const Corpus corpus = load_corpus(corpus_path);
        const auto rep = extraction_metrics(import_extractions(predicted_path, corpus),
                                            gold_extractions(load_annotations(gold_path, corpus)));
        Json ent, rel;
        for (auto c : kAllEntityCategories) ent[std::string(to_string(c))] = metric_to_json(rep.entity[index_of(c)]);
        ent["micro"] = metric_to_json(rep.entity_micro);
        for (auto c : kAllRelationCategories)
          rel[std::string(to_string(c))] = metric_to_json(rep.relation[index_of(c)]);
        rel["micro"] = metric_to_json(rep.relation_micro);
        j["entities"] = ent;
        j["relations"] = rel;
      } else {
        throw ValidationError("evaluate needs --verdicts/--labels or --corpus/--predicted/--gold");
      }
      emit(detail::dump(j));
      return kExitOk;
    }

    if (ablate_cmd->parsed()) {
      const Corpus corpus = load_corpus(corpus_path);
      const auto extractions = import_extractions(extractions_path, corpus);
      const auto store = detail::load_store_for(embeddings_path, corpus);
      const auto labels = labels_path.empty() ? std::vector<RedundancyLabel>{} : load_labels(labels_path);
      const auto cases = case_tuples(extractions);
      const auto cc = detail::comparison_for(cfg, cases, store);
      std::vector<EntityCategory> drops;
      if (drop == "all") drops.assign(kAllEntityCategories.begin(), kAllEntityCategories.end());
      else if (auto c = parse_entity_category(drop)) drops.push_back(*c);
      else throw ConfigError("unknown entity category: " + drop);
      std::ostringstream os;
      os << ablation_header() << "   pairs\n";
      for (auto c : drops) {
        const auto r = ablate(cases, c, store, cc, labels);
        os << ablation_row(r) << "   " << r.full_redundant.size() << "->" << r.ablated_redundant.size() << "\n";
      }
      emit(os.str());
      return kExitOk;
    }

    if (base_cmd->parsed()) {
      const Corpus corpus = load_corpus(corpus_path);
      const auto store = load_word_vectors(embeddings_path);
      write_verdicts(out_path, wholetext_detect(corpus, store, cfg.threshold, cfg.scope));
      return kExitOk;
    }

    if (apps_cmd->parsed()) {
      const Corpus corpus = load_corpus(corpus_path);
      auto extractions = import_extractions(extractions_path, corpus);
      std::sort(extractions.begin(), extractions.end(),
                [](const Extraction& a, const Extraction& b) { return a.case_id < b.case_id; });
      const auto store = detail::load_store_for(embeddings_path, corpus);
      const auto cc = detail::comparison_for(cfg, case_tuples(extractions), store);
      Json j;
      Json deps = Json::array();
      for (const auto& e : dependence_report(extractions, store, cc))
        deps.push_back({{"prerequisite_case", e.prerequisite_case}, {"dependent_case", e.dependent_case}});
      j["dependence"] = {{"heuristic", true}, {"edges", deps}};
      j["prerequisite_groups"] = group_by_prerequisite(extractions, store, cc);
      Json comp = Json::object();
      for (const auto& e : extractions) {
        Json absent = Json::array();
        for (auto c : completeness_check(e)) absent.push_back(std::string(to_string(c)));
        comp[e.case_id] = absent;
      }
      j["missing_categories"] = comp;
      emit(detail::dump(j));
      return kExitOk;
    }

    if (report_cmd->parsed()) {
      const auto verdicts = load_verdicts(verdicts_path);
      const auto skipped = detail::skipped_cases(corpus_path, verdicts);
      std::ostringstream os;
      write_report(os, verdicts, skipped);
      if (!labels_path.empty()) {
        const auto m = detection_metrics(verdicts, load_labels(labels_path), skipped);
        os << "\nprecision " << format_rate(m.precision) << "  recall " << format_rate(m.recall) << "  f1 "
           << format_rate(m.f1) << "  accuracy " << format_rate(m.accuracy) << "\n";
      }
      emit(os.str());
      return kExitOk;
    }
    return kExitInternal;
  }, err);
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace tscope::cli
