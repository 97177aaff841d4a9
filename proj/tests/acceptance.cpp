// Acceptance run: one PASS/FAIL line per criterion. Exit status 0 only if all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <algorithm>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "naive_oracle.hpp"
#include "test_util.hpp"
#include "tscope/tscope.hpp"

using namespace tscope;

namespace {

constexpr double kEntityF1Floor = 0.90;
constexpr double kRelationF1Floor = 0.85;
constexpr double kExtractionBudgetSeconds = 300.0;
constexpr double kGradientTolerance = 1e-4;
constexpr double kStatsTolerance = 1e-9;
constexpr double kOrthogonalityTolerance = 1e-6;
constexpr double kPowerIterationTolerance = 1e-5;
constexpr std::size_t kGradientInstances = 50;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

// Calibrated vectors with corpus frequencies and a SIF fit over the gold tuples.
struct GoldSetup {
  EmbeddingStore store;
  ComparisonConfig config;
  std::vector<CaseTuples> cases;
};

GoldSetup gold_setup(const std::vector<Extraction>& extractions, const std::vector<Tokens>& sentences,
                     std::uint64_t seed) {
  GoldSetup g{synthetic_embeddings(seed), {}, case_tuples(extractions)};
  g.store.fit_frequencies(sentences);
  std::vector<std::vector<TestTuple>> sets;
  for (const auto& c : g.cases) sets.push_back(c.tuples);
  g.config.sif = fit_sif_for_tuples(sets, g.store);
  return g;
}

Outcome worked_examples() {
  const auto annotated = testutil::worked_examples();
  const auto g = gold_setup(gold_extractions(annotated), corpus_sentences(annotated), 1);
  const auto result = detect_redundancy(g.cases, g.store, g.config);
  std::map<std::string, const RedundancyVerdict*> by_first;
  for (const auto& v : result.verdicts) by_first[v.id_a] = &v;
  if (result.verdicts.size() != 4) return {false, std::to_string(result.verdicts.size()) + " verdicts, want 4"};

  auto only_slot = [](const RedundancyVerdict& v, EntityCategory slot, const std::string& note) {
    if (v.reasons.empty()) return false;
    for (const auto& r : v.reasons)
      if (r.slot.slot != slot || (!note.empty() && r.slot.note != note)) return false;
    return true;
  };
  auto both_directions = [](const RedundancyVerdict& v) {
    bool ab = false, ba = false;
    for (const auto& r : v.reasons) (r.check == Direction::ACoversB ? ab : ba) = true;
    return ab && ba;
  };
  std::vector<std::string> bad;
  const auto& gear = *by_first.at("GR-1");
  if (gear.redundant || !only_slot(gear, EntityCategory::Manner, "below-threshold")) bad.push_back("tool pair");
  // Same component, different behaviour: neither side's tuples cover the other's.
  const auto& browse = *by_first.at("TC346");
  bool behavior_named = false;
  for (const auto& r : browse.reasons) behavior_named = behavior_named || r.slot.slot == EntityCategory::Behavior;
  if (browse.redundant || !both_directions(browse) || !behavior_named) bad.push_back("TC346/TC525");
  for (const auto* id : {"CPU-1", "HD-1"}) {
    const auto& v = *by_first.at(id);
    if (v.redundant || !both_directions(v) || !only_slot(v, EntityCategory::Prerequisite, "indicative-words"))
      bad.push_back(id);
  }
  std::string detail = "4 pairs non-redundant with expected reason slots";
  if (!bad.empty()) {
    detail = "wrong:";
    for (const auto& b : bad) detail += " " + b;
  }
  return {bad.empty(), detail};
}

Outcome tuple_transcription() {
  const auto ex = testutil::worked_extractions();
  const std::vector<TestTuple> want346 = {testutil::tuple_of("contents of each resource directory", "browse"),
                                          testutil::tuple_of("visit history", "switch", "", "mouse")};
  const std::vector<TestTuple> want525 = {testutil::tuple_of("visit history", "browse", "", "mouse")};
  const auto got346 = dissect(ex.at("TC346")).tuples;
  const auto got525 = dissect(ex.at("TC525")).tuples;
  const bool ok = got346 == want346 && got525 == want525;
  std::string detail;
  for (const auto& t : got346) detail += to_string(t) + " ";
  for (const auto& t : got525) detail += to_string(t) + " ";
  return {ok, detail};
}

Outcome oracle_equivalence() {
  SynthSpec spec;
  spec.n_cases = 20;
  spec.n_projects = 2;
  const auto syn = generate_synthetic_corpus(3, spec);
  const auto g = gold_setup(gold_extractions(syn.corpus), corpus_sentences(syn.corpus), 3);
  std::size_t total = 0, bad = 0;
  for (auto scope : {PairScope::PerProject, PairScope::Global}) {
    auto cfg = g.config;
    cfg.scope = scope;
    const auto got = detect_redundancy(g.cases, g.store, cfg).verdicts;
    bad += oracle::mismatches(got, oracle::detect(g.cases, g.store, cfg));
    total += got.size();
  }
  return {bad == 0, std::to_string(bad) + " mismatches over " + std::to_string(total) + " pairs"};
}

Outcome extraction_learning() {
  const auto start = std::chrono::steady_clock::now();
  SynthSpec spec;
  spec.n_cases = 400;
  spec.n_projects = 4;
  const PipelineConfig cfg;
  const auto syn = generate_synthetic_corpus(cfg.seed, spec);
  // Unsupervised vectors are trained on all summaries; labels never leave the training split.
  const auto store = train_embeddings(corpus_sentences(syn.corpus), cfg.skipgram());
  double ef = 0, rf = 0;
  const auto splits = split_train_test(syn.corpus.size(), 0.8, 11, 5);
  for (const auto& s : splits) {
    const auto train = select(syn.corpus, s.train);
    const auto test = select(syn.corpus, s.test);
    const auto model = train_joint(train, store, cfg.extraction()).model;
    const auto rep = extraction_metrics(extract_all(corpus_of(test), model, store), gold_extractions(test));
    ef += rep.entity_micro.f1.value_or(0.0);
    rf += rep.relation_micro.f1.value_or(0.0);
  }
  ef /= double(splits.size());
  rf /= double(splits.size());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {ef >= kEntityF1Floor && rf >= kRelationF1Floor && secs < kExtractionBudgetSeconds,
          "entity F1 " + fmt(ef) + ", relation F1 " + fmt(rf) + ", " + fmt(secs) + " s"};
}

double worst_gradient_error(LinearHead& head, const HeadGradient& g, const std::function<double()>& loss) {
  const double h = 1e-5;
  double worst = 0.0;
  auto check = [&](double& p, double analytic) {
    const double keep = p;
    p = keep + h;
    const double up = loss();
    p = keep - h;
    const double down = loss();
    p = keep;
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    worst = std::max(worst, scale < 1e-7 ? std::abs(analytic - numeric) * 1e3 : std::abs(analytic - numeric) / scale);
  };
  for (std::size_t i = 0; i < head.weights.size(); ++i) check(head.weights[i], g.weights[i]);
  for (std::size_t i = 0; i < head.bias.size(); ++i) check(head.bias[i], g.bias[i]);
  return worst;
}

Outcome gradient_check() {
  Rng rng(101);
  double worst_entity = 0, worst_relation = 0;
  for (std::size_t inst = 0; inst < kGradientInstances; ++inst) {
    ExtractionModel m(4, ExtractionHyperparams{});
    for (auto* h : {&m.entity_head, &m.relation_head}) {
      for (auto& w : h->weights) w = 0.3 * rng.normal();
      for (auto& b : h->bias) b = 0.3 * rng.normal();
    }
    Vector xe(8), xr(16);
    for (auto& v : xe) v = rng.normal();
    for (auto& v : xr) v = rng.normal();
    const std::size_t le = rng.index(kEntityClassCount);
    HeadGradient ge;
    entity_loss_and_gradient(m, xe, le, &ge);
    worst_entity = std::max(worst_entity, worst_gradient_error(m.entity_head, ge, [&] {
                              return entity_loss_and_gradient(m, xe, le);
                            }));
    const auto head = kAllEntityCategories[1 + rng.index(4)];
    const std::size_t lr = rng.bernoulli(0.5) ? index_of(*relation_for_head(head)) : kRelationNone;
    HeadGradient gr;
    relation_loss_and_gradient(m, xr, head, lr, &gr);
    worst_relation = std::max(worst_relation, worst_gradient_error(m.relation_head, gr, [&] {
                                return relation_loss_and_gradient(m, xr, head, lr);
                              }));
  }
  return {worst_entity < kGradientTolerance && worst_relation < kGradientTolerance,
          "max relative error entity " + fmt(worst_entity) + ", relation " + fmt(worst_relation)};
}

std::set<std::pair<std::string, std::string>> redundant_set(const std::vector<RedundancyVerdict>& v) {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& x : v)
    if (x.redundant) out.emplace(x.id_a, x.id_b);
  return out;
}

Outcome monotonicity() {
  SynthSpec spec;
  spec.n_cases = 100;
  spec.near_pair_rate = 0.3;
  const auto syn = generate_synthetic_corpus(17, spec);
  const auto g = gold_setup(gold_extractions(syn.corpus), corpus_sentences(syn.corpus), 17);
  bool sweep_ok = true;
  std::set<std::pair<std::string, std::string>> previous;
  std::size_t first = 0;
  for (int k = 99; k >= 80; --k) {
    auto cfg = g.config;
    cfg.threshold = k / 100.0;
    const auto now = redundant_set(detect_redundancy(g.cases, g.store, cfg).verdicts);
    if (k == 99) first = now.size();
    sweep_ok = sweep_ok && std::includes(now.begin(), now.end(), previous.begin(), previous.end());
    previous = now;
  }
  const auto full = redundant_set(detect_redundancy(g.cases, g.store, g.config).verdicts);
  bool ablation_ok = true;
  std::string sizes;
  for (auto c : kAllEntityCategories) {
    auto cfg = g.config;
    cfg.excluded[index_of(c)] = true;
    const auto ablated = redundant_set(detect_redundancy(g.cases, g.store, cfg).verdicts);
    ablation_ok = ablation_ok && std::includes(ablated.begin(), ablated.end(), full.begin(), full.end());
    sizes += " " + std::to_string(ablated.size());
  }
  return {sweep_ok && ablation_ok, "sweep " + std::to_string(first) + "->" + std::to_string(previous.size()) +
                                       " pairs; full " + std::to_string(full.size()) + ", ablated" + sizes};
}

Outcome statistics() {
  double worst = 0;
  auto track = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };

  track(pearson({1, 2, 3}, {2, 4, 7}).r, 15.0 / std::sqrt(228.0));
  track(pearson({1, 2, 3}, {2, 4, 7}).p_value, 1.0 - 2.0 / std::numbers::pi * std::atan(5.0 * std::sqrt(3.0)));
  std::vector<bool> ra, rb;
  auto add = [&](std::size_t k, bool x, bool y) {
    ra.insert(ra.end(), k, x);
    rb.insert(rb.end(), k, y);
  };
  add(20, true, true);
  add(5, true, false);
  add(5, false, true);
  add(20, false, false);
  track(cohen_kappa(ra, rb), 0.6);

  const auto sep = mann_whitney_u({1, 2, 3}, {4, 5, 6});
  track(sep.u_a, 0.0);
  track(sep.u_b, 9.0);

  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 3 + rng.index(18);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.normal();
      y[i] = x[i] + rng.normal();
    }
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sx += x[i], sy += y[i], sxx += x[i] * x[i], syy += y[i] * y[i], sxy += x[i] * y[i];
    }
    const double dn = double(n);
    track(pearson(x, y).r, (dn * sxy - sx * sy) / std::sqrt((dn * sxx - sx * sx) * (dn * syy - sy * sy)));

    std::vector<double> a(1 + rng.index(10)), b(1 + rng.index(10));
    for (auto& v : a) v = double(rng.index(5));
    for (auto& v : b) v = double(rng.index(5));
    double u = 0;
    for (double p : a)
      for (double q : b) u += p > q ? 1.0 : (p == q ? 0.5 : 0.0);
    const auto mw = mann_whitney_u(a, b);
    track(mw.u_a, u);
    track(mw.u_a + mw.u_b, double(a.size() * b.size()));
  }
  return {worst <= kStatsTolerance, "max deviation " + fmt(worst)};
}

Outcome sif_property() {
  SynthSpec spec;
  spec.n_cases = 150;
  const auto syn = generate_synthetic_corpus(9, spec);
  SkipGramOptions o;
  o.dim = 40;
  o.epochs = 10;
  const auto store_plain = train_embeddings(corpus_sentences(syn.corpus), o);
  std::vector<Phrase> phrases;
  for (const auto& c : case_tuples(gold_extractions(syn.corpus)))
    for (const auto& t : c.tuples)
      for (auto cat : {EntityCategory::Component, EntityCategory::Manner, EntityCategory::Constraint})
        if (t[cat]) phrases.push_back(*t[cat]);
  const auto ctx = fit_sif(phrases, store_plain);
  if (!ctx.removes_component()) return {false, "degenerate fit"};

  double worst_dot = 0;
  for (const auto& p : phrases) worst_dot = std::max(worst_dot, std::abs(dot(embed_phrase_sif(p, store_plain, ctx), ctx.principal_component)));

  // Power iteration on X^T X over the distinct weighted phrase averages.
  const std::set<Phrase> distinct(phrases.begin(), phrases.end());
  const std::size_t d = store_plain.dim();
  std::vector<std::vector<double>> rows;
  for (const auto& p : distinct) {
    std::vector<double> r(d, 0.0);
    for (const auto& w : p) {
      const double weight = ctx.a / (ctx.a + store_plain.probability(w));
      const auto v = store_plain.vector(w);
      for (std::size_t k = 0; k < d; ++k) r[k] += weight * v[k] / double(p.size());
    }
    rows.push_back(r);
  }
  std::vector<double> v(d, 1.0);
  for (int it = 0; it < 20000; ++it) {
    std::vector<double> xv(rows.size(), 0.0), next(d, 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t k = 0; k < d; ++k) xv[i] += rows[i][k] * v[k];
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t k = 0; k < d; ++k) next[k] += rows[i][k] * xv[i];
    double n = 0;
    for (double x : next) n += x * x;
    n = std::sqrt(n);
    for (auto& x : next) x /= n;
    v = next;
  }
  double same = 0, flipped = 0;
  for (std::size_t k = 0; k < d; ++k) {
    same = std::max(same, std::abs(v[k] - ctx.principal_component[k]));
    flipped = std::max(flipped, std::abs(v[k] + ctx.principal_component[k]));
  }
  const double pc_err = std::min(same, flipped);
  return {worst_dot <= kOrthogonalityTolerance && pc_err <= kPowerIterationTolerance,
          "max |<v,pc>| " + fmt(worst_dot) + ", component deviation " + fmt(pc_err)};
}

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

Outcome determinism() {
  testutil::TempDir dir;
  auto pipeline = [&](const std::string& tag) {
    const auto p = [&](const std::string& name) { return dir.file(tag + "/" + name); };
    const std::string cfg = dir.write(tag + ".json", R"({"seed": 21, "embed_dim": 32})");
    int rc = cli({"--config", cfg, "synth", "--out-dir", dir.file(tag), "--cases", "120"});
    rc |= cli({"--config", cfg, "train-embeddings", "--corpus", p("corpus.jsonl"), "--out", p("vectors.txt")});
    rc |= cli({"--config", cfg, "train-model", "--corpus", p("corpus.jsonl"), "--annotations", p("annotations.jsonl"),
               "--embeddings", p("vectors.txt"), "--out", p("model.json")});
    rc |= cli({"--config", cfg, "extract", "--corpus", p("corpus.jsonl"), "--model", p("model.json"), "--embeddings",
               p("vectors.txt"), "--out", p("extractions.jsonl")});
    rc |= cli({"--config", cfg, "detect", "--corpus", p("corpus.jsonl"), "--extractions", p("extractions.jsonl"),
               "--embeddings", p("vectors.txt"), "--out", p("verdicts.jsonl"), "--report", p("report.txt")});
    return rc;
  };
  if (pipeline("a") != 0 || pipeline("b") != 0) return {false, "pipeline command failed"};
  std::string problems;
  std::size_t bytes = 0;
  for (const auto* name : {"extractions.jsonl", "verdicts.jsonl", "report.txt"}) {
    const auto a = testutil::read_file(dir.file(std::string("a/") + name));
    const auto b = testutil::read_file(dir.file(std::string("b/") + name));
    if (a.empty()) problems += std::string(" ") + name + " empty";
    else if (a != b) problems += std::string(" ") + name + " differs";
    bytes += a.size();
  }
  const auto verdicts = testutil::read_file(dir.file("a/verdicts.jsonl"));
  const auto lines = std::count(verdicts.begin(), verdicts.end(), '\n');
  if (problems.empty())
    return {true, "identical artifacts (" + std::to_string(bytes) + " bytes, " + std::to_string(lines) + " verdicts)"};
  return {false, problems};
}

Outcome precision_mechanism() {
  SynthSpec spec;
  spec.n_cases = 200;
  spec.n_projects = 2;
  spec.redundancy_rate = 0.25;
  spec.near_pair_rate = 0.35;
  const auto syn = generate_synthetic_corpus(5, spec);
  const auto g = gold_setup(gold_extractions(syn.corpus), corpus_sentences(syn.corpus), 5);
  const auto ours = detect_redundancy(g.cases, g.store, g.config);
  const auto m = detection_metrics(ours.verdicts, syn.labels, ours.skipped);
  const auto base = detection_metrics(wholetext_detect(corpus_of(syn.corpus), g.store, g.config.threshold), syn.labels);
  const double p = m.precision.value_or(0.0), pb = base.precision.value_or(0.0);
  return {m.precision && base.precision && p == 1.0 && pb < p,
          "tscope precision " + fmt(p) + " (tp " + std::to_string(m.tp) + "), whole-text precision " + fmt(pb) +
              " (tp " + std::to_string(base.tp) + ", fp " + std::to_string(base.fp) + "), " +
              std::to_string(syn.near_pairs.size()) + " near pairs"};
}

}  // namespace

int main() {
  ScopedWarningHandler quiet([](std::string_view) {});
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"worked examples", worked_examples},       {"tuple transcription", tuple_transcription},
      {"oracle equivalence", oracle_equivalence}, {"extraction learning", extraction_learning},
      {"gradient check", gradient_check},         {"monotonicity", monotonicity},
      {"statistics oracles", statistics},         {"SIF property", sif_property},
      {"determinism", determinism},               {"precision mechanism", precision_mechanism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << "criterion " << i + 1 << " " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << ": "
              << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
