#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "tscope/compare.hpp"
#include "tscope/corpus.hpp"
#include "tscope/embeddings.hpp"

namespace tscope {

// Whole-text baseline: a pair is redundant when the cosine of the two whole-summary
// average embeddings exceeds the threshold. Byte-identical summaries always match.
// Verdicts are symmetric (direction "mutual" when redundant).
inline std::vector<RedundancyVerdict> wholetext_detect(const Corpus& corpus, const EmbeddingStore& store,
                                                       double threshold, PairScope scope = PairScope::PerProject) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("threshold must lie in (0, 1]");
  std::vector<const TestCase*> cases;
  for (const auto& tc : corpus.cases) cases.push_back(&tc);
  std::sort(cases.begin(), cases.end(), [](auto* x, auto* y) { return x->id < y->id; });
  std::vector<Vector> vecs;
  for (const auto* tc : cases) {
    Tokens tokens;
    try {
      tokens = assemble_sequence(*tc).flat_tokens();
    } catch (const PreprocessError&) {
    }
    vecs.push_back(embed_phrase_average(tokens, store));
  }
  std::vector<RedundancyVerdict> out;
  for (std::size_t i = 0; i < cases.size(); ++i)
    for (std::size_t j = i + 1; j < cases.size(); ++j) {
      if (scope == PairScope::PerProject && cases[i]->project != cases[j]->project) continue;
      bool redundant = cases[i]->summary == cases[j]->summary;
      if (!redundant) {
        try {
          redundant = cosine(vecs[i], vecs[j]) > threshold;
        } catch (const SimilarityError&) {
          warn("baseline: skipping pair " + cases[i]->id + "/" + cases[j]->id + " (zero vector)");
          continue;
        }
      }
      RedundancyVerdict v;
      v.id_a = cases[i]->id;
      v.id_b = cases[j]->id;
      v.a_covers_b = v.b_covers_a = v.redundant = redundant;
      out.push_back(std::move(v));
    }
  return out;
}

}  // namespace tscope
