#pragma once

#include <cstdint>
#include <vector>

#include "i3c/prompts.hpp"
#include "i3c/relevance.hpp"

namespace i3c {

struct RankedProblem {
  MathWordProblem problem;
  ConfusionScore confusion;
  int rank = 0;  // 1-based, most confusing first
};

// Scores every corpus problem by the reciprocal mean condition-question
// cosine and sorts descending: invalid scores first, then by value, ties
// by problem id. Embeddings come from the provider. Every problem must
// have at least one condition.
std::vector<RankedProblem> rank_by_confusion(
    const std::vector<MathWordProblem>& corpus, Provider& provider);

enum class SelectionMode { High, Medium, Low };

struct SelectOptions {
  int k = 8;
  SelectionMode mode = SelectionMode::High;
  uint64_t seed = 0;           // Medium mode sampling
  bool filter_correct = false; // drop demos whose answer misses gold
  SolveOptions solve;          // settings for the generation pass
};

// The picking stage alone: top-K for High, bottom-K for Low, a seeded
// uniform sample without replacement for Medium. Throws KTooLargeError
// when K exceeds the ranking.
std::vector<RankedProblem> select_problems(
    const std::vector<RankedProblem>& ranked, int k, SelectionMode mode,
    uint64_t seed);

// Picks K problems from the ranking, answers each once with plain
// zero-shot chain-of-thought, and packages problem text plus generated
// reasoning as demonstrations. With filter_correct, demos whose
// extracted answer misses the gold answer are dropped, so fewer than K
// may come back. Throws KTooLargeError when K exceeds the corpus.
std::vector<Demonstration> build_demonstrations(
    const std::vector<RankedProblem>& ranked, Provider& provider,
    const SelectOptions& options);

}  // namespace i3c
