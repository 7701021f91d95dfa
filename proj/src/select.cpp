#include "i3c/select.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "i3c/eval.hpp"

namespace i3c {

std::vector<RankedProblem> rank_by_confusion(
    const std::vector<MathWordProblem>& corpus, Provider& provider) {
  std::vector<RankedProblem> ranked;
  ranked.reserve(corpus.size());
  for (const auto& problem : corpus) {
    if (problem.conditions.empty()) {
      throw PreconditionError("problem " + problem.id +
                              " has no conditions to score");
    }
    std::vector<std::string> texts;
    texts.reserve(problem.conditions.size());
    for (const auto& c : problem.conditions) texts.push_back(c.text);
    auto vectors = provider.embed_batch(texts);
    auto question = provider.embed(problem.question);
    RankedProblem entry;
    entry.problem = problem;
    entry.confusion = confusion_score(vectors, question);
    ranked.push_back(std::move(entry));
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const RankedProblem& a, const RankedProblem& b) {
              if (more_confusing(a.confusion, b.confusion)) return true;
              if (more_confusing(b.confusion, a.confusion)) return false;
              return a.problem.id < b.problem.id;
            });
  for (size_t i = 0; i < ranked.size(); ++i) {
    ranked[i].rank = static_cast<int>(i) + 1;
  }
  return ranked;
}

namespace {

// K positions drawn without replacement: a partial Fisher-Yates pass
// over the index list, with modulo draws so the result only depends on
// the seed, not the platform.
std::vector<size_t> sample_without_replacement(size_t n, size_t k,
                                               uint64_t seed) {
  std::vector<size_t> indices(n);
  for (size_t i = 0; i < n; ++i) indices[i] = i;
  std::mt19937 gen(static_cast<uint32_t>(seed));
  for (size_t i = 0; i < k; ++i) {
    size_t j = i + gen() % (n - i);
    std::swap(indices[i], indices[j]);
  }
  indices.resize(k);
  return indices;
}

}  // namespace

std::vector<RankedProblem> select_problems(
    const std::vector<RankedProblem>& ranked, int k, SelectionMode mode,
    uint64_t seed) {
  if (k <= 0) {
    throw PreconditionError("demonstration count must be positive");
  }
  const size_t n = ranked.size();
  const size_t want = static_cast<size_t>(k);
  if (want > n) {
    throw KTooLargeError("asked for " + std::to_string(want) +
                         " demonstrations from " + std::to_string(n) +
                         " problems");
  }
  std::vector<RankedProblem> picked;
  picked.reserve(want);
  switch (mode) {
    case SelectionMode::High:
      for (size_t i = 0; i < want; ++i) picked.push_back(ranked[i]);
      break;
    case SelectionMode::Low:
      for (size_t i = n - want; i < n; ++i) picked.push_back(ranked[i]);
      break;
    case SelectionMode::Medium:
      for (size_t index : sample_without_replacement(n, want, seed)) {
        picked.push_back(ranked[index]);
      }
      break;
  }
  return picked;
}

std::vector<Demonstration> build_demonstrations(
    const std::vector<RankedProblem>& ranked, Provider& provider,
    const SelectOptions& options) {
  auto picked =
      select_problems(ranked, options.k, options.mode, options.seed);

  SolveContext context{provider, options.solve};
  auto method = PromptMethod::make(MethodName::ZeroShotCoT);
  std::vector<Demonstration> demos;
  demos.reserve(picked.size());
  for (const RankedProblem& entry : picked) {
    AnswerRecord record = solve(entry.problem, method, context);
    if (options.filter_correct &&
        !is_correct(record.extracted, entry.problem.gold_answer)) {
      continue;
    }
    Demonstration demo;
    demo.problem_text = std::string(detail::trim(entry.problem.raw_text));
    demo.reasoning_path = record.reasoning_path;
    demos.push_back(std::move(demo));
  }
  return demos;
}

}  // namespace i3c
