#pragma once

#include <vector>

#include "i3c/errors.hpp"

namespace i3c {

struct EmbeddingVector {
  std::vector<double> values;

  size_t dim() const { return values.size(); }
};

// Cosine similarity. Throws DimensionMismatchError on unequal lengths and
// ZeroVectorError when either vector has zero norm. Summation runs in
// ascending index order so results are reproducible bit for bit.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

// Per-condition scores: inter_condition[i] is the mean cosine between
// condition i and every other condition (1.0 when there is only one),
// to_question[i] is the cosine between condition i and the question.
struct RelevanceScores {
  std::vector<double> inter_condition;
  std::vector<double> to_question;

  size_t size() const { return inter_condition.size(); }
};

RelevanceScores score_conditions(const std::vector<EmbeddingVector>& conditions,
                                 const EmbeddingVector& question);

// Indices of conditions flagged for verification: either score below the
// threshold puts a condition in the set.
struct CandidateSet {
  std::vector<int> indices;  // ascending
  double threshold = 0.0;

  bool contains(int index) const;
};

CandidateSet identify_candidates(const RelevanceScores& scores,
                                 double threshold);

// Reciprocal of the mean condition-to-question cosine. A problem whose
// conditions say little about its question scores high; a non-positive
// mean has no meaningful reciprocal ordering and is flagged invalid.
struct ConfusionScore {
  double value = 0.0;
  bool invalid = false;
};

ConfusionScore confusion_score(const std::vector<EmbeddingVector>& conditions,
                               const EmbeddingVector& question);

// Strict ordering for ranking: invalid scores sort before all valid ones,
// valid scores sort by descending value.
bool more_confusing(const ConfusionScore& a, const ConfusionScore& b);

}  // namespace i3c
