#include "i3c/relevance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace i3c {

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatchError("cosine: dimensions differ (" +
                                 std::to_string(a.dim()) + " vs " +
                                 std::to_string(b.dim()) + ")");
  }
  if (a.dim() == 0) {
    throw DimensionMismatchError("cosine: empty vectors");
  }
  double dot = 0.0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
    norm_a += a.values[i] * a.values[i];
    norm_b += b.values[i] * b.values[i];
  }
  if (norm_a == 0.0 || norm_b == 0.0) {
    throw ZeroVectorError("cosine: zero-norm vector");
  }
  return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

RelevanceScores score_conditions(const std::vector<EmbeddingVector>& conditions,
                                 const EmbeddingVector& question) {
  const size_t n = conditions.size();
  if (n == 0) {
    throw DimensionMismatchError("score_conditions: no condition embeddings");
  }
  RelevanceScores scores;
  scores.inter_condition.reserve(n);
  scores.to_question.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    if (n == 1) {
      scores.inter_condition.push_back(1.0);
    } else {
      double sum = 0.0;
      for (size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        sum += cosine_similarity(conditions[i], conditions[j]);
      }
      scores.inter_condition.push_back(sum / static_cast<double>(n - 1));
    }
    scores.to_question.push_back(cosine_similarity(conditions[i], question));
  }
  return scores;
}

bool CandidateSet::contains(int index) const {
  return std::binary_search(indices.begin(), indices.end(), index);
}

CandidateSet identify_candidates(const RelevanceScores& scores,
                                 double threshold) {
  CandidateSet set;
  set.threshold = threshold;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (scores.inter_condition[i] < threshold ||
        scores.to_question[i] < threshold) {
      set.indices.push_back(static_cast<int>(i));
    }
  }
  return set;
}

ConfusionScore confusion_score(const std::vector<EmbeddingVector>& conditions,
                               const EmbeddingVector& question) {
  const size_t n = conditions.size();
  if (n == 0) {
    throw DimensionMismatchError("confusion_score: no condition embeddings");
  }
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sum += cosine_similarity(conditions[i], question);
  }
  double mean = sum / static_cast<double>(n);
  ConfusionScore score;
  if (mean <= 0.0) {
    score.invalid = true;
    score.value = 0.0;
  } else {
    score.value = 1.0 / mean;
  }
  return score;
}

bool more_confusing(const ConfusionScore& a, const ConfusionScore& b) {
  if (a.invalid != b.invalid) return a.invalid;
  if (a.invalid) return false;  // both invalid: equal rank here
  return a.value > b.value;
}

}  // namespace i3c
