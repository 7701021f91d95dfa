#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "i3c/prompts.hpp"

namespace i3c {

// Strictly below 1e-5 absolute error for numeric answers, exact letter
// match for options. Abstentions and kind mismatches are incorrect.
bool is_correct(const ExtractedAnswer& predicted, const GoldAnswer& gold);

// Fraction of records whose extracted answer matches the gold answer of
// the problem with the same id. Throws EmptyRecordSetError on no records
// and AnnotationMismatchError when a record has no matching problem.
double accuracy(const std::vector<AnswerRecord>& records,
                const std::vector<MathWordProblem>& problems);

struct BucketAccuracy {
  int n = 0;
  int n_correct = 0;

  double value() const { return n == 0 ? 0.0 : double(n_correct) / n; }
};

// Accuracy by the number of reasoning steps in the gold solution.
// Problems with one or two steps land in "2"; five or more in "5+".
// Buckets with no data are absent. Records whose problem carries no
// step count are excluded and listed.
struct StepsBreakdown {
  std::map<std::string, BucketAccuracy> buckets;
  BucketAccuracy all;
  std::vector<std::string> missing_step_ids;
};

StepsBreakdown steps_breakdown(const std::vector<AnswerRecord>& records,
                               const std::vector<MathWordProblem>& problems);

struct RecallPoint {
  double theta = 0.0;
  double recall = 0.0;             // found irrelevant / annotated irrelevant
  double verified_fraction = 0.0;  // candidates / all conditions
  double mean_calls = 0.0;         // candidates per problem
};

struct RecallReport {
  std::vector<RecallPoint> points;

  std::string to_csv() const;  // "theta,recall,verified_fraction,mean_calls"
};

// Sweeps the candidate threshold over the grid against annotated
// problems. Embeddings come from the provider, once per problem; only
// the thresholding is repeated. Problems without an annotation are
// skipped; if none carries one, throws NoGroundTruthError.
RecallReport recall_sweep(const std::vector<MathWordProblem>& problems,
                          const std::vector<double>& theta_grid,
                          Provider& provider);

struct MethodCost {
  long n_records = 0;
  double mean_prompt_tokens = 0.0;
  double mean_completion_tokens = 0.0;
  double mean_wall_ms = 0.0;
  double mean_calls = 0.0;
};

// Per-method cost averages, keyed by method label. Methods without
// records simply have no row.
std::map<std::string, MethodCost> cost_summary(
    const std::vector<AnswerRecord>& records);

struct MethodReport {
  double accuracy = 0.0;
  int n_problems = 0;
  int n_abstains = 0;
  StepsBreakdown steps;
  MethodCost cost;
  // How often a verification verdict agreed with the problem's
  // irrelevance annotation, over verified candidates of annotated
  // problems. Absent when nothing was verified or nothing is annotated.
  std::optional<double> verdict_agreement;
};

struct EvalReport {
  std::map<std::string, MethodReport> methods;

  std::string to_json() const;
  std::string to_text() const;
};

// Groups records by method label and assembles the full report.
EvalReport build_eval_report(const std::vector<AnswerRecord>& records,
                             const std::vector<MathWordProblem>& problems);

}  // namespace i3c
