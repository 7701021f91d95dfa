#include "i3c/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "i3c/relevance.hpp"

namespace i3c {

using nlohmann::json;

bool is_correct(const ExtractedAnswer& predicted, const GoldAnswer& gold) {
  switch (predicted.kind) {
    case ExtractedAnswer::Kind::Abstain:
      return false;
    case ExtractedAnswer::Kind::Numeric:
      return gold.kind == AnswerKind::Numeric &&
             std::abs(predicted.numeric_value - gold.numeric_value) < 1e-5;
    case ExtractedAnswer::Kind::Option:
      return gold.kind == AnswerKind::Option && predicted.option == gold.option;
  }
  return false;
}

namespace {

std::unordered_map<std::string, const MathWordProblem*> problems_by_id(
    const std::vector<MathWordProblem>& problems) {
  std::unordered_map<std::string, const MathWordProblem*> map;
  for (const auto& p : problems) map[p.id] = &p;
  return map;
}

const MathWordProblem& problem_for(
    const std::unordered_map<std::string, const MathWordProblem*>& map,
    const AnswerRecord& record) {
  auto it = map.find(record.problem_id);
  if (it == map.end()) {
    throw AnnotationMismatchError("record refers to unknown problem \"" +
                                  record.problem_id + "\"");
  }
  return *it->second;
}

}  // namespace

double accuracy(const std::vector<AnswerRecord>& records,
                const std::vector<MathWordProblem>& problems) {
  if (records.empty()) {
    throw EmptyRecordSetError("accuracy over an empty record set");
  }
  auto map = problems_by_id(problems);
  long n_correct = 0;
  for (const auto& r : records) {
    if (is_correct(r.extracted, problem_for(map, r).gold_answer)) ++n_correct;
  }
  return static_cast<double>(n_correct) / static_cast<double>(records.size());
}

namespace {

std::string bucket_label(int steps) {
  if (steps <= 2) return "2";
  if (steps >= 5) return "5+";
  return std::to_string(steps);
}

}  // namespace

StepsBreakdown steps_breakdown(const std::vector<AnswerRecord>& records,
                               const std::vector<MathWordProblem>& problems) {
  auto map = problems_by_id(problems);
  StepsBreakdown out;
  for (const auto& r : records) {
    const MathWordProblem& problem = problem_for(map, r);
    if (!problem.n_reasoning_steps) {
      out.missing_step_ids.push_back(problem.id);
      continue;
    }
    bool correct = is_correct(r.extracted, problem.gold_answer);
    BucketAccuracy& bucket = out.buckets[bucket_label(*problem.n_reasoning_steps)];
    ++bucket.n;
    ++out.all.n;
    if (correct) {
      ++bucket.n_correct;
      ++out.all.n_correct;
    }
  }
  return out;
}

RecallReport recall_sweep(const std::vector<MathWordProblem>& problems,
                          const std::vector<double>& theta_grid,
                          Provider& provider) {
  struct Scored {
    RelevanceScores scores;
    const std::set<int>* ground_truth;
  };
  std::vector<Scored> scored;
  long total_ground_truth = 0;
  long total_conditions = 0;
  for (const auto& p : problems) {
    if (!p.irrelevant_ground_truth) continue;
    if (p.conditions.empty()) continue;
    std::vector<std::string> texts;
    texts.reserve(p.conditions.size());
    for (const auto& c : p.conditions) texts.push_back(c.text);
    auto vectors = provider.embed_batch(texts);
    auto question = provider.embed(p.question);
    scored.push_back({score_conditions(vectors, question),
                      &*p.irrelevant_ground_truth});
    total_ground_truth += static_cast<long>(p.irrelevant_ground_truth->size());
    total_conditions += static_cast<long>(p.conditions.size());
  }
  if (scored.empty()) {
    throw NoGroundTruthError("no problem carries an irrelevance annotation");
  }

  RecallReport report;
  report.points.reserve(theta_grid.size());
  for (double theta : theta_grid) {
    long found = 0;
    long candidates = 0;
    for (const auto& s : scored) {
      CandidateSet set = identify_candidates(s.scores, theta);
      candidates += static_cast<long>(set.indices.size());
      for (int index : set.indices) {
        if (s.ground_truth->count(index)) ++found;
      }
    }
    RecallPoint point;
    point.theta = theta;
    point.recall = total_ground_truth == 0
                       ? 0.0
                       : static_cast<double>(found) / total_ground_truth;
    point.verified_fraction =
        total_conditions == 0
            ? 0.0
            : static_cast<double>(candidates) / total_conditions;
    point.mean_calls = static_cast<double>(candidates) /
                       static_cast<double>(scored.size());
    report.points.push_back(point);
  }
  return report;
}

std::string RecallReport::to_csv() const {
  std::ostringstream out;
  out << "theta,recall,verified_fraction,mean_calls\n";
  for (const auto& p : points) {
    out << p.theta << "," << p.recall << "," << p.verified_fraction << ","
        << p.mean_calls << "\n";
  }
  return out.str();
}

std::map<std::string, MethodCost> cost_summary(
    const std::vector<AnswerRecord>& records) {
  struct Sums {
    long n = 0;
    long prompt = 0;
    long completion = 0;
    long wall = 0;
    long calls = 0;
  };
  std::map<std::string, Sums> sums;
  for (const auto& r : records) {
    Sums& s = sums[r.method_label];
    ++s.n;
    s.prompt += r.prompt_tokens;
    s.completion += r.completion_tokens;
    s.wall += r.wall_ms;
    s.calls += r.n_llm_calls;
  }
  std::map<std::string, MethodCost> out;
  for (const auto& [label, s] : sums) {
    MethodCost cost;
    cost.n_records = s.n;
    cost.mean_prompt_tokens = static_cast<double>(s.prompt) / s.n;
    cost.mean_completion_tokens = static_cast<double>(s.completion) / s.n;
    cost.mean_wall_ms = static_cast<double>(s.wall) / s.n;
    cost.mean_calls = static_cast<double>(s.calls) / s.n;
    out[label] = cost;
  }
  return out;
}

EvalReport build_eval_report(const std::vector<AnswerRecord>& records,
                             const std::vector<MathWordProblem>& problems) {
  auto map = problems_by_id(problems);
  std::map<std::string, std::vector<AnswerRecord>> by_method;
  for (const auto& r : records) by_method[r.method_label].push_back(r);

  EvalReport report;
  auto costs = cost_summary(records);
  for (const auto& [label, method_records] : by_method) {
    MethodReport method;
    method.n_problems = static_cast<int>(method_records.size());
    method.accuracy = accuracy(method_records, problems);
    method.steps = steps_breakdown(method_records, problems);
    method.cost = costs.at(label);
    long verified = 0;
    long agreed = 0;
    for (const auto& r : method_records) {
      if (r.extracted.is_abstain()) ++method.n_abstains;
      const MathWordProblem& problem = problem_for(map, r);
      if (!problem.irrelevant_ground_truth) continue;
      const auto& annotated = *problem.irrelevant_ground_truth;
      for (size_t i = 0; i < r.verified_indices.size(); ++i) {
        ++verified;
        bool marked_irrelevant =
            i < r.verified_verdicts.size() &&
            r.verified_verdicts[i] == Verdict::Irrelevant;
        if (marked_irrelevant == (annotated.count(r.verified_indices[i]) > 0)) {
          ++agreed;
        }
      }
    }
    if (verified > 0) {
      method.verdict_agreement = static_cast<double>(agreed) / verified;
    }
    report.methods[label] = std::move(method);
  }
  return report;
}

std::string EvalReport::to_json() const {
  json out;
  out["methods"] = json::object();
  for (const auto& [label, m] : methods) {
    json jm;
    jm["accuracy"] = m.accuracy;
    jm["n_problems"] = m.n_problems;
    jm["n_abstains"] = m.n_abstains;
    json steps = json::object();
    for (const auto& [bucket, acc] : m.steps.buckets) {
      steps[bucket] = {{"n", acc.n}, {"accuracy", acc.value()}};
    }
    if (m.steps.all.n > 0) {
      steps["all"] = {{"n", m.steps.all.n}, {"accuracy", m.steps.all.value()}};
    }
    jm["steps"] = steps;
    if (!m.steps.missing_step_ids.empty()) {
      jm["missing_step_ids"] = m.steps.missing_step_ids;
    }
    jm["cost"] = {{"n_records", m.cost.n_records},
                  {"mean_prompt_tokens", m.cost.mean_prompt_tokens},
                  {"mean_completion_tokens", m.cost.mean_completion_tokens},
                  {"mean_wall_ms", m.cost.mean_wall_ms},
                  {"mean_calls", m.cost.mean_calls}};
    if (m.verdict_agreement) {
      jm["verdict_agreement"] = *m.verdict_agreement;
    }
    out["methods"][label] = jm;
  }
  return out.dump(2);
}

std::string EvalReport::to_text() const {
  std::ostringstream out;
  out << std::left << std::setw(22) << "method" << std::right << std::setw(10)
      << "accuracy" << std::setw(8) << "n" << std::setw(10) << "abstain"
      << std::setw(12) << "tokens" << std::setw(10) << "ms" << std::setw(8)
      << "calls" << "\n";
  out << std::string(80, '-') << "\n";
  out << std::fixed;
  for (const auto& [label, m] : methods) {
    double tokens = m.cost.mean_prompt_tokens + m.cost.mean_completion_tokens;
    out << std::left << std::setw(22) << label << std::right
        << std::setprecision(4) << std::setw(10) << m.accuracy << std::setw(8)
        << m.n_problems << std::setw(10) << m.n_abstains
        << std::setprecision(1) << std::setw(12) << tokens << std::setw(10)
        << m.cost.mean_wall_ms << std::setw(8) << m.cost.mean_calls << "\n";
    if (!m.steps.buckets.empty()) {
      out << "  steps:";
      for (const auto& [bucket, acc] : m.steps.buckets) {
        out << " " << bucket << "=" << std::setprecision(4) << acc.value()
            << " (" << acc.n << ")";
      }
      out << " all=" << std::setprecision(4) << m.steps.all.value() << "\n";
    }
    if (m.verdict_agreement) {
      out << "  verdict agreement: " << std::setprecision(4)
          << *m.verdict_agreement << "\n";
    }
  }
  return out.str();
}

}  // namespace i3c
