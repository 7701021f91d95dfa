#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "i3c/eval.hpp"
#include "testing_support.hpp"

using namespace i3c;
using namespace i3c::testing;

TEST_CASE("correctness uses a strict error bound") {
  auto gold = GoldAnswer::numeric(59);
  CHECK(is_correct(ExtractedAnswer::numeric(59), gold));
  CHECK(is_correct(ExtractedAnswer::numeric(59 + 9.9e-6), gold));
  CHECK(is_correct(ExtractedAnswer::numeric(59 - 9.9e-6), gold));
  CHECK_FALSE(is_correct(ExtractedAnswer::numeric(59 + 1e-5), gold));
  CHECK_FALSE(is_correct(ExtractedAnswer::numeric(59 - 1e-5), gold));
  CHECK_FALSE(is_correct(ExtractedAnswer::numeric(59 + 1.1e-5), gold));
  CHECK_FALSE(is_correct(ExtractedAnswer::numeric(60), gold));
  CHECK_FALSE(is_correct(ExtractedAnswer::abstain(), gold));
}

TEST_CASE("option answers need an exact letter match") {
  auto gold = GoldAnswer::option_label('C');
  CHECK(is_correct(ExtractedAnswer::option_label('C'), gold));
  CHECK_FALSE(is_correct(ExtractedAnswer::option_label('B'), gold));
  CHECK_FALSE(is_correct(ExtractedAnswer::abstain(), gold));
  // A number never satisfies an option gold, and vice versa.
  CHECK_FALSE(is_correct(ExtractedAnswer::numeric(3), gold));
  CHECK_FALSE(is_correct(ExtractedAnswer::option_label('C'),
                         GoldAnswer::numeric(3)));
}

namespace {

MathWordProblem tiny_problem(const std::string& id, double gold,
                             std::optional<int> steps = {},
                             std::optional<std::set<int>> irrelevant = {}) {
  return make_problem(id, "Ann has 1 pen. Ben has 2 pens. How many pens?",
                      GoldAnswer::numeric(gold), steps, irrelevant);
}

AnswerRecord record_for(const std::string& id, const std::string& method,
                        ExtractedAnswer extracted) {
  AnswerRecord r;
  r.problem_id = id;
  r.method_label = method;
  r.extracted = extracted;
  return r;
}

}  // namespace

TEST_CASE("accuracy is the fraction of matching records") {
  std::vector<MathWordProblem> problems = {
      tiny_problem("a", 3), tiny_problem("b", 4), tiny_problem("c", 5),
      tiny_problem("d", 6)};
  std::vector<AnswerRecord> records = {
      record_for("a", "direct", ExtractedAnswer::numeric(3)),
      record_for("b", "direct", ExtractedAnswer::numeric(4)),
      record_for("c", "direct", ExtractedAnswer::numeric(99)),
      record_for("d", "direct", ExtractedAnswer::numeric(6)),
  };
  CHECK(accuracy(records, problems) == 0.75);
  records.resize(2);
  CHECK(accuracy(records, problems) == 1.0);
}

TEST_CASE("accuracy rejects empty input and unknown ids") {
  std::vector<MathWordProblem> problems = {tiny_problem("a", 3)};
  CHECK_THROWS_AS(accuracy({}, problems), EmptyRecordSetError);
  std::vector<AnswerRecord> records = {
      record_for("ghost", "direct", ExtractedAnswer::numeric(3))};
  CHECK_THROWS_AS(accuracy(records, problems), AnnotationMismatchError);
}

TEST_CASE("step buckets follow the annotation") {
  std::vector<MathWordProblem> problems = {
      tiny_problem("a", 1, 2), tiny_problem("b", 1, 3), tiny_problem("c", 1, 5),
      tiny_problem("d", 1, 7)};
  std::vector<AnswerRecord> records = {
      record_for("a", "direct", ExtractedAnswer::numeric(1)),   // correct
      record_for("b", "direct", ExtractedAnswer::numeric(9)),   // wrong
      record_for("c", "direct", ExtractedAnswer::numeric(1)),   // correct
      record_for("d", "direct", ExtractedAnswer::numeric(1)),   // correct
  };
  auto breakdown = steps_breakdown(records, problems);
  REQUIRE(breakdown.buckets.count("2") == 1);
  REQUIRE(breakdown.buckets.count("3") == 1);
  REQUIRE(breakdown.buckets.count("5+") == 1);
  CHECK(breakdown.buckets.count("4") == 0);
  CHECK(breakdown.buckets.at("2").value() == 1.0);
  CHECK(breakdown.buckets.at("3").value() == 0.0);
  CHECK(breakdown.buckets.at("5+").n == 2);
  CHECK(breakdown.buckets.at("5+").value() == 1.0);
  CHECK(breakdown.all.n == 4);
  CHECK(breakdown.all.value() == 0.75);
  CHECK(breakdown.missing_step_ids.empty());
}

TEST_CASE("short problems fold into the first bucket") {
  std::vector<MathWordProblem> problems = {tiny_problem("a", 1, 1),
                                           tiny_problem("b", 1, 2)};
  std::vector<AnswerRecord> records = {
      record_for("a", "direct", ExtractedAnswer::numeric(1)),
      record_for("b", "direct", ExtractedAnswer::numeric(1)),
  };
  auto breakdown = steps_breakdown(records, problems);
  CHECK(breakdown.buckets.size() == 1);
  CHECK(breakdown.buckets.at("2").n == 2);
}

TEST_CASE("records without step annotations are listed, not dropped silently") {
  std::vector<MathWordProblem> problems = {tiny_problem("a", 1, 2),
                                           tiny_problem("b", 1)};
  std::vector<AnswerRecord> records = {
      record_for("a", "direct", ExtractedAnswer::numeric(1)),
      record_for("b", "direct", ExtractedAnswer::numeric(1)),
  };
  auto breakdown = steps_breakdown(records, problems);
  CHECK(breakdown.all.n == 1);
  REQUIRE(breakdown.missing_step_ids.size() == 1);
  CHECK(breakdown.missing_step_ids[0] == "b");
}

TEST_CASE("bucket accuracies recombine to the total exactly") {
  std::vector<MathWordProblem> problems;
  std::vector<AnswerRecord> records;
  // 12 problems over a mix of step counts and outcomes.
  int step_plan[] = {2, 2, 3, 3, 3, 4, 5, 5, 6, 7, 8, 2};
  for (int i = 0; i < 12; ++i) {
    std::string id = "p" + std::to_string(i);
    problems.push_back(tiny_problem(id, 1, step_plan[i]));
    double answered = (i % 3 == 0) ? 9 : 1;
    records.push_back(record_for(id, "direct", ExtractedAnswer::numeric(answered)));
  }
  auto breakdown = steps_breakdown(records, problems);
  int n = 0;
  int n_correct = 0;
  for (const auto& [label, bucket] : breakdown.buckets) {
    n += bucket.n;
    n_correct += bucket.n_correct;
  }
  CHECK(n == breakdown.all.n);
  CHECK(n_correct == breakdown.all.n_correct);
  CHECK(breakdown.all.n == 12);
}

namespace {

// Embeddings pinned per sentence so every score below is hand-checkable.
EmbedTransport mapped_embeddings() {
  std::map<std::string, std::vector<double>> table = {
      {"Alpha beta.", {1.0, 0.0}},
      {"Gamma delta.", {0.6, 0.8}},
      {"Query one?", {1.0, 0.0}},
      {"One two.", {1.0, 0.0}},
      {"Three four.", {0.8, 0.6}},
      {"Five six.", {0.0, 1.0}},
      {"Query two?", {1.0, 0.0}},
  };
  return [table](const std::vector<std::string>& texts) {
    std::vector<std::vector<double>> out;
    for (const auto& t : texts) {
      auto it = table.find(t);
      if (it == table.end()) throw std::runtime_error("unmapped text " + t);
      out.push_back(it->second);
    }
    return out;
  };
}

Provider mapped_provider() {
  ChatTransport chat = [](const CompletionRequest&) -> CompletionResponse {
    throw std::runtime_error("no chat expected in sweep");
  };
  return Provider(StoreMode::Passthrough, nullptr, chat, mapped_embeddings(),
                  2);
}

std::vector<MathWordProblem> sweep_fixture() {
  return {
      make_problem("p1", "Alpha beta. Gamma delta. Query one?",
                   GoldAnswer::numeric(1), {}, std::set<int>{1}),
      make_problem("p2", "One two. Three four. Five six. Query two?",
                   GoldAnswer::numeric(1), {}, std::set<int>{2}),
  };
}

}  // namespace

TEST_CASE("threshold sweep against hand-scored embeddings") {
  // Condition scores, worked out from the pinned vectors:
  //   p1: inter = [0.6, 0.6], to-question = [1.0, 0.6], annotated {1}
  //   p2: inter = [0.4, 0.7, 0.3], to-question = [1.0, 0.8, 0.0], annotated {2}
  Provider provider = mapped_provider();
  auto problems = sweep_fixture();
  auto report = recall_sweep(problems, {0.2, 0.5, 0.65, 0.9}, provider);
  REQUIRE(report.points.size() == 4);

  CHECK(report.points[0].theta == 0.2);
  CHECK(report.points[0].recall == 0.5);              // only p2's c2
  CHECK(report.points[0].verified_fraction == 0.2);   // 1 of 5
  CHECK(report.points[0].mean_calls == 0.5);

  CHECK(report.points[1].recall == 0.5);              // p2's c0 and c2
  CHECK(report.points[1].verified_fraction == 0.4);
  CHECK(report.points[1].mean_calls == 1.0);

  CHECK(report.points[2].recall == 1.0);              // both annotations found
  CHECK(report.points[2].verified_fraction == 0.8);
  CHECK(report.points[2].mean_calls == 2.0);

  CHECK(report.points[3].recall == 1.0);              // everything flagged
  CHECK(report.points[3].verified_fraction == 1.0);
  CHECK(report.points[3].mean_calls == 2.5);
}

TEST_CASE("sweep skips unannotated problems and rejects an unannotated corpus") {
  Provider provider = mapped_provider();
  auto problems = sweep_fixture();
  problems.push_back(make_problem("p3", "Alpha beta. Query one?",
                                  GoldAnswer::numeric(1)));
  auto report = recall_sweep(problems, {0.9}, provider);
  // Same totals as without p3: it carries no annotation.
  CHECK(report.points[0].mean_calls == 2.5);

  std::vector<MathWordProblem> bare = {
      make_problem("q", "Alpha beta. Query one?", GoldAnswer::numeric(1))};
  CHECK_THROWS_AS(recall_sweep(bare, {0.5}, provider), NoGroundTruthError);
}

TEST_CASE("recall and verified fraction never decrease in theta") {
  Provider provider(StoreMode::Passthrough, nullptr,
                    make_stub_chat_transport(), make_stub_embed_transport(24),
                    24);
  std::vector<MathWordProblem> problems = {
      make_problem("r0",
                   "Lea buys 4 books. The shop sells candles. A red kite "
                   "flies far away. How many books does Lea have?",
                   GoldAnswer::numeric(4), {}, std::set<int>{1, 2}),
      make_problem("r1",
                   "Sam ran 3 miles. He rested 10 minutes. Pigeons like "
                   "bread crumbs. How far did Sam run?",
                   GoldAnswer::numeric(3), {}, std::set<int>{2}),
      make_problem("r2",
                   "A tank holds 60 liters. A pump moves 5 liters a minute. "
                   "How long to fill the tank?",
                   GoldAnswer::numeric(12), {}, std::set<int>{}),
  };
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(-1.0 + 0.1 * i);
  auto report = recall_sweep(problems, grid, provider);
  for (size_t i = 1; i < report.points.size(); ++i) {
    CHECK(report.points[i].recall >= report.points[i - 1].recall);
    CHECK(report.points[i].verified_fraction >=
          report.points[i - 1].verified_fraction);
    CHECK(report.points[i].mean_calls >= report.points[i - 1].mean_calls);
  }
}

TEST_CASE("sweep report renders as csv") {
  Provider provider = mapped_provider();
  auto report = recall_sweep(sweep_fixture(), {0.2, 0.65}, provider);
  std::string csv = report.to_csv();
  CHECK(csv.rfind("theta,recall,verified_fraction,mean_calls\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.find("0.2,0.5,0.2,0.5\n") != std::string::npos);
  CHECK(csv.find("0.65,1,0.8,2\n") != std::string::npos);
}

namespace {

AnswerRecord costed_record(const std::string& id, const std::string& method,
                           long prompt, long completion, long wall, int calls) {
  AnswerRecord r = record_for(id, method, ExtractedAnswer::numeric(1));
  r.prompt_tokens = prompt;
  r.completion_tokens = completion;
  r.wall_ms = wall;
  r.n_llm_calls = calls;
  return r;
}

}  // namespace

TEST_CASE("cost summary averages per method") {
  std::vector<AnswerRecord> records = {
      costed_record("a", "direct", 100, 10, 40, 2),
      costed_record("b", "direct", 200, 30, 60, 4),
      costed_record("a", "ps", 500, 50, 90, 2),
  };
  auto costs = cost_summary(records);
  REQUIRE(costs.size() == 2);
  CHECK(costs.at("direct").n_records == 2);
  CHECK(costs.at("direct").mean_prompt_tokens == 150.0);
  CHECK(costs.at("direct").mean_completion_tokens == 20.0);
  CHECK(costs.at("direct").mean_wall_ms == 50.0);
  CHECK(costs.at("direct").mean_calls == 3.0);
  CHECK(costs.at("ps").n_records == 1);
  CHECK(costs.at("ps").mean_calls == 2.0);
  CHECK(cost_summary({}).empty());
}

TEST_CASE("full report ties methods, buckets and verdict agreement together") {
  std::vector<MathWordProblem> problems = {
      tiny_problem("a", 3, 2, std::set<int>{1}),
      tiny_problem("b", 4, 3, std::set<int>{}),
  };
  AnswerRecord r1 = costed_record("a", "zero-shot-cot+i3c", 100, 10, 5, 4);
  r1.extracted = ExtractedAnswer::numeric(3);
  r1.verified_indices = {0, 1};
  r1.verified_verdicts = {Verdict::Irrelevant, Verdict::Irrelevant};
  AnswerRecord r2 = costed_record("b", "zero-shot-cot+i3c", 100, 10, 5, 3);
  r2.extracted = ExtractedAnswer::abstain();
  r2.verified_indices = {0};
  r2.verified_verdicts = {Verdict::Relevant};
  AnswerRecord r3 = costed_record("a", "direct", 50, 5, 2, 2);
  r3.extracted = ExtractedAnswer::numeric(9);

  auto report = build_eval_report({r1, r2, r3}, problems);
  REQUIRE(report.methods.count("zero-shot-cot+i3c") == 1);
  REQUIRE(report.methods.count("direct") == 1);

  const auto& with = report.methods.at("zero-shot-cot+i3c");
  CHECK(with.n_problems == 2);
  CHECK(with.accuracy == 0.5);
  CHECK(with.n_abstains == 1);
  CHECK(with.steps.buckets.at("2").n == 1);
  CHECK(with.steps.buckets.at("3").n == 1);
  CHECK(with.cost.mean_calls == 3.5);
  // Verdicts: a/0 wrongly dropped, a/1 rightly dropped, b/0 rightly kept.
  REQUIRE(with.verdict_agreement.has_value());
  CHECK(*with.verdict_agreement == doctest::Approx(2.0 / 3.0));

  const auto& without = report.methods.at("direct");
  CHECK(without.accuracy == 0.0);
  CHECK_FALSE(without.verdict_agreement.has_value());
}

TEST_CASE("report serializes to json and text") {
  std::vector<MathWordProblem> problems = {tiny_problem("a", 3, 2)};
  std::vector<AnswerRecord> records = {
      costed_record("a", "direct", 100, 10, 5, 2)};
  records[0].extracted = ExtractedAnswer::numeric(3);
  auto report = build_eval_report(records, problems);

  auto parsed = nlohmann::json::parse(report.to_json());
  CHECK(parsed.at("methods").at("direct").at("accuracy").get<double>() == 1.0);
  CHECK(parsed.at("methods").at("direct").at("n_problems").get<int>() == 1);
  CHECK(parsed.at("methods").at("direct").at("steps").at("2").at("n").get<int>() ==
        1);
  CHECK(parsed.at("methods").at("direct").at("cost").at("mean_calls")
            .get<double>() == 2.0);

  std::string text = report.to_text();
  CHECK(text.find("direct") != std::string::npos);
  CHECK(text.find("accuracy") != std::string::npos);
}
