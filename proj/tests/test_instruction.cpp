#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>

#include "i3c/instruction.hpp"
#include "i3c/problem.hpp"
#include "testing_support.hpp"
#include "verdict_fixtures.hpp"

using namespace i3c;
using i3c::testing::TempDir;

namespace {

MathWordProblem steve_problem() {
  return make_problem("steve",
                      "Steve is 5'6\". He grows 6 inches. The height of Mary "
                      "is 30 feet. How tall is Steve in inches?",
                      GoldAnswer::numeric(72));
}

VerificationOutput make_output(int index, Verdict v, std::string text = "") {
  VerificationOutput o;
  o.condition_index = index;
  o.verdict = v;
  o.text = std::move(text);
  return o;
}

}  // namespace

TEST_CASE("verification prompt: full text, candidate, and question") {
  auto problem = steve_problem();
  auto prompt = build_verification_prompt(problem, problem.conditions[2]);
  CHECK(prompt ==
        "Steve is 5'6\". He grows 6 inches. The height of Mary is 30 feet. "
        "How tall is Steve in inches? Is condition The height of Mary is 30 "
        "feet. relevant to the process of solving problem How tall is Steve "
        "in inches??");
}

TEST_CASE("verification prompt: punctuation normalization drops the echo") {
  auto problem = steve_problem();
  auto prompt = build_verification_prompt(problem, problem.conditions[2], true);
  CHECK(std::string_view(prompt).ends_with(
      "solving problem How tall is Steve in inches?"));
  CHECK_FALSE(std::string_view(prompt).ends_with("??"));
}

TEST_CASE("verification prompt: period added after unterminated text") {
  auto problem = make_problem(
      "p", "Tom has 2 apples. How many apples does Tom have",
      GoldAnswer::numeric(2));
  auto prompt = build_verification_prompt(problem, problem.conditions[0]);
  CHECK(prompt ==
        "Tom has 2 apples. How many apples does Tom have. Is condition Tom "
        "has 2 apples. relevant to the process of solving problem How many "
        "apples does Tom have?");
}

TEST_CASE("verification prompts differ across candidates") {
  auto problem = steve_problem();
  CHECK(build_verification_prompt(problem, problem.conditions[0]) !=
        build_verification_prompt(problem, problem.conditions[1]));
}

TEST_CASE("parse_relevance: labeled verifier replies parse exactly") {
  for (const auto& example : i3c::testing::verifier_reply_examples()) {
    CAPTURE(example.text);
    CHECK(parse_relevance(example.text) == example.expected);
  }
}

TEST_CASE("parse_relevance: case-insensitive") {
  CHECK(parse_relevance("THE CONDITION IS NOT RELEVANT.") ==
        Verdict::Irrelevant);
  CHECK(parse_relevance("ThIs Is ReLeVaNt to the question") ==
        Verdict::Relevant);
  CHECK(parse_relevance("IRRELEVANT!") == Verdict::Irrelevant);
  CHECK(parse_relevance("") == Verdict::Unclear);
}

TEST_CASE("verify_candidates: one call per candidate, ascending order") {
  auto problem = make_problem(
      "p",
      "John buys 3 apples. Tom owns 5 umbrellas. John eats 1 apple. "
      "How many apples does John have?",
      GoldAnswer::numeric(2));
  TempDir tmp;
  auto store = std::make_shared<ReplayStore>(tmp.path() / "store.jsonl");
  Provider provider(StoreMode::Record, store,
                    i3c::testing::make_stub_chat_transport(),
                    i3c::testing::make_stub_embed_transport(16), 16);

  CandidateSet candidates;
  candidates.indices = {0, 1};
  candidates.threshold = 0.5;
  VerifyOptions options;
  options.model_id = "stub";
  CallCosts costs;
  auto outputs = verify_candidates(problem, candidates, provider, options,
                                   &costs);
  REQUIRE(outputs.size() == 2);
  CHECK(outputs[0].condition_index == 0);
  CHECK(outputs[1].condition_index == 1);
  CHECK(outputs[0].verdict == Verdict::Relevant);
  CHECK(outputs[1].verdict == Verdict::Irrelevant);  // mentions Tom
  CHECK(costs.n_calls == 2);
  CHECK(costs.prompt_tokens > 0);
  CHECK(provider.chat_calls() == 2);

  CandidateSet none;
  CHECK(verify_candidates(problem, none, provider, options).empty());
  CHECK(provider.chat_calls() == 2);  // no candidates, no calls

  CandidateSet out_of_range;
  out_of_range.indices = {7};
  CHECK_THROWS_AS(
      verify_candidates(problem, out_of_range, provider, options),
      PreconditionError);
}

TEST_CASE("build_instruction: concatenates verifications in order") {
  auto a = make_output(0, Verdict::Relevant, "Condition A is relevant");
  auto b = make_output(1, Verdict::Irrelevant, "Condition B is not relevant");
  auto instruction = build_instruction({a, b});
  CHECK_FALSE(instruction.is_fallback);
  CHECK(instruction.text ==
        "The instructions are as follows: Condition A is relevant Condition "
        "B is not relevant. Let's consider these instructions and ignore the "
        "irrelevant conditions to solve the problem");

  auto swapped = build_instruction({b, a});
  CHECK(swapped.text !=
        instruction.text);  // order follows the verification list
}

TEST_CASE("build_instruction: no duplicate terminator") {
  auto a = make_output(0, Verdict::Irrelevant,
                       "The condition X is not relevant to the calculation "
                       "process.");
  auto instruction = build_instruction({a});
  CHECK(instruction.text ==
        "The instructions are as follows: The condition X is not relevant to "
        "the calculation process. Let's consider these instructions and "
        "ignore the irrelevant conditions to solve the problem");
}

TEST_CASE("build_instruction: empty set falls back") {
  auto instruction = build_instruction({});
  CHECK(instruction.is_fallback);
  CHECK(instruction.text ==
        "Feel free to ignore irrelevant conditions in the problem "
        "description");
  CHECK(instruction.text == std::string(kFallbackInstruction));
}

TEST_CASE("refine: drops judged-irrelevant pieces, repairs punctuation") {
  auto problem = i3c::testing::cobbler_problem();
  REQUIRE(problem.conditions.size() == 6);
  auto refined = refine_problem(problem, i3c::testing::cobbler_verdicts());
  CHECK(refined == i3c::testing::cobbler_refined_text());
}

TEST_CASE("refine: no irrelevant verdicts reproduces the problem text") {
  auto problem = i3c::testing::cobbler_problem();
  std::vector<VerificationOutput> verdicts;
  for (const auto& c : problem.conditions) {
    verdicts.push_back(make_output(c.index, Verdict::Relevant));
  }
  CHECK(refine_problem(problem, verdicts) == problem.raw_text);
  CHECK(refine_problem(problem, {}) == problem.raw_text);
}

TEST_CASE("refine: everything irrelevant leaves only the question") {
  auto problem = i3c::testing::cobbler_problem();
  std::vector<VerificationOutput> verdicts;
  for (const auto& c : problem.conditions) {
    verdicts.push_back(make_output(c.index, Verdict::Irrelevant));
  }
  CHECK(refine_problem(problem, verdicts) ==
        "How many pairs of shoes can the cobbler mend in a week?");
}

TEST_CASE("refine: unclear verdicts keep their conditions") {
  auto problem = i3c::testing::cobbler_problem();
  std::vector<VerificationOutput> verdicts = {
      make_output(5, Verdict::Unclear),
  };
  CHECK(refine_problem(problem, verdicts) == problem.raw_text);
}

TEST_CASE("refine: dropping a middle comma piece keeps the sentence") {
  auto problem = make_problem(
      "p", "John buys 3 apples, 4 pears and a hat. How many fruits?",
      GoldAnswer::numeric(7));
  REQUIRE(problem.conditions.size() == 2);
  CHECK(refine_problem(problem, {make_output(0, Verdict::Irrelevant)}) ==
        "4 pears and a hat. How many fruits?");
  CHECK(refine_problem(problem, {make_output(1, Verdict::Irrelevant)}) ==
        "John buys 3 apples. How many fruits?");
}

TEST_CASE("refine: gap inside one sentence rejoins with a comma") {
  auto problem = make_problem(
      "p",
      "He bought 3 apples, 4 pears, and 5 plums. How many fruits did he buy?",
      GoldAnswer::numeric(12));
  REQUIRE(problem.conditions.size() == 3);
  CHECK(refine_problem(problem, {make_output(1, Verdict::Irrelevant)}) ==
        "He bought 3 apples, 5 plums. How many fruits did he buy?");
}
