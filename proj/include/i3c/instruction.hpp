#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "i3c/problem.hpp"
#include "i3c/providers.hpp"
#include "i3c/relevance.hpp"

namespace i3c {

enum class Verdict { Relevant, Irrelevant, Unclear };

std::string_view verdict_name(Verdict v);

// The model's answer to one verification question, with the parsed
// verdict. Unclear answers are kept verbatim but never drop a condition.
struct VerificationOutput {
  int condition_index = 0;
  std::string text;
  Verdict verdict = Verdict::Unclear;
};

struct I3CInstruction {
  std::string text;
  bool is_fallback = false;
};

// Used verbatim when no verification output is available.
inline constexpr std::string_view kFallbackInstruction =
    "Feel free to ignore irrelevant conditions in the problem description";

// "{Q} Is condition {c} relevant to the process of solving problem {q}?"
// A period is inserted after the problem statement only when it does not
// already end with terminal punctuation. With normalize_punctuation the
// final question mark is dropped when the question brings its own.
std::string build_verification_prompt(const MathWordProblem& problem,
                                      const Condition& candidate,
                                      bool normalize_punctuation = false);

// Keyword scan over the model's answer, case-insensitive: negated forms
// win over plain "relevant"; neither keyword reads as Unclear.
Verdict parse_relevance(std::string_view response_text);

struct VerifyOptions {
  std::string model_id;
  double temperature = 0.7;
  int max_tokens = 256;
  int sample_index = 0;
  bool normalize_punctuation = false;
};

struct CallCosts {
  int n_calls = 0;
  long prompt_tokens = 0;
  long completion_tokens = 0;
  long wall_ms = 0;

  void add(const CompletionResponse& r) {
    ++n_calls;
    prompt_tokens += r.prompt_tokens;
    completion_tokens += r.completion_tokens;
    wall_ms += r.latency_ms;
  }
};

// One verification call per candidate, in ascending index order.
std::vector<VerificationOutput> verify_candidates(
    const MathWordProblem& problem, const CandidateSet& candidates,
    Provider& provider, const VerifyOptions& options,
    CallCosts* costs = nullptr);

// Concatenates the verification answers into the instruction block; with
// nothing to concatenate, falls back to the generic sentence.
I3CInstruction build_instruction(
    const std::vector<VerificationOutput>& verifications);

// Problem text with the conditions judged irrelevant removed. Kept
// fragments are joined with their original separators where they were
// adjacent, and re-punctuated where a removal broke the sentence flow.
std::string refine_problem(const MathWordProblem& problem,
                           const std::vector<VerificationOutput>& verifications);

}  // namespace i3c
