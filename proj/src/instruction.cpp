#include "i3c/instruction.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace i3c {

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Relevant:
      return "relevant";
    case Verdict::Irrelevant:
      return "irrelevant";
    case Verdict::Unclear:
      return "unclear";
  }
  return "unclear";
}

std::string build_verification_prompt(const MathWordProblem& problem,
                                      const Condition& candidate,
                                      bool normalize_punctuation) {
  std::string out(detail::trim(problem.raw_text));
  if (!detail::ends_with_terminator(out)) out += ".";
  out += " Is condition ";
  out += candidate.text;
  out += " relevant to the process of solving problem ";
  out += problem.question;
  // The template always closes with its own question mark; under
  // normalization it is dropped when the question already ends with
  // terminal punctuation.
  if (!(normalize_punctuation && detail::ends_with_terminator(problem.question))) {
    out += "?";
  }
  return out;
}

Verdict parse_relevance(std::string_view response_text) {
  std::string lower(response_text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  if (lower.find("not relevant") != std::string::npos ||
      lower.find("irrelevant") != std::string::npos) {
    return Verdict::Irrelevant;
  }
  if (lower.find("relevant") != std::string::npos) {
    return Verdict::Relevant;
  }
  return Verdict::Unclear;
}

std::vector<VerificationOutput> verify_candidates(
    const MathWordProblem& problem, const CandidateSet& candidates,
    Provider& provider, const VerifyOptions& options, CallCosts* costs) {
  std::vector<VerificationOutput> outputs;
  outputs.reserve(candidates.indices.size());
  for (int index : candidates.indices) {
    if (index < 0 || index >= static_cast<int>(problem.conditions.size())) {
      throw PreconditionError("candidate index " + std::to_string(index) +
                              " out of range for problem " + problem.id);
    }
    CompletionRequest request;
    request.prompt = build_verification_prompt(
        problem, problem.conditions[index], options.normalize_punctuation);
    request.temperature = options.temperature;
    request.max_tokens = options.max_tokens;
    request.model_id = options.model_id;
    request.sample_index = options.sample_index;
    CompletionResponse response = provider.complete(request);
    if (costs) costs->add(response);
    VerificationOutput out;
    out.condition_index = index;
    out.text = response.text;
    out.verdict = parse_relevance(response.text);
    outputs.push_back(std::move(out));
  }
  return outputs;
}

I3CInstruction build_instruction(
    const std::vector<VerificationOutput>& verifications) {
  if (verifications.empty()) {
    return {std::string(kFallbackInstruction), true};
  }
  std::string text = "The instructions are as follows:";
  for (const auto& v : verifications) {
    text += " ";
    text += v.text;
  }
  if (!detail::ends_with_terminator(text)) text += ".";
  text += " Let's consider these instructions and ignore the irrelevant "
          "conditions to solve the problem";
  return {std::move(text), false};
}

std::string refine_problem(
    const MathWordProblem& problem,
    const std::vector<VerificationOutput>& verifications) {
  std::map<int, Verdict> verdicts;
  for (const auto& v : verifications) {
    verdicts[v.condition_index] = v.verdict;
  }
  std::vector<int> kept;
  for (const auto& c : problem.conditions) {
    auto it = verdicts.find(c.index);
    if (it != verdicts.end() && it->second == Verdict::Irrelevant) continue;
    kept.push_back(c.index);
  }

  const int n = static_cast<int>(problem.conditions.size());
  std::string out;
  for (size_t k = 0; k < kept.size(); ++k) {
    const Condition& cond = problem.conditions[kept[k]];
    out += cond.text;
    const bool last_kept = (k + 1 == kept.size());
    const int next = last_kept ? n : kept[k + 1];
    if (next == cond.index + 1) {
      // Nothing was removed in between: reuse the original joiner.
      out += problem.separators[cond.index];
    } else if (!last_kept && problem.conditions[next].source_sentence ==
                                 cond.source_sentence) {
      out += ", ";
    } else {
      // The removal broke the sentence flow; close the sentence.
      if (!detail::ends_with_terminator(cond.text)) {
        out += problem.sentence_terminators[cond.source_sentence];
      }
      out += " ";
    }
  }
  out += problem.question;
  return out;
}

}  // namespace i3c
