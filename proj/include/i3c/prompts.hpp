#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "i3c/instruction.hpp"
#include "i3c/problem.hpp"
#include "i3c/providers.hpp"

namespace i3c {

enum class MethodName {
  Direct,
  ZeroShotCoT,
  PS,
  InstructCoT,
  ManualCoT,
  AutoCoT,
  ComplexCoT,
  I3CSelect,
};

enum class DemoSource { None, UserFile, Selected };

// A prompting method plus whether the instruction block is prepended.
// I3CSelect always carries the instruction; make() enforces that.
struct PromptMethod {
  MethodName name = MethodName::ZeroShotCoT;
  bool with_i3c = false;

  static PromptMethod make(MethodName name, bool with_i3c = false);

  std::string_view trigger_text() const;  // empty for few-shot methods
  DemoSource demo_source() const;
  bool needs_demos() const { return demo_source() != DemoSource::None; }
  std::string label() const;  // e.g. "zero-shot-cot+i3c"
};

// Inverse of PromptMethod::label(). Throws ParseError on unknown labels.
PromptMethod parse_method_label(std::string_view label);

struct Demonstration {
  std::string problem_text;
  std::string reasoning_path;
};

// JSONL with {"problem": ..., "reasoning": ...} per line.
std::vector<Demonstration> load_demonstrations(
    const std::filesystem::path& path);
void save_demonstrations(const std::filesystem::path& path,
                         const std::vector<Demonstration>& demos);

// Builds the full prompt for one problem. The instruction must be
// present exactly when the method carries one, and demonstrations
// exactly when the method is few-shot; anything else throws
// PreconditionError.
std::string assemble_prompt(
    const PromptMethod& method, const MathWordProblem& problem,
    const std::optional<I3CInstruction>& instruction,
    const std::optional<std::vector<Demonstration>>& demos);

// Sent after the reasoning pass to read off the final answer.
inline constexpr std::string_view kAnswerTrigger = "Therefore, the answer is";

struct ExtractedAnswer {
  enum class Kind { Numeric, Option, Abstain };
  Kind kind = Kind::Abstain;
  double numeric_value = 0.0;
  char option = '\0';

  static ExtractedAnswer numeric(double v);
  static ExtractedAnswer option_label(char c);
  static ExtractedAnswer abstain();

  bool is_abstain() const { return kind == Kind::Abstain; }
  bool operator==(const ExtractedAnswer&) const = default;
};

// Reads the final answer out of free-form model text: the last number
// for numeric problems (currency, grouping commas, decimals and percent
// handled), the last option letter A-E for multiple choice. Returns
// abstain when nothing parseable is present.
ExtractedAnswer extract_answer(std::string_view response_text,
                               AnswerKind kind);

// Everything produced for one problem by one method.
struct AnswerRecord {
  std::string problem_id;
  std::string method_label;
  std::string reasoning_path;
  ExtractedAnswer extracted;
  long prompt_tokens = 0;
  long completion_tokens = 0;
  long wall_ms = 0;
  int n_llm_calls = 0;
  // Verification trace, populated only when the method ran with the
  // instruction: which conditions were checked and what came back.
  std::vector<int> verified_indices;
  std::vector<Verdict> verified_verdicts;
};

struct SolveOptions {
  std::string model_id;
  double temperature = 0.7;
  double threshold = 0.5;
  int max_tokens_reasoning = 512;
  int max_tokens_verification = 256;
  int max_tokens_extraction = 256;
  bool normalize_verification_punctuation = false;
};

struct SolveContext {
  Provider& provider;
  SolveOptions options;
  const std::vector<Demonstration>* demos = nullptr;
};

// Runs the full pipeline for one problem: embeddings, candidate
// verification and instruction assembly when the method asks for it,
// then one reasoning call and one extraction call.
AnswerRecord solve(const MathWordProblem& problem, const PromptMethod& method,
                   SolveContext& context, int sample_index = 0);

// Runs solve() under sample indices 0..n_samples-1 and majority-votes
// the extracted answers; abstentions do not vote, and ties go to the
// smallest answer. Costs are summed over all samples.
AnswerRecord self_consistency(const MathWordProblem& problem,
                              const PromptMethod& method,
                              SolveContext& context, int n_samples);

}  // namespace i3c
