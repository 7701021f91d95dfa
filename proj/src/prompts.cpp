#include "i3c/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include <json.hpp>

namespace i3c {

using nlohmann::json;

PromptMethod PromptMethod::make(MethodName name, bool with_i3c) {
  PromptMethod m;
  m.name = name;
  m.with_i3c = with_i3c || name == MethodName::I3CSelect;
  return m;
}

std::string_view PromptMethod::trigger_text() const {
  switch (name) {
    case MethodName::Direct:
      return "The answer is.";
    case MethodName::ZeroShotCoT:
    case MethodName::InstructCoT:
      return "Let's think step by step.";
    case MethodName::PS:
      return "Let's first understand the problem and devise a plan to solve "
             "the problem. Then, let's carry out the plan and solve the "
             "problem step by step.";
    case MethodName::ManualCoT:
    case MethodName::AutoCoT:
    case MethodName::ComplexCoT:
    case MethodName::I3CSelect:
      return "";
  }
  return "";
}

DemoSource PromptMethod::demo_source() const {
  switch (name) {
    case MethodName::ManualCoT:
    case MethodName::AutoCoT:
    case MethodName::ComplexCoT:
      return DemoSource::UserFile;
    case MethodName::I3CSelect:
      return DemoSource::Selected;
    default:
      return DemoSource::None;
  }
}

namespace {

const std::map<MethodName, std::string>& method_names() {
  static const std::map<MethodName, std::string> names = {
      {MethodName::Direct, "direct"},
      {MethodName::ZeroShotCoT, "zero-shot-cot"},
      {MethodName::PS, "ps"},
      {MethodName::InstructCoT, "instruct-cot"},
      {MethodName::ManualCoT, "manual-cot"},
      {MethodName::AutoCoT, "auto-cot"},
      {MethodName::ComplexCoT, "complex-cot"},
      {MethodName::I3CSelect, "i3c-select"},
  };
  return names;
}

}  // namespace

std::string PromptMethod::label() const {
  std::string out = method_names().at(name);
  if (with_i3c && name != MethodName::I3CSelect) out += "+i3c";
  return out;
}

PromptMethod parse_method_label(std::string_view label) {
  std::string base(label);
  bool with_i3c = false;
  const std::string suffix = "+i3c";
  if (base.size() > suffix.size() &&
      base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
    with_i3c = true;
    base.resize(base.size() - suffix.size());
  }
  for (const auto& [name, text] : method_names()) {
    if (text == base) return PromptMethod::make(name, with_i3c);
  }
  throw ParseError("unknown method \"" + std::string(label) + "\"");
}

std::vector<Demonstration> load_demonstrations(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in.is_open()) {
    throw ParseError("cannot open demonstration file " + path.string());
  }
  std::vector<Demonstration> demos;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      Demonstration d;
      d.problem_text = j.at("problem").get<std::string>();
      d.reasoning_path = j.at("reasoning").get<std::string>();
      demos.push_back(std::move(d));
    } catch (const json::exception& e) {
      throw ParseError(path.string() + " line " + std::to_string(line_no) +
                       ": " + e.what());
    }
  }
  return demos;
}

void save_demonstrations(const std::filesystem::path& path,
                         const std::vector<Demonstration>& demos) {
  std::ofstream out(path, std::ios::trunc);
  if (!out.is_open()) {
    throw Error("cannot write demonstration file " + path.string());
  }
  for (const auto& d : demos) {
    json j;
    j["problem"] = d.problem_text;
    j["reasoning"] = d.reasoning_path;
    out << j.dump() << "\n";
  }
}

std::string assemble_prompt(
    const PromptMethod& method, const MathWordProblem& problem,
    const std::optional<I3CInstruction>& instruction,
    const std::optional<std::vector<Demonstration>>& demos) {
  if (method.with_i3c != instruction.has_value()) {
    throw PreconditionError(
        method.with_i3c
            ? "method " + method.label() + " needs an instruction"
            : "method " + method.label() + " does not take an instruction");
  }
  if (method.needs_demos() != (demos.has_value() && !demos->empty())) {
    throw PreconditionError(
        method.needs_demos()
            ? "method " + method.label() + " needs demonstrations"
            : "method " + method.label() + " does not take demonstrations");
  }
  std::string out;
  if (instruction) {
    out += instruction->text;
    out += "\n";
  }
  if (method.name == MethodName::InstructCoT) {
    out += "Feel free to ignore irrelevant conditions in the problem "
           "description.\n";
  }
  if (demos) {
    for (const auto& d : *demos) {
      out += "Q: ";
      out += d.problem_text;
      out += " A: ";
      out += d.reasoning_path;
      out += "\n";
    }
  }
  out += "Q: ";
  out += detail::trim(problem.raw_text);
  out += "\nA:";
  std::string_view trigger = method.trigger_text();
  if (!trigger.empty()) {
    out += " ";
    out += trigger;
  }
  return out;
}

ExtractedAnswer ExtractedAnswer::numeric(double v) {
  ExtractedAnswer a;
  a.kind = Kind::Numeric;
  a.numeric_value = v;
  return a;
}

ExtractedAnswer ExtractedAnswer::option_label(char c) {
  ExtractedAnswer a;
  a.kind = Kind::Option;
  a.option = c;
  return a;
}

ExtractedAnswer ExtractedAnswer::abstain() { return ExtractedAnswer{}; }

namespace {

bool is_digit_ch(char c) { return c >= '0' && c <= '9'; }
bool is_alnum_ch(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

// A grouping comma has exactly three digits after it.
bool grouping_comma_at(std::string_view text, size_t pos) {
  if (pos + 4 > text.size()) return false;
  if (!is_digit_ch(text[pos + 1]) || !is_digit_ch(text[pos + 2]) ||
      !is_digit_ch(text[pos + 3])) {
    return false;
  }
  return pos + 4 == text.size() || !is_digit_ch(text[pos + 4]);
}

std::optional<double> last_number(std::string_view text) {
  std::optional<double> best;
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    if (!is_digit_ch(text[i])) {
      ++i;
      continue;
    }
    size_t begin = i;
    bool negative = false;
    if (begin > 0 && text[begin - 1] == '-' &&
        (begin < 2 || !is_digit_ch(text[begin - 2]))) {
      negative = true;
    }
    std::string digits;
    while (i < n && is_digit_ch(text[i])) digits.push_back(text[i++]);
    while (i < n && text[i] == ',' && grouping_comma_at(text, i)) {
      ++i;
      while (i < n && is_digit_ch(text[i])) digits.push_back(text[i++]);
    }
    if (i + 1 < n && text[i] == '.' && is_digit_ch(text[i + 1])) {
      digits.push_back('.');
      ++i;
      while (i < n && is_digit_ch(text[i])) digits.push_back(text[i++]);
    }
    double value = std::stod(digits);
    if (i < n && text[i] == '%') {
      value /= 100.0;
      ++i;
    }
    if (negative) value = -value;
    best = value;
  }
  return best;
}

// Last letter A-E that stands on its own, so "(C)" and "answer is B."
// both read, while the A in "Answer" does not.
std::optional<char> last_option(std::string_view text) {
  std::optional<char> best;
  const size_t n = text.size();
  for (size_t i = 0; i < n; ++i) {
    if (text[i] >= 'A' && text[i] <= 'E' &&
        (i == 0 || !is_alnum_ch(text[i - 1])) &&
        (i + 1 >= n || !is_alnum_ch(text[i + 1]))) {
      best = text[i];
    }
  }
  return best;
}

}  // namespace

ExtractedAnswer extract_answer(std::string_view response_text,
                               AnswerKind kind) {
  if (kind == AnswerKind::Numeric) {
    auto value = last_number(response_text);
    if (!value) return ExtractedAnswer::abstain();
    return ExtractedAnswer::numeric(*value);
  }
  auto letter = last_option(response_text);
  if (!letter) return ExtractedAnswer::abstain();
  return ExtractedAnswer::option_label(*letter);
}

AnswerRecord solve(const MathWordProblem& problem, const PromptMethod& method,
                   SolveContext& context, int sample_index) {
  const SolveOptions& opts = context.options;
  CallCosts costs;
  AnswerRecord record;
  record.problem_id = problem.id;
  record.method_label = method.label();

  std::optional<I3CInstruction> instruction;
  if (method.with_i3c) {
    CandidateSet candidates;
    candidates.threshold = opts.threshold;
    if (!problem.conditions.empty()) {
      std::vector<std::string> texts;
      texts.reserve(problem.conditions.size());
      for (const auto& c : problem.conditions) texts.push_back(c.text);
      auto condition_vecs = context.provider.embed_batch(texts);
      auto question_vec = context.provider.embed(problem.question);
      auto scores = score_conditions(condition_vecs, question_vec);
      candidates = identify_candidates(scores, opts.threshold);
    }
    VerifyOptions vopts;
    vopts.model_id = opts.model_id;
    vopts.temperature = opts.temperature;
    vopts.max_tokens = opts.max_tokens_verification;
    vopts.sample_index = sample_index;
    vopts.normalize_punctuation = opts.normalize_verification_punctuation;
    auto verifications =
        verify_candidates(problem, candidates, context.provider, vopts, &costs);
    for (const auto& v : verifications) {
      record.verified_indices.push_back(v.condition_index);
      record.verified_verdicts.push_back(v.verdict);
    }
    instruction = build_instruction(verifications);
  }

  std::optional<std::vector<Demonstration>> demos;
  if (method.needs_demos()) {
    if (!context.demos || context.demos->empty()) {
      throw PreconditionError("method " + method.label() +
                              " needs demonstrations but none were supplied");
    }
    demos = *context.demos;
  }

  CompletionRequest generation;
  generation.prompt = assemble_prompt(method, problem, instruction, demos);
  generation.temperature = opts.temperature;
  generation.max_tokens = opts.max_tokens_reasoning;
  generation.model_id = opts.model_id;
  generation.sample_index = sample_index;
  auto generated = context.provider.complete(generation);
  costs.add(generated);
  record.reasoning_path = generated.text;

  CompletionRequest extraction;
  extraction.prompt = record.reasoning_path + "\n" +
                      std::string(kAnswerTrigger);
  extraction.temperature = opts.temperature;
  extraction.max_tokens = opts.max_tokens_extraction;
  extraction.model_id = opts.model_id;
  extraction.sample_index = sample_index;
  auto extracted_text = context.provider.complete(extraction);
  costs.add(extracted_text);
  record.extracted =
      extract_answer(extracted_text.text, problem.gold_answer.kind);

  record.prompt_tokens = costs.prompt_tokens;
  record.completion_tokens = costs.completion_tokens;
  record.wall_ms = costs.wall_ms;
  record.n_llm_calls = costs.n_calls;
  return record;
}

namespace {

// Ordering for tie-breaks: numeric by value, options by letter.
bool answer_less(const ExtractedAnswer& a, const ExtractedAnswer& b) {
  if (a.kind == ExtractedAnswer::Kind::Numeric) {
    return a.numeric_value < b.numeric_value;
  }
  return a.option < b.option;
}

}  // namespace

AnswerRecord self_consistency(const MathWordProblem& problem,
                              const PromptMethod& method,
                              SolveContext& context, int n_samples) {
  if (n_samples < 1) {
    throw PreconditionError("self-consistency needs at least one sample");
  }
  std::vector<AnswerRecord> samples;
  samples.reserve(n_samples);
  for (int m = 0; m < n_samples; ++m) {
    samples.push_back(solve(problem, method, context, m));
  }

  // Majority vote over non-abstaining samples.
  std::vector<std::pair<ExtractedAnswer, int>> tally;
  for (const auto& s : samples) {
    if (s.extracted.is_abstain()) continue;
    auto it = std::find_if(tally.begin(), tally.end(), [&](const auto& entry) {
      return entry.first == s.extracted;
    });
    if (it == tally.end()) {
      tally.push_back({s.extracted, 1});
    } else {
      ++it->second;
    }
  }
  ExtractedAnswer voted = ExtractedAnswer::abstain();
  int best_count = 0;
  for (const auto& [answer, count] : tally) {
    if (count > best_count ||
        (count == best_count && answer_less(answer, voted))) {
      voted = answer;
      best_count = count;
    }
  }

  AnswerRecord record;
  record.problem_id = problem.id;
  record.method_label = method.label();
  record.extracted = voted;
  record.reasoning_path = samples.front().reasoning_path;
  for (const auto& s : samples) {
    if (!voted.is_abstain() && s.extracted == voted) {
      record.reasoning_path = s.reasoning_path;
      break;
    }
  }
  record.verified_indices = samples.front().verified_indices;
  record.verified_verdicts = samples.front().verified_verdicts;
  for (const auto& s : samples) {
    record.prompt_tokens += s.prompt_tokens;
    record.completion_tokens += s.completion_tokens;
    record.wall_ms += s.wall_ms;
    record.n_llm_calls += s.n_llm_calls;
  }
  return record;
}

}  // namespace i3c
