#include "i3c/dataset.hpp"

#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

namespace i3c {

using nlohmann::json;

namespace {

GoldAnswer parse_answer(const json& value) {
  if (value.is_number()) {
    return GoldAnswer::numeric(value.get<double>());
  }
  if (value.is_string()) {
    std::string text = value.get<std::string>();
    if (text.size() == 1 && text[0] >= 'A' && text[0] <= 'E') {
      return GoldAnswer::option_label(text[0]);
    }
    try {
      size_t used = 0;
      double numeric = std::stod(text, &used);
      if (used == text.size()) return GoldAnswer::numeric(numeric);
    } catch (const std::exception&) {
    }
  }
  throw ParseError("answer must be a number or a letter A-E");
}

int sentence_count(const MathWordProblem& problem) {
  if (problem.conditions.empty()) return 0;
  return problem.conditions.back().source_sentence + 1;
}

}  // namespace

std::vector<MathWordProblem> ingest_dataset(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in.is_open()) {
    throw ParseError("cannot open dataset " + path.string());
  }
  std::vector<MathWordProblem> problems;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json record;
    std::string id;
    std::string question;
    GoldAnswer answer;
    std::optional<int> steps;
    std::optional<std::vector<int>> sentence_annotations;
    try {
      record = json::parse(line);
      if (!record.contains("id")) {
        id = std::to_string(problems.size());
      } else if (record.at("id").is_number_integer()) {
        id = std::to_string(record.at("id").get<long>());
      } else {
        id = record.at("id").get<std::string>();
      }
      question = record.at("question").get<std::string>();
      answer = parse_answer(record.at("answer"));
      if (record.contains("steps")) {
        steps = record.at("steps").get<int>();
      }
      if (record.contains("irrelevant_sentence_indices")) {
        sentence_annotations =
            record.at("irrelevant_sentence_indices").get<std::vector<int>>();
      }
    } catch (const ParseError& e) {
      throw ParseError(path.string() + " line " + std::to_string(line_no) +
                       ": " + e.what());
    } catch (const json::exception& e) {
      throw ParseError(path.string() + " line " + std::to_string(line_no) +
                       ": " + e.what());
    }

    MathWordProblem problem = make_problem(id, question, answer, steps);
    if (sentence_annotations) {
      const int n_sentences = sentence_count(problem);
      std::set<int> condition_indices;
      for (int sentence : *sentence_annotations) {
        if (sentence < 0 || sentence >= n_sentences) {
          throw AnnotationMismatchError(
              path.string() + " line " + std::to_string(line_no) +
              ": sentence index " + std::to_string(sentence) +
              " out of range, problem has " + std::to_string(n_sentences) +
              " condition sentences");
        }
        for (const auto& c : problem.conditions) {
          if (c.source_sentence == sentence) {
            condition_indices.insert(c.index);
          }
        }
      }
      problem.irrelevant_ground_truth = std::move(condition_indices);
    }
    problems.push_back(std::move(problem));
  }
  return problems;
}

void write_dataset(const std::filesystem::path& path,
                   const std::vector<MathWordProblem>& problems) {
  std::ofstream out(path, std::ios::trunc);
  if (!out.is_open()) {
    throw Error("cannot write dataset " + path.string());
  }
  for (const auto& p : problems) {
    json record;
    record["id"] = p.id;
    record["question"] = p.raw_text;
    if (p.gold_answer.kind == AnswerKind::Numeric) {
      record["answer"] = p.gold_answer.numeric_value;
    } else {
      record["answer"] = std::string(1, p.gold_answer.option);
    }
    if (p.n_reasoning_steps) record["steps"] = *p.n_reasoning_steps;
    if (p.irrelevant_ground_truth) {
      std::set<int> sentences;
      for (int index : *p.irrelevant_ground_truth) {
        sentences.insert(p.conditions[index].source_sentence);
      }
      record["irrelevant_sentence_indices"] =
          std::vector<int>(sentences.begin(), sentences.end());
    }
    out << record.dump() << "\n";
  }
}

}  // namespace i3c
