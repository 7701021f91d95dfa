#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "i3c/errors.hpp"

namespace i3c {

// One condition of a math word problem. Conditions are either whole
// sentences (text keeps its terminator) or comma-separated pieces of a
// sentence that packed several quantities together (text has no
// terminator and no leading conjunction).
struct Condition {
  int index = 0;            // position in the problem's condition list
  std::string text;
  int quantity_count = 0;   // numeric plus spelled-out quantities in text
  int source_sentence = 0;  // which condition sentence this came from
  bool from_comma_split = false;
};

enum class AnswerKind { Numeric, Option };

// Gold label of a problem: a number, or a multiple-choice letter A-E.
struct GoldAnswer {
  AnswerKind kind = AnswerKind::Numeric;
  double numeric_value = 0.0;
  char option = '\0';

  static GoldAnswer numeric(double v) {
    GoldAnswer g;
    g.kind = AnswerKind::Numeric;
    g.numeric_value = v;
    return g;
  }
  static GoldAnswer option_label(char c) {
    GoldAnswer g;
    g.kind = AnswerKind::Option;
    g.option = c;
    return g;
  }
};

struct SegmentationResult {
  std::vector<Condition> conditions;
  std::string question;  // last sentence, terminator included

  // Verbatim text between condition i and the following unit (the next
  // condition, or the question). Same length as `conditions`. Joining
  // conditions, separators and question reproduces the original text.
  std::vector<std::string> separators;

  // Terminator character of each condition sentence ('.', '?' or '!').
  std::vector<char> sentence_terminators;
};

struct MathWordProblem {
  std::string id;
  std::string raw_text;
  std::vector<Condition> conditions;
  std::string question;
  GoldAnswer gold_answer;
  std::optional<int> n_reasoning_steps;
  // Condition indices annotated as irrelevant, when the dataset carries
  // such labels.
  std::optional<std::set<int>> irrelevant_ground_truth;

  // Segmentation metadata carried along for reconstruction and for
  // rebuilding a reduced problem text.
  std::vector<std::string> separators;
  std::vector<char> sentence_terminators;
};

// Counts quantities in a piece of text: numbers (currency, grouping
// commas, decimals, percent signs included) and spelled-out cardinals
// up to twenty, where a contiguous run of number words counts once.
int count_quantities(std::string_view text);

// Splits raw problem text into conditions and the question (the last
// sentence). Sentences that contain two or more quantities and at least
// one comma are split further at the commas. Throws EmptyInputError when
// the text has no content.
SegmentationResult segment_problem(const std::string& raw_text);

// Runs segmentation and bundles the result with the problem's metadata.
MathWordProblem make_problem(std::string id, std::string raw_text,
                             GoldAnswer gold,
                             std::optional<int> n_reasoning_steps = {},
                             std::optional<std::set<int>> irrelevant = {});

// Joins conditions, separators and question back together; equals the
// trimmed raw text.
std::string reconstruct_text(const MathWordProblem& problem);

namespace detail {
// True if the trimmed text ends in '.', '?' or '!'.
bool ends_with_terminator(std::string_view text);
std::string_view trim(std::string_view text);
// The comma-split step applied to one sentence, exposed for testing.
std::vector<std::string> split_sentence_at_commas(std::string_view sentence);
}  // namespace detail

}  // namespace i3c
