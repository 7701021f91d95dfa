#include "i3c/problem.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace i3c {
namespace {

bool is_digit_ch(char c) { return c >= '0' && c <= '9'; }
bool is_alpha_ch(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) != 0;
}
bool is_space_ch(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

// Spelled-out cardinals that count as quantities.
constexpr std::array<std::string_view, 20> kNumberWords = {
    "one",     "two",     "three",    "four",     "five",
    "six",     "seven",   "eight",    "nine",     "ten",
    "eleven",  "twelve",  "thirteen", "fourteen", "fifteen",
    "sixteen", "seventeen", "eighteen", "nineteen", "twenty"};

bool is_number_word(std::string_view word) {
  std::string lower = to_lower(word);
  return std::find(kNumberWords.begin(), kNumberWords.end(), lower) !=
         kNumberWords.end();
}

// A comma at position `pos` is part of a number ("1,000") when a digit
// precedes it and exactly three digits follow.
bool is_grouping_comma(std::string_view text, size_t pos) {
  if (pos == 0 || text[pos] != ',') return false;
  if (!is_digit_ch(text[pos - 1])) return false;
  if (pos + 3 >= text.size()) {
    if (pos + 3 == text.size()) {
      return is_digit_ch(text[pos + 1]) && is_digit_ch(text[pos + 2]);
    }
    return false;
  }
  return is_digit_ch(text[pos + 1]) && is_digit_ch(text[pos + 2]) &&
         is_digit_ch(text[pos + 3]) &&
         (pos + 4 >= text.size() || !is_digit_ch(text[pos + 4]));
}

// Advances past one numeric token starting at a digit: digits, grouping
// commas, at most one decimal point, optional percent sign.
size_t consume_number(std::string_view text, size_t i) {
  while (i < text.size() && is_digit_ch(text[i])) ++i;
  while (i < text.size() && is_grouping_comma(text, i)) {
    i += 1;
    while (i < text.size() && is_digit_ch(text[i])) ++i;
  }
  if (i + 1 < text.size() && text[i] == '.' && is_digit_ch(text[i + 1])) {
    i += 2;
    while (i < text.size() && is_digit_ch(text[i])) ++i;
  }
  if (i < text.size() && text[i] == '%') ++i;
  return i;
}

// Abbreviations whose trailing period does not end a sentence.
bool is_abbreviation_before(std::string_view text, size_t dot) {
  size_t end = dot;
  size_t begin = end;
  while (begin > 0 && is_alpha_ch(text[begin - 1])) --begin;
  if (begin == end) return false;
  std::string_view word = text.substr(begin, end - begin);
  if (word.size() == 1 && std::isupper(static_cast<unsigned char>(word[0])) &&
      (begin == 0 || is_space_ch(text[begin - 1]))) {
    return true;  // personal initial, "J. Smith"
  }
  static constexpr std::array<std::string_view, 9> kTitles = {
      "mr", "mrs", "ms", "dr", "prof", "st", "jr", "sr", "vs"};
  std::string lower = to_lower(word);
  return std::find(kTitles.begin(), kTitles.end(), lower) != kTitles.end();
}

struct SentenceSpan {
  size_t begin = 0;
  size_t end = 0;      // one past the terminator
  char terminator = 0; // 0 when the text just ran out
};

std::vector<SentenceSpan> split_sentences(std::string_view text) {
  std::vector<SentenceSpan> spans;
  const size_t n = text.size();
  size_t start = 0;
  while (start < n && is_space_ch(text[start])) ++start;
  size_t i = start;
  while (i < n) {
    char c = text[i];
    if (c == '.' || c == '?' || c == '!') {
      bool boundary = (i + 1 >= n) || is_space_ch(text[i + 1]);
      if (boundary && c == '.' && is_abbreviation_before(text, i)) {
        boundary = false;
      }
      if (boundary) {
        spans.push_back({start, i + 1, c});
        size_t j = i + 1;
        while (j < n && is_space_ch(text[j])) ++j;
        start = j;
        i = j;
        continue;
      }
    }
    ++i;
  }
  if (start < n) {
    size_t end = n;
    while (end > start && is_space_ch(text[end - 1])) --end;
    if (end > start) spans.push_back({start, end, 0});
  }
  return spans;
}

// Strips a leading "and "/"but " left over from splitting at a comma.
size_t skip_leading_conjunction(std::string_view text, size_t begin,
                                size_t end) {
  while (begin < end && is_space_ch(text[begin])) ++begin;
  for (std::string_view conj : {std::string_view("and "), std::string_view("but ")}) {
    if (end - begin > conj.size()) {
      std::string head = to_lower(text.substr(begin, conj.size()));
      if (head == conj) {
        begin += conj.size();
        while (begin < end && is_space_ch(text[begin])) ++begin;
        break;
      }
    }
  }
  return begin;
}

struct Piece {
  size_t begin = 0;
  size_t end = 0;
  int sentence = 0;
  bool split = false;
};

// Splits one condition sentence into comma-separated pieces when it
// bundles several quantities together; otherwise keeps it whole.
void append_pieces(std::string_view text, const SentenceSpan& span,
                   int sentence_index, std::vector<Piece>* out) {
  size_t content_end = span.terminator != 0 ? span.end - 1 : span.end;
  std::string_view sentence = text.substr(span.begin, span.end - span.begin);
  std::vector<size_t> commas;
  for (size_t i = span.begin; i < content_end; ++i) {
    if (text[i] == ',' && !is_grouping_comma(text, i)) commas.push_back(i);
  }
  if (count_quantities(sentence) < 2 || commas.empty()) {
    out->push_back({span.begin, span.end, sentence_index, false});
    return;
  }
  size_t cursor = span.begin;
  commas.push_back(content_end);  // sentinel: final chunk runs to the end
  for (size_t stop : commas) {
    size_t begin = skip_leading_conjunction(text, cursor, stop);
    size_t end = stop;
    while (end > begin && is_space_ch(text[end - 1])) --end;
    if (end > begin) out->push_back({begin, end, sentence_index, true});
    cursor = stop + 1;
  }
}

}  // namespace

namespace detail {

bool ends_with_terminator(std::string_view text) {
  std::string_view t = trim(text);
  if (t.empty()) return false;
  char c = t.back();
  return c == '.' || c == '?' || c == '!';
}

std::string_view trim(std::string_view text) {
  size_t b = 0;
  size_t e = text.size();
  while (b < e && is_space_ch(text[b])) ++b;
  while (e > b && is_space_ch(text[e - 1])) --e;
  return text.substr(b, e - b);
}

std::vector<std::string> split_sentence_at_commas(std::string_view sentence) {
  std::string_view trimmed = trim(sentence);
  char terminator = 0;
  if (!trimmed.empty() && (trimmed.back() == '.' || trimmed.back() == '?' ||
                           trimmed.back() == '!')) {
    terminator = trimmed.back();
  }
  SentenceSpan span{0, trimmed.size(), terminator};
  std::vector<Piece> pieces;
  append_pieces(trimmed, span, 0, &pieces);
  std::vector<std::string> out;
  for (const Piece& p : pieces) {
    out.emplace_back(trimmed.substr(p.begin, p.end - p.begin));
  }
  return out;
}

}  // namespace detail

int count_quantities(std::string_view text) {
  int count = 0;
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    char c = text[i];
    if (is_digit_ch(c)) {
      ++count;
      i = consume_number(text, i);
    } else if (is_alpha_ch(c)) {
      size_t begin = i;
      while (i < n && is_alpha_ch(text[i])) ++i;
      if (is_number_word(text.substr(begin, i - begin))) {
        ++count;
        // A run of connected number words ("twenty one") counts once.
        while (i < n) {
          size_t j = i;
          if (text[j] != ' ' && text[j] != '-') break;
          ++j;
          size_t word_begin = j;
          while (j < n && is_alpha_ch(text[j])) ++j;
          if (j == word_begin ||
              !is_number_word(text.substr(word_begin, j - word_begin))) {
            break;
          }
          i = j;
        }
      }
    } else {
      ++i;
    }
  }
  return count;
}

SegmentationResult segment_problem(const std::string& raw_text) {
  std::string_view text(raw_text);
  auto spans = split_sentences(text);
  if (spans.empty()) {
    throw EmptyInputError("problem text is empty");
  }
  SegmentationResult result;
  const SentenceSpan& question_span = spans.back();
  result.question = std::string(
      text.substr(question_span.begin, question_span.end - question_span.begin));

  std::vector<Piece> pieces;
  for (size_t s = 0; s + 1 < spans.size(); ++s) {
    result.sentence_terminators.push_back(
        spans[s].terminator != 0 ? spans[s].terminator : '.');
    append_pieces(text, spans[s], static_cast<int>(s), &pieces);
  }

  for (size_t i = 0; i < pieces.size(); ++i) {
    const Piece& p = pieces[i];
    Condition cond;
    cond.index = static_cast<int>(i);
    cond.text = std::string(text.substr(p.begin, p.end - p.begin));
    cond.quantity_count = count_quantities(cond.text);
    cond.source_sentence = p.sentence;
    cond.from_comma_split = p.split;
    size_t next_begin =
        (i + 1 < pieces.size()) ? pieces[i + 1].begin : question_span.begin;
    result.separators.emplace_back(
        text.substr(p.end, next_begin - p.end));
    result.conditions.push_back(std::move(cond));
  }
  return result;
}

MathWordProblem make_problem(std::string id, std::string raw_text,
                             GoldAnswer gold,
                             std::optional<int> n_reasoning_steps,
                             std::optional<std::set<int>> irrelevant) {
  SegmentationResult seg = segment_problem(raw_text);
  MathWordProblem problem;
  problem.id = std::move(id);
  problem.raw_text = std::move(raw_text);
  problem.conditions = std::move(seg.conditions);
  problem.question = std::move(seg.question);
  problem.gold_answer = gold;
  problem.n_reasoning_steps = n_reasoning_steps;
  problem.irrelevant_ground_truth = std::move(irrelevant);
  problem.separators = std::move(seg.separators);
  problem.sentence_terminators = std::move(seg.sentence_terminators);
  return problem;
}

std::string reconstruct_text(const MathWordProblem& problem) {
  std::string out;
  for (size_t i = 0; i < problem.conditions.size(); ++i) {
    out += problem.conditions[i].text;
    if (i < problem.separators.size()) out += problem.separators[i];
  }
  out += problem.question;
  return out;
}

}  // namespace i3c
