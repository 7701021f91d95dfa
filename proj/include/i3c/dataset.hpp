#pragma once

#include <filesystem>
#include <vector>

#include "i3c/problem.hpp"

namespace i3c {

// Reads a problem corpus from JSONL. Each line holds
//   {"question": ..., "answer": ...}
// plus optional "id" (defaults to the line's position, "0", "1", ...),
// "steps", and "irrelevant_sentence_indices". The answer is a number or
// a choice letter A-E. Sentence annotations refer to the condition
// sentences of the segmented text, in order; they are mapped to the
// condition indices that came out of those sentences. Malformed lines
// raise ParseError naming the line; an annotation pointing past the
// last condition sentence raises AnnotationMismatchError.
std::vector<MathWordProblem> ingest_dataset(const std::filesystem::path& path);

// Inverse of ingest_dataset: writes one JSONL line per problem, with
// annotations expressed as the sentence indices that contain at least
// one annotated condition. A corpus ingested from sentence-level
// annotations survives the round trip unchanged.
void write_dataset(const std::filesystem::path& path,
                   const std::vector<MathWordProblem>& problems);

}  // namespace i3c
