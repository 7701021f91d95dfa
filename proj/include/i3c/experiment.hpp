#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "i3c/dataset.hpp"
#include "i3c/eval.hpp"
#include "i3c/select.hpp"

namespace i3c {

// Remote endpoints; unused in replay mode. Chat and embeddings may live
// on different hosts.
struct EndpointSettings {
  std::string chat_url;
  std::string embed_url;
  std::string api_token;
  int timeout_seconds = 120;
};

struct ExperimentConfig {
  std::filesystem::path dataset_path;
  // Method labels; "+i3c" adds the instruction stage and a trailing
  // "+sc" wraps the method in self-consistency sampling.
  std::vector<std::string> methods;
  double threshold = 0.5;
  size_t embedding_dim = 1024;
  int k_demos = 8;
  SelectionMode demo_mode = SelectionMode::High;
  uint64_t demo_seed = 0;
  int n_samples = 10;  // self-consistency draws per problem
  double temperature = 0.7;
  std::string model_id = "default-model";
  int max_tokens_reasoning = 512;
  int max_tokens_verification = 256;
  int max_tokens_extraction = 256;
  int workers = 4;
  StoreMode store_mode = StoreMode::Replay;
  std::filesystem::path store_path;
  std::filesystem::path output_dir;
  std::filesystem::path demo_file;      // ready-made demonstrations
  std::filesystem::path training_path;  // corpus for building demonstrations
  bool filter_correct_demos = false;
  EndpointSettings endpoints;
};

// One entry of the method list, with the sampling wrapper split off.
struct MethodSpec {
  PromptMethod method;
  bool self_consistency = false;
  std::string label;  // as configured, e.g. "zero-shot-cot+i3c+sc"
};

MethodSpec parse_method_spec(std::string_view label);

// Builds the provider described by the config: opens the store for
// record/replay modes and wires HTTP transports when endpoints are set.
// Replay mode needs no endpoints at all.
Provider make_provider(const ExperimentConfig& config);

// Transcript serialization, one record per line.
std::string answer_record_to_json(const AnswerRecord& record);
AnswerRecord answer_record_from_json(const std::string& line);

struct ExperimentResult {
  std::vector<AnswerRecord> records;  // method-major, dataset order
  EvalReport report;
  std::filesystem::path transcript_path;
  std::filesystem::path report_json_path;
  std::filesystem::path report_text_path;
  std::filesystem::path manifest_path;
};

// Runs every configured method over the whole dataset through a worker
// pool, then writes transcript.jsonl, report.json, report.txt and
// manifest.json into the output directory. The first failure aborts the
// run and is rethrown with the problem id and method attached.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Candidate-threshold sweep over annotated problems; writes sweep.csv
// into the output directory when one is set.
RecallReport sweep_threshold(const ExperimentConfig& config,
                             const std::vector<double>& theta_grid);

struct DemoSelection {
  std::vector<RankedProblem> ranking;  // full corpus, most confusing first
  std::vector<RankedProblem> picked;   // the K chosen entries
  std::vector<Demonstration> demos;
};

// Ranks the training corpus and builds the configured demonstrations.
DemoSelection select_demos(const ExperimentConfig& config);

}  // namespace i3c
