#include "i3c/experiment.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "i3c/http_transport.hpp"

namespace i3c {

using nlohmann::json;

MethodSpec parse_method_spec(std::string_view label) {
  MethodSpec spec;
  spec.label = std::string(label);
  std::string base(label);
  const std::string suffix = "+sc";
  if (base.size() > suffix.size() &&
      base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
    spec.self_consistency = true;
    base.resize(base.size() - suffix.size());
  }
  spec.method = parse_method_label(base);
  return spec;
}

namespace {

// "http://host:9000/v1/chat" -> {"http://host:9000", "/v1/chat"}.
std::pair<std::string, std::string> split_url(const std::string& url,
                                              const std::string& fallback_path) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw PreconditionError("endpoint url \"" + url +
                            "\" has no scheme, expected http(s)://...");
  }
  auto path = url.find('/', scheme + 3);
  if (path == std::string::npos) return {url, fallback_path};
  return {url.substr(0, path), url.substr(path)};
}

ChatTransport unwired_chat() {
  return [](const CompletionRequest&) -> CompletionResponse {
    throw TransportError("no chat endpoint configured");
  };
}

EmbedTransport unwired_embed() {
  return [](const std::vector<std::string>&)
             -> std::vector<std::vector<double>> {
    throw TransportError("no embedding endpoint configured");
  };
}

SolveOptions solve_options(const ExperimentConfig& config) {
  SolveOptions options;
  options.model_id = config.model_id;
  options.temperature = config.temperature;
  options.threshold = config.threshold;
  options.max_tokens_reasoning = config.max_tokens_reasoning;
  options.max_tokens_verification = config.max_tokens_verification;
  options.max_tokens_extraction = config.max_tokens_extraction;
  return options;
}

}  // namespace

Provider make_provider(const ExperimentConfig& config) {
  std::shared_ptr<ReplayStore> store;
  if (config.store_mode != StoreMode::Passthrough) {
    if (config.store_path.empty()) {
      throw PreconditionError("record and replay modes need a store path");
    }
    store = std::make_shared<ReplayStore>(config.store_path);
  }

  ChatTransport chat = unwired_chat();
  EmbedTransport embed = unwired_embed();
  const bool needs_wire = config.store_mode != StoreMode::Replay;
  if (needs_wire) {
    if (config.endpoints.chat_url.empty() ||
        config.endpoints.embed_url.empty()) {
      throw PreconditionError(
          "live modes need chat and embedding endpoint urls");
    }
  }
  if (!config.endpoints.chat_url.empty()) {
    auto [base, path] = split_url(config.endpoints.chat_url, "/v1/chat");
    HttpEndpointConfig http;
    http.base_url = base;
    http.chat_path = path;
    http.auth_token = config.endpoints.api_token;
    http.timeout_seconds = config.endpoints.timeout_seconds;
    chat = make_http_chat_transport(http);
  }
  if (!config.endpoints.embed_url.empty()) {
    auto [base, path] = split_url(config.endpoints.embed_url, "/v1/embed");
    HttpEndpointConfig http;
    http.base_url = base;
    http.embed_path = path;
    http.auth_token = config.endpoints.api_token;
    http.timeout_seconds = config.endpoints.timeout_seconds;
    embed = make_http_embed_transport(http);
  }

  ProviderLimits limits;
  limits.max_in_flight = config.workers;
  return Provider(config.store_mode, std::move(store), std::move(chat),
                  std::move(embed), config.embedding_dim, limits);
}

namespace {

std::string_view verdict_label(Verdict v) { return verdict_name(v); }

Verdict verdict_from_label(const std::string& name) {
  if (name == "relevant") return Verdict::Relevant;
  if (name == "irrelevant") return Verdict::Irrelevant;
  if (name == "unclear") return Verdict::Unclear;
  throw ParseError("unknown verdict \"" + name + "\"");
}

}  // namespace

std::string answer_record_to_json(const AnswerRecord& record) {
  json j;
  j["problem_id"] = record.problem_id;
  j["method"] = record.method_label;
  j["reasoning_path"] = record.reasoning_path;
  switch (record.extracted.kind) {
    case ExtractedAnswer::Kind::Numeric:
      j["extracted"] = {{"kind", "numeric"},
                        {"value", record.extracted.numeric_value}};
      break;
    case ExtractedAnswer::Kind::Option:
      j["extracted"] = {{"kind", "option"},
                        {"value", std::string(1, record.extracted.option)}};
      break;
    case ExtractedAnswer::Kind::Abstain:
      j["extracted"] = {{"kind", "abstain"}};
      break;
  }
  j["prompt_tokens"] = record.prompt_tokens;
  j["completion_tokens"] = record.completion_tokens;
  j["wall_ms"] = record.wall_ms;
  j["n_llm_calls"] = record.n_llm_calls;
  if (!record.verified_indices.empty()) {
    json verified = json::array();
    for (size_t i = 0; i < record.verified_indices.size(); ++i) {
      verified.push_back(
          {{"index", record.verified_indices[i]},
           {"verdict", std::string(verdict_label(record.verified_verdicts[i]))}});
    }
    j["verified"] = verified;
  }
  return j.dump();
}

AnswerRecord answer_record_from_json(const std::string& line) {
  AnswerRecord record;
  try {
    json j = json::parse(line);
    record.problem_id = j.at("problem_id").get<std::string>();
    record.method_label = j.at("method").get<std::string>();
    record.reasoning_path = j.at("reasoning_path").get<std::string>();
    const json& extracted = j.at("extracted");
    std::string kind = extracted.at("kind").get<std::string>();
    if (kind == "numeric") {
      record.extracted =
          ExtractedAnswer::numeric(extracted.at("value").get<double>());
    } else if (kind == "option") {
      std::string value = extracted.at("value").get<std::string>();
      if (value.size() != 1) throw ParseError("option value must be a letter");
      record.extracted = ExtractedAnswer::option_label(value[0]);
    } else if (kind == "abstain") {
      record.extracted = ExtractedAnswer::abstain();
    } else {
      throw ParseError("unknown extraction kind \"" + kind + "\"");
    }
    record.prompt_tokens = j.at("prompt_tokens").get<long>();
    record.completion_tokens = j.at("completion_tokens").get<long>();
    record.wall_ms = j.at("wall_ms").get<long>();
    record.n_llm_calls = j.at("n_llm_calls").get<int>();
    if (j.contains("verified")) {
      for (const auto& entry : j.at("verified")) {
        record.verified_indices.push_back(entry.at("index").get<int>());
        record.verified_verdicts.push_back(
            verdict_from_label(entry.at("verdict").get<std::string>()));
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("transcript record: ") + e.what());
  }
  return record;
}

namespace {

struct DemoSets {
  std::vector<Demonstration> user;      // manual/auto/complex methods
  std::vector<Demonstration> selected;  // i3c-select
};

DemoSets resolve_demos(const ExperimentConfig& config,
                        const std::vector<MethodSpec>& specs,
                        Provider& provider) {
  DemoSets sets;
  bool wants_user_file = false;
  bool wants_selected = false;
  for (const auto& spec : specs) {
    if (spec.method.demo_source() == DemoSource::UserFile) {
      wants_user_file = true;
    }
    if (spec.method.demo_source() == DemoSource::Selected) {
      wants_selected = true;
    }
  }
  if (wants_user_file) {
    if (config.demo_file.empty()) {
      throw PreconditionError(
          "few-shot methods need a demonstration file (--demos)");
    }
    sets.user = load_demonstrations(config.demo_file);
  }
  if (wants_selected) {
    if (!config.demo_file.empty()) {
      sets.selected = load_demonstrations(config.demo_file);
    } else if (!config.training_path.empty()) {
      auto training = ingest_dataset(config.training_path);
      auto ranking = rank_by_confusion(training, provider);
      SelectOptions options;
      options.k = config.k_demos;
      options.mode = config.demo_mode;
      options.seed = config.demo_seed;
      options.filter_correct = config.filter_correct_demos;
      options.solve = solve_options(config);
      sets.selected = build_demonstrations(ranking, provider, options);
    } else {
      throw PreconditionError(
          "i3c-select needs a demonstration file or a training corpus");
    }
  }
  return sets;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.methods.empty()) {
    throw PreconditionError("method list is empty");
  }
  if (config.output_dir.empty()) {
    throw PreconditionError("output directory is required");
  }
  std::vector<MethodSpec> specs;
  specs.reserve(config.methods.size());
  for (const auto& label : config.methods) {
    specs.push_back(parse_method_spec(label));
  }

  auto problems = ingest_dataset(config.dataset_path);
  if (problems.empty()) {
    throw EmptyRecordSetError("dataset " + config.dataset_path.string() +
                              " has no problems");
  }
  Provider provider = make_provider(config);
  DemoSets demos = resolve_demos(config, specs, provider);

  const size_t n_problems = problems.size();
  const size_t n_tasks = specs.size() * n_problems;
  std::vector<AnswerRecord> records(n_tasks);

  std::atomic<size_t> next_task{0};
  std::atomic<bool> stop{false};
  std::mutex failure_mutex;
  std::string failure_context;
  std::exception_ptr failure;

  auto worker = [&]() {
    while (!stop.load()) {
      size_t task = next_task.fetch_add(1);
      if (task >= n_tasks) return;
      const MethodSpec& spec = specs[task / n_problems];
      const MathWordProblem& problem = problems[task % n_problems];
      try {
        SolveContext context{provider, solve_options(config)};
        switch (spec.method.demo_source()) {
          case DemoSource::UserFile:
            context.demos = &demos.user;
            break;
          case DemoSource::Selected:
            context.demos = &demos.selected;
            break;
          case DemoSource::None:
            break;
        }
        AnswerRecord record =
            spec.self_consistency
                ? self_consistency(problem, spec.method, context,
                                   config.n_samples)
                : solve(problem, spec.method, context, 0);
        record.method_label = spec.label;
        records[task] = std::move(record);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
          failure_context = "problem " + problem.id + ", method " + spec.label;
        }
        stop.store(true);
        return;
      }
    }
  };

  const int n_workers =
      std::max(1, std::min<int>(config.workers, static_cast<int>(n_tasks)));
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const ProviderError& e) {
      throw ProviderError(failure_context + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(failure_context + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(failure_context + ": " + e.what());
    }
  }

  ExperimentResult result;
  result.records = std::move(records);
  result.report = build_eval_report(result.records, problems);

  std::filesystem::create_directories(config.output_dir);
  result.transcript_path = config.output_dir / "transcript.jsonl";
  result.report_json_path = config.output_dir / "report.json";
  result.report_text_path = config.output_dir / "report.txt";
  result.manifest_path = config.output_dir / "manifest.json";

  {
    std::ofstream out(result.transcript_path, std::ios::trunc);
    if (!out.is_open()) {
      throw Error("cannot write " + result.transcript_path.string());
    }
    for (const auto& record : result.records) {
      out << answer_record_to_json(record) << "\n";
    }
  }
  {
    std::ofstream out(result.report_json_path, std::ios::trunc);
    out << result.report.to_json() << "\n";
  }
  {
    std::ofstream out(result.report_text_path, std::ios::trunc);
    out << result.report.to_text();
  }
  {
    json manifest;
    manifest["dataset"] = {{"path", config.dataset_path.string()},
                           {"n_problems", problems.size()}};
    manifest["methods"] = config.methods;
    manifest["settings"] = {
        {"threshold", config.threshold},
        {"embedding_dim", config.embedding_dim},
        {"k_demos", config.k_demos},
        {"n_samples", config.n_samples},
        {"temperature", config.temperature},
        {"model_id", config.model_id},
        {"max_tokens_reasoning", config.max_tokens_reasoning},
        {"max_tokens_verification", config.max_tokens_verification},
        {"max_tokens_extraction", config.max_tokens_extraction},
        {"workers", config.workers},
    };
    const char* mode = config.store_mode == StoreMode::Record    ? "record"
                       : config.store_mode == StoreMode::Replay ? "replay"
                                                                : "passthrough";
    json store = {{"mode", mode}};
    if (!config.store_path.empty()) {
      store["path"] = config.store_path.string();
      store["entries"] = provider.mode() == StoreMode::Passthrough
                             ? 0
                             : static_cast<long>(ReplayStore(config.store_path).size());
    }
    manifest["store"] = store;
    manifest["n_records"] = result.records.size();
    std::ofstream out(result.manifest_path, std::ios::trunc);
    out << manifest.dump(2) << "\n";
  }
  return result;
}

RecallReport sweep_threshold(const ExperimentConfig& config,
                             const std::vector<double>& theta_grid) {
  if (theta_grid.empty()) {
    throw PreconditionError("threshold grid is empty");
  }
  auto problems = ingest_dataset(config.dataset_path);
  Provider provider = make_provider(config);
  RecallReport report = recall_sweep(problems, theta_grid, provider);
  if (!config.output_dir.empty()) {
    std::filesystem::create_directories(config.output_dir);
    std::ofstream out(config.output_dir / "sweep.csv", std::ios::trunc);
    out << report.to_csv();
  }
  return report;
}

DemoSelection select_demos(const ExperimentConfig& config) {
  if (config.training_path.empty()) {
    throw PreconditionError("demonstration selection needs a training corpus");
  }
  auto training = ingest_dataset(config.training_path);
  Provider provider = make_provider(config);
  DemoSelection selection;
  selection.ranking = rank_by_confusion(training, provider);
  selection.picked = select_problems(selection.ranking, config.k_demos,
                                     config.demo_mode, config.demo_seed);
  SelectOptions options;
  options.k = config.k_demos;
  options.mode = config.demo_mode;
  options.seed = config.demo_seed;
  options.filter_correct = config.filter_correct_demos;
  options.solve = solve_options(config);
  selection.demos = build_demonstrations(selection.ranking, provider, options);
  return selection;
}

}  // namespace i3c
