#include "gecjudge/scoring.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

namespace gecjudge::scoring {

namespace {

void emit(const WarningSink& warn, const std::string& message) {
  if (warn) warn(message);
}

std::string label_of(const SentencePair& pair) {
  return pair.id + "/" + pair.system_id;
}

// Runs `work(index)` for every index on up to `parallel` threads and gathers
// results by position.
BatchResult run_batch(std::span<const SentencePair> pairs, const BatchOptions& options,
                      const std::function<EvaluationRecord(const SentencePair&, const WarningSink&)>& work) {
  std::vector<std::optional<EvaluationRecord>> slots(pairs.size());
  std::vector<std::optional<PairFailure>> failures(pairs.size());
  std::vector<std::exception_ptr> errors(pairs.size());

  std::mutex warn_mutex;
  const WarningSink warn = [&](std::string_view message) {
    if (!options.warn) return;
    std::lock_guard lock(warn_mutex);
    options.warn(message);
  };

  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < pairs.size() && !abort.load();
         i = next.fetch_add(1)) {
      try {
        slots[i] = work(pairs[i], warn);
      } catch (const Error& e) {
        failures[i] = PairFailure{i, pairs[i].id, pairs[i].system_id, e.code(), e.what()};
        errors[i] = std::current_exception();
        if (options.strict) abort.store(true);
      }
    }
  };

  const std::size_t threads =
      std::min<std::size_t>(std::max(1, options.parallel), std::max<std::size_t>(pairs.size(), 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  BatchResult result;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (failures[i]) {
      if (options.strict) std::rethrow_exception(errors[i]);
      warn("pair " + label_of(pairs[i]) + " failed: " + failures[i]->message);
      result.failures.push_back(std::move(*failures[i]));
    } else if (slots[i]) {
      result.records.push_back(std::move(*slots[i]));
    }
  }
  return result;
}

void check_fixed_weights(std::span<const double> weights) {
  if (weights.size() != kCriterionCount) {
    throw Error(ErrorCode::WeightSumError, "expected three weights, got " + std::to_string(weights.size()));
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw Error(ErrorCode::WeightSumError, "fixed weights must be positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    std::ostringstream os;
    os << "fixed weights sum to " << sum << ", expected 1";
    throw Error(ErrorCode::WeightSumError, os.str());
  }
}

WeightVector fixed_weight_vector(std::span<const double> weights) {
  check_fixed_weights(weights);
  double sum = 0.0;
  for (double w : weights) sum += w;
  std::vector<double> normalized;
  for (double w : weights) normalized.push_back(w / sum);
  ConsistencyReport report;
  report.lambda_max = static_cast<double>(kCriterionCount);
  return WeightVector(std::move(normalized), report, Provenance::Uniform);
}

}  // namespace

SettledWeights settle_weights(const MatrixSource& source, const WeightPolicy& policy,
                              const WarningSink& warn, std::string_view label) {
  if (policy.reelicit_attempts < 0) {
    throw Error(ErrorCode::InvalidArgument, "re-elicitation attempts must be >= 0");
  }
  WeightTrace trace;
  std::optional<JudgmentMatrix> last;
  std::optional<double> previous_cr;
  ConsistencyReport last_report;

  for (int attempt = 0; attempt <= policy.reelicit_attempts; ++attempt) {
    JudgmentMatrix matrix = source(attempt, previous_cr);
    ++trace.elicitations;
    WeightVector weights = ahp::derive_weights(matrix, policy.theta);
    if (weights.report().consistent) return SettledWeights{std::move(weights), trace};
    previous_cr = weights.report().cr;
    last_report = weights.report();
    last = std::move(matrix);
  }

  try {
    ahp::RepairResult repaired = ahp::repair(*last, policy.theta, policy.repair_rounds);
    trace.repair_rounds = repaired.rounds;
    return SettledWeights{ahp::derive_weights(repaired.matrix, policy.theta), trace};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::RepairFailed || policy.fallback == FallbackMode::Fail) throw;
    trace.repair_rounds = policy.repair_rounds;
    std::ostringstream os;
    os << "pair " << label << ": judgment matrix stayed inconsistent (CR " << last_report.cr
       << ") after " << trace.elicitations << " elicitation(s) and repair; using uniform weights";
    emit(warn, os.str());
    std::vector<double> uniform(last->order(), 1.0 / static_cast<double>(last->order()));
    return SettledWeights{WeightVector(std::move(uniform), last_report, Provenance::Fallback), trace};
  }
}

EvaluationRecord evaluate_pair(const SentencePair& pair, llm::Backend& backend,
                               const PromptSet& prompts, const WeightPolicy& policy,
                               const WarningSink& warn) {
  auto scores = backend.elicit_scores(prompts.scores, pair);
  const MatrixSource source = [&](int attempt, std::optional<double> previous_cr) {
    return backend.elicit_judgment_matrix(prompts.weights, pair, attempt, previous_cr).value;
  };
  SettledWeights settled = settle_weights(source, policy, warn, label_of(pair));
  return EvaluationRecord::make(pair, std::move(scores.value), std::move(settled.weights),
                                settled.trace);
}

BatchResult dynamic_weight_calculation(std::span<const SentencePair> pairs, llm::Backend& backend,
                                       const PromptSet& prompts, const WeightPolicy& policy,
                                       const BatchOptions& options) {
  if (pairs.empty()) throw Error(ErrorCode::InvalidArgument, "no sentence pairs to score");
  const std::size_t requests_before = backend.request_count();
  const std::size_t hits_before = backend.cache_hits();
  BatchResult result = run_batch(pairs, options, [&](const SentencePair& pair, const WarningSink& warn) {
    return evaluate_pair(pair, backend, prompts, policy, warn);
  });
  result.requests = backend.request_count() - requests_before;
  result.cache_hits = backend.cache_hits() - hits_before;
  return result;
}

double fixed_weight_score(const SubMetricScores& scores, std::span<const double> weights) {
  check_fixed_weights(weights);
  return weighted_score(weights, scores.values());
}

BatchResult fixed_weight_calculation(std::span<const SentencePair> pairs, llm::Backend& backend,
                                     const PromptSet& prompts, std::span<const double> weights,
                                     const BatchOptions& options) {
  if (pairs.empty()) throw Error(ErrorCode::InvalidArgument, "no sentence pairs to score");
  const WeightVector fixed = fixed_weight_vector(weights);
  const std::size_t requests_before = backend.request_count();
  const std::size_t hits_before = backend.cache_hits();
  BatchResult result = run_batch(pairs, options, [&](const SentencePair& pair, const WarningSink&) {
    auto scores = backend.elicit_scores(prompts.scores, pair);
    return EvaluationRecord::make(pair, std::move(scores.value), fixed);
  });
  result.requests = backend.request_count() - requests_before;
  result.cache_hits = backend.cache_hits() - hits_before;
  return result;
}

std::vector<EvaluationRecord> fixed_weight_records(std::span<const io::ScoredPair> rows,
                                                   std::span<const double> weights) {
  const WeightVector fixed = fixed_weight_vector(weights);
  std::vector<EvaluationRecord> records;
  records.reserve(rows.size());
  for (const auto& row : rows) records.push_back(EvaluationRecord::make(row.pair, row.scores, fixed));
  return records;
}

double system_score(std::span<const EvaluationRecord> records, const std::string& system_id) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& r : records) {
    if (r.pair.system_id == system_id) {
      sum += r.overall;
      ++count;
    }
  }
  if (count == 0) {
    throw Error(ErrorCode::UnknownSystem, "no records for system '" + system_id + "'", system_id);
  }
  return sum / static_cast<double>(count);
}

std::map<std::string, double> system_scores(std::span<const EvaluationRecord> records) {
  std::map<std::string, std::pair<double, std::size_t>> sums;
  for (const auto& r : records) {
    auto& [sum, count] = sums[r.pair.system_id];
    sum += r.overall;
    ++count;
  }
  std::map<std::string, double> out;
  for (const auto& [system, acc] : sums) out[system] = acc.first / static_cast<double>(acc.second);
  return out;
}

Json run_manifest(const BatchResult& result, const llm::BackendConfig& config,
                  const PromptSet& prompts, const WeightPolicy& policy, std::string_view mode) {
  Json settings;
  settings["mode"] = std::string(mode);
  settings["backend"] = config.fingerprint();
  settings["templates"] = {prompts.scores.id(), prompts.weights.id()};
  settings["policy"] = {{"theta", policy.theta},
                        {"reelicit_attempts", policy.reelicit_attempts},
                        {"repair_rounds", policy.repair_rounds},
                        {"fallback", policy.fallback == FallbackMode::Uniform ? "uniform" : "fail"}};
  Json templates;
  templates["scores"] = prompts.scores.to_json();
  templates["weights"] = prompts.weights.to_json();

  std::map<std::string, std::size_t> counts{{"dynamic", 0}, {"repaired", 0}, {"fallback", 0}, {"uniform", 0}};
  for (const auto& r : result.records) {
    ++counts[std::string(to_string(r.weights.provenance()))];
    if (r.trace.repair_rounds > 0 && r.weights.provenance() == Provenance::Dynamic) ++counts["repaired"];
  }

  Json manifest;
  manifest["config_hash"] = llm::sha256_hex(settings.dump() + templates.dump());
  manifest["settings"] = settings;
  manifest["template_versions"] = {{"scores", prompts.scores.id()}, {"weights", prompts.weights.id()}};
  manifest["counts"] = {{"total", result.records.size() + result.failures.size()},
                        {"succeeded", result.records.size()},
                        {"failed", result.failures.size()},
                        {"dynamic", counts["dynamic"]},
                        {"repaired", counts["repaired"]},
                        {"fallback", counts["fallback"]},
                        {"uniform", counts["uniform"]}};
  manifest["requests"] = result.requests;
  manifest["cache_hits"] = result.cache_hits;
  manifest["failures"] = Json::array();
  for (const auto& f : result.failures) {
    manifest["failures"].push_back({{"index", f.index},
                                    {"id", f.id},
                                    {"system_id", f.system_id},
                                    {"error", std::string(to_string(f.code))},
                                    {"message", f.message}});
  }
  return manifest;
}

}  // namespace gecjudge::scoring
