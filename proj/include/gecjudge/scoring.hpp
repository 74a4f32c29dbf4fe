#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gecjudge/ahp.hpp"
#include "gecjudge/data_io.hpp"
#include "gecjudge/domain.hpp"
#include "gecjudge/llm_backend.hpp"

/// Per-sentence scoring: sub-metric scores, dynamic AHP weights with
/// consistency enforcement, weighted aggregation and the fixed-weight
/// baseline.
namespace gecjudge::scoring {

enum class FallbackMode { Uniform, Fail };

struct WeightPolicy {
  double theta = ahp::kDefaultTheta;
  /// Extra elicitations after an inconsistent matrix.
  int reelicit_attempts = 2;
  int repair_rounds = ahp::kDefaultRepairRounds;
  FallbackMode fallback = FallbackMode::Uniform;
};

struct PromptSet {
  llm::PromptTemplate scores = llm::default_score_template();
  llm::PromptTemplate weights = llm::default_weight_template();
};

using WarningSink = std::function<void(std::string_view)>;

struct BatchOptions {
  int parallel = 4;
  /// Fail fast: the first pair-level error aborts the batch.
  bool strict = false;
  WarningSink warn;
};

struct PairFailure {
  std::size_t index;
  std::string id;
  std::string system_id;
  ErrorCode code;
  std::string message;
};

struct BatchResult {
  std::vector<EvaluationRecord> records;  // input order, failed pairs omitted
  std::vector<PairFailure> failures;
  std::size_t requests = 0;
  std::size_t cache_hits = 0;
};

/// Produces a judgment matrix for the given attempt; `previous_cr` is the CR
/// of the previous attempt's matrix.
using MatrixSource = std::function<JudgmentMatrix(int attempt, std::optional<double> previous_cr)>;

struct SettledWeights {
  WeightVector weights;
  WeightTrace trace;
};

/// Fallback chain: elicit; on CR >= theta re-elicit up to the policy budget;
/// then repair the last matrix; then uniform weights tagged Fallback (or an
/// error under FallbackMode::Fail).
SettledWeights settle_weights(const MatrixSource& source, const WeightPolicy& policy,
                              const WarningSink& warn = {}, std::string_view label = {});

EvaluationRecord evaluate_pair(const SentencePair& pair, llm::Backend& backend,
                               const PromptSet& prompts, const WeightPolicy& policy,
                               const WarningSink& warn = {});

/// Scores every pair with dynamic weights. Pair-level failures are recorded
/// and skipped unless options.strict is set, in which case the error of the
/// first failing pair (by input position) is rethrown.
BatchResult dynamic_weight_calculation(std::span<const SentencePair> pairs, llm::Backend& backend,
                                       const PromptSet& prompts, const WeightPolicy& policy,
                                       const BatchOptions& options = {});

/// Sum of w_i * s_i. Weights must be three positive values summing to 1
/// within 1e-6 (WeightSumError otherwise).
double fixed_weight_score(const SubMetricScores& scores, std::span<const double> weights);

inline constexpr std::array<double, kCriterionCount> kUniformWeights{1.0 / 3.0, 1.0 / 3.0,
                                                                     1.0 / 3.0};

/// Elicits scores only and aggregates them with fixed weights (provenance
/// Uniform).
BatchResult fixed_weight_calculation(std::span<const SentencePair> pairs, llm::Backend& backend,
                                     const PromptSet& prompts, std::span<const double> weights,
                                     const BatchOptions& options = {});

/// Re-aggregates already scored pairs with fixed weights.
std::vector<EvaluationRecord> fixed_weight_records(std::span<const io::ScoredPair> rows,
                                                   std::span<const double> weights);

/// Mean overall score of one system. Throws UnknownSystem.
double system_score(std::span<const EvaluationRecord> records, const std::string& system_id);
std::map<std::string, double> system_scores(std::span<const EvaluationRecord> records);

/// Summary written next to a score file: configuration hash, template
/// versions, provenance counts and failures.
Json run_manifest(const BatchResult& result, const llm::BackendConfig& config,
                  const PromptSet& prompts, const WeightPolicy& policy, std::string_view mode);

}  // namespace gecjudge::scoring
