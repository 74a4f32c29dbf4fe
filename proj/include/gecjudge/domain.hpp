#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gecjudge/error.hpp"

namespace gecjudge {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

/// The three sub-metrics. The numeric value is the canonical index used for
/// score triples, weight vectors and judgment-matrix rows.
enum class Criterion : std::size_t {
  SemanticCoherence = 0,
  EditLevel = 1,
  Fluency = 2,
};

inline constexpr std::size_t kCriterionCount = 3;
inline constexpr std::array<Criterion, kCriterionCount> kCriteria{
    Criterion::SemanticCoherence, Criterion::EditLevel, Criterion::Fluency};

constexpr std::size_t index_of(Criterion c) { return static_cast<std::size_t>(c); }

/// Snake-case key used in JSON records ("semantic_coherence", ...).
std::string_view to_string(Criterion c);
std::string_view display_name(Criterion c);
std::vector<std::string> criterion_labels();

inline constexpr double kMinScore = 1.0;
inline constexpr double kMaxScore = 10.0;

// ---------------------------------------------------------------------------
// Sentence pairs and scores
// ---------------------------------------------------------------------------

struct SentencePair {
  std::string id;
  std::string system_id;
  std::string source;
  std::string hypothesis;
  std::optional<std::string> context_tag;
  /// Fields not known to this library, preserved verbatim on round trips.
  Json extra = Json::object();

  bool operator==(const SentencePair&) const = default;
};

/// Returns the pair unchanged when it is well formed; throws EmptyId or
/// EmptySource otherwise.
SentencePair validate_pair(SentencePair pair);

class SubMetricScores {
public:
  using Rationale = std::array<std::optional<std::string>, kCriterionCount>;

  /// Throws RangeError (naming the criterion) if any score is outside [1, 10].
  SubMetricScores(double semantic_coherence, double edit_level, double fluency,
                  Rationale rationale = {});
  explicit SubMetricScores(const std::array<double, kCriterionCount>& values,
                           Rationale rationale = {});

  double operator[](Criterion c) const { return values_[index_of(c)]; }
  double semantic_coherence() const { return values_[0]; }
  double edit_level() const { return values_[1]; }
  double fluency() const { return values_[2]; }

  std::span<const double, kCriterionCount> values() const { return values_; }
  const Rationale& rationale() const { return rationale_; }

  double min() const;
  double max() const;

  bool operator==(const SubMetricScores&) const = default;

private:
  std::array<double, kCriterionCount> values_;
  Rationale rationale_;
};

// ---------------------------------------------------------------------------
// AHP values
// ---------------------------------------------------------------------------

inline constexpr double kSaatyMin = 1.0 / 9.0;
inline constexpr double kSaatyMax = 9.0;
inline constexpr double kReciprocityTolerance = 1e-9;

/// Positive reciprocal pairwise-comparison matrix. Entry (i, j) is the
/// importance of criterion i relative to criterion j. Row-major storage.
class JudgmentMatrix {
public:
  /// Validates order >= 2, unit diagonal, reciprocity and Saaty-scale
  /// closure. Labels default to "c0", "c1", ... (or the criterion names when
  /// order == 3).
  JudgmentMatrix(std::size_t order, std::vector<double> entries,
                 std::vector<std::string> labels = {});

  /// Builds a matrix from its strict upper triangle, read row by row
  /// ((0,1), (0,2), ..., (1,2), ...). The lower triangle is filled with
  /// reciprocals, so the result is reciprocal by construction.
  static JudgmentMatrix from_upper_triangle(std::span<const double> upper,
                                            std::vector<std::string> labels = {});
  static JudgmentMatrix ones(std::size_t order, std::vector<std::string> labels = {});

  std::size_t order() const { return order_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * order_ + j]; }
  const std::vector<double>& entries() const { return entries_; }
  const std::vector<std::string>& labels() const { return labels_; }

  /// Copy with a_ij = value and a_ji = 1 / value.
  JudgmentMatrix with_entry(std::size_t i, std::size_t j, double value) const;

  bool operator==(const JudgmentMatrix&) const = default;

private:
  std::size_t order_;
  std::vector<double> entries_;
  std::vector<std::string> labels_;
};

struct ConsistencyReport {
  double lambda_max = 0.0;
  double ci = 0.0;
  double cr = 0.0;
  double ri = 0.0;
  bool consistent = true;

  bool operator==(const ConsistencyReport&) const = default;
};

enum class Provenance { Dynamic, Uniform, Fallback };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view text);

class WeightVector {
public:
  /// Throws WeightSumError unless every weight is positive and the sum is 1
  /// within 1e-9.
  WeightVector(std::vector<double> weights, ConsistencyReport report, Provenance provenance);

  static WeightVector uniform(std::size_t n, Provenance provenance);

  const std::vector<double>& weights() const { return weights_; }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::size_t size() const { return weights_.size(); }
  const ConsistencyReport& report() const { return report_; }
  Provenance provenance() const { return provenance_; }

  bool operator==(const WeightVector&) const = default;

private:
  std::vector<double> weights_;
  ConsistencyReport report_;
  Provenance provenance_;
};

inline constexpr double kWeightSumTolerance = 1e-9;

/// Convex combination of scores. The result is computed relative to the
/// smallest score and clamped to [min, max], so equal scores are a fixed
/// point and the convexity bound holds bit-exactly.
double weighted_score(std::span<const double> weights, std::span<const double> scores);

/// Counters describing how a record's weights were obtained.
struct WeightTrace {
  int elicitations = 0;
  int repair_rounds = 0;

  bool operator==(const WeightTrace&) const = default;
};

struct EvaluationRecord {
  SentencePair pair;
  SubMetricScores scores;
  WeightVector weights;
  double overall;
  WeightTrace trace;

  /// Computes `overall` from scores and weights (three weights required).
  static EvaluationRecord make(SentencePair pair, SubMetricScores scores, WeightVector weights,
                               WeightTrace trace = {});

  bool operator==(const EvaluationRecord&) const = default;
};

// ---------------------------------------------------------------------------
// Human judgments
// ---------------------------------------------------------------------------

enum class JudgmentLevel { System, Sentence };

std::string_view to_string(JudgmentLevel level);
JudgmentLevel judgment_level_from_string(std::string_view text);

/// One system's judgment for one sentence. Lower rank means better.
struct SystemJudgment {
  std::string system_id;
  double rank;

  bool operator==(const SystemJudgment&) const = default;
};

struct SentenceJudgments {
  std::string sentence_id;
  std::vector<SystemJudgment> systems;

  bool operator==(const SentenceJudgments&) const = default;
};

class HumanJudgmentTable {
public:
  /// Requires at least two distinct systems. Higher score means better.
  static HumanJudgmentTable system_level(std::vector<std::pair<std::string, double>> scores);
  /// Requires every sentence to list at least two distinct systems.
  static HumanJudgmentTable sentence_level(std::vector<SentenceJudgments> sentences);

  JudgmentLevel level() const { return level_; }
  const std::vector<std::pair<std::string, double>>& system_scores() const { return system_scores_; }
  const std::vector<SentenceJudgments>& sentences() const { return sentences_; }

private:
  HumanJudgmentTable() = default;

  JudgmentLevel level_ = JudgmentLevel::System;
  std::vector<std::pair<std::string, double>> system_scores_;
  std::vector<SentenceJudgments> sentences_;
};

}  // namespace gecjudge
