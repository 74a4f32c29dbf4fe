#include "gecjudge/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace gecjudge {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyId: return "EmptyId";
    case ErrorCode::EmptySource: return "EmptySource";
    case ErrorCode::InvalidMatrix: return "InvalidMatrix";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::RangeError: return "RangeError";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorCode::RepairFailed: return "RepairFailed";
    case ErrorCode::InconsistentLevel: return "InconsistentLevel";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ScaleError: return "ScaleError";
    case ErrorCode::TemplateError: return "TemplateError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::WeightSumError: return "WeightSumError";
    case ErrorCode::UnknownSystem: return "UnknownSystem";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::MissingScore: return "MissingScore";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::LineCountMismatch: return "LineCountMismatch";
    case ErrorCode::EmptyTable: return "EmptyTable";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::string field,
             std::optional<std::size_t> line)
    : std::runtime_error(message), code_(code), field_(std::move(field)), line_(line) {}

std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::SemanticCoherence: return "semantic_coherence";
    case Criterion::EditLevel: return "edit_level";
    case Criterion::Fluency: return "fluency";
  }
  return "";
}

std::string_view display_name(Criterion c) {
  switch (c) {
    case Criterion::SemanticCoherence: return "Semantic Coherence";
    case Criterion::EditLevel: return "Edit Level";
    case Criterion::Fluency: return "Fluency";
  }
  return "";
}

std::vector<std::string> criterion_labels() {
  std::vector<std::string> labels;
  for (Criterion c : kCriteria) labels.emplace_back(to_string(c));
  return labels;
}

SentencePair validate_pair(SentencePair pair) {
  if (pair.id.empty()) {
    throw Error(ErrorCode::EmptyId, "sentence pair has an empty id", "id");
  }
  if (pair.source.empty()) {
    throw Error(ErrorCode::EmptySource, "sentence pair '" + pair.id + "' has an empty source",
                "source");
  }
  return pair;
}

// ---------------------------------------------------------------------------

SubMetricScores::SubMetricScores(double semantic_coherence, double edit_level, double fluency,
                                 Rationale rationale)
    : SubMetricScores(std::array<double, kCriterionCount>{semantic_coherence, edit_level, fluency},
                      std::move(rationale)) {}

SubMetricScores::SubMetricScores(const std::array<double, kCriterionCount>& values,
                                 Rationale rationale)
    : values_(values), rationale_(std::move(rationale)) {
  for (Criterion c : kCriteria) {
    const double v = values_[index_of(c)];
    if (!(v >= kMinScore && v <= kMaxScore)) {
      std::ostringstream os;
      os << std::string(to_string(c)) << " score " << v << " is outside [1, 10]";
      throw Error(ErrorCode::RangeError, os.str(), std::string(to_string(c)));
    }
  }
}

double SubMetricScores::min() const { return *std::min_element(values_.begin(), values_.end()); }
double SubMetricScores::max() const { return *std::max_element(values_.begin(), values_.end()); }

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> default_labels(std::size_t order) {
  if (order == kCriterionCount) return criterion_labels();
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < order; ++i) labels.push_back("c" + std::to_string(i));
  return labels;
}

bool within_saaty_scale(double v) {
  constexpr double slack = 1e-12;
  return v >= kSaatyMin * (1.0 - slack) && v <= kSaatyMax * (1.0 + slack);
}

}  // namespace

JudgmentMatrix::JudgmentMatrix(std::size_t order, std::vector<double> entries,
                               std::vector<std::string> labels)
    : order_(order), entries_(std::move(entries)), labels_(std::move(labels)) {
  if (order_ < 2) {
    throw Error(ErrorCode::InvalidMatrix, "judgment matrix order must be at least 2");
  }
  if (entries_.size() != order_ * order_) {
    throw Error(ErrorCode::InvalidMatrix, "judgment matrix of order " + std::to_string(order_) +
                                              " needs " + std::to_string(order_ * order_) +
                                              " entries, got " + std::to_string(entries_.size()));
  }
  if (labels_.empty()) labels_ = default_labels(order_);
  if (labels_.size() != order_) {
    throw Error(ErrorCode::InvalidMatrix, "judgment matrix label count does not match its order");
  }
  for (std::size_t i = 0; i < order_; ++i) {
    for (std::size_t j = 0; j < order_; ++j) {
      const double a = (*this)(i, j);
      std::ostringstream where;
      where << "a(" << i << "," << j << ")";
      if (!std::isfinite(a) || !within_saaty_scale(a)) {
        throw Error(ErrorCode::InvalidMatrix,
                    "entry " + where.str() + " is outside the Saaty scale [1/9, 9]", where.str());
      }
      if (i == j && a != 1.0) {
        throw Error(ErrorCode::InvalidMatrix, "diagonal entry " + where.str() + " is not 1",
                    where.str());
      }
      if (std::abs(a * (*this)(j, i) - 1.0) > kReciprocityTolerance) {
        throw Error(ErrorCode::InvalidMatrix, "entry " + where.str() + " is not reciprocal",
                    where.str());
      }
    }
  }
}

JudgmentMatrix JudgmentMatrix::from_upper_triangle(std::span<const double> upper,
                                                   std::vector<std::string> labels) {
  std::size_t order = 2;
  while (order * (order - 1) / 2 < upper.size()) ++order;
  if (order * (order - 1) / 2 != upper.size()) {
    throw Error(ErrorCode::InvalidMatrix,
                std::to_string(upper.size()) + " values do not form a strict upper triangle");
  }
  std::vector<double> entries(order * order, 1.0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < order; ++i) {
    for (std::size_t j = i + 1; j < order; ++j) {
      const double v = upper[k++];
      if (!(v > 0.0)) {
        throw Error(ErrorCode::InvalidMatrix, "judgment values must be positive");
      }
      entries[i * order + j] = v;
      entries[j * order + i] = 1.0 / v;
    }
  }
  return JudgmentMatrix(order, std::move(entries), std::move(labels));
}

JudgmentMatrix JudgmentMatrix::ones(std::size_t order, std::vector<std::string> labels) {
  return JudgmentMatrix(order, std::vector<double>(order * order, 1.0), std::move(labels));
}

JudgmentMatrix JudgmentMatrix::with_entry(std::size_t i, std::size_t j, double value) const {
  if (i >= order_ || j >= order_ || i == j) {
    throw Error(ErrorCode::InvalidArgument, "with_entry needs an off-diagonal index");
  }
  std::vector<double> entries = entries_;
  entries[i * order_ + j] = value;
  entries[j * order_ + i] = 1.0 / value;
  return JudgmentMatrix(order_, std::move(entries), labels_);
}

// ---------------------------------------------------------------------------

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Dynamic: return "dynamic";
    case Provenance::Uniform: return "uniform";
    case Provenance::Fallback: return "fallback";
  }
  return "";
}

Provenance provenance_from_string(std::string_view text) {
  if (text == "dynamic") return Provenance::Dynamic;
  if (text == "uniform") return Provenance::Uniform;
  if (text == "fallback") return Provenance::Fallback;
  throw Error(ErrorCode::InvalidArgument, "unknown provenance '" + std::string(text) + "'");
}

WeightVector::WeightVector(std::vector<double> weights, ConsistencyReport report,
                           Provenance provenance)
    : weights_(std::move(weights)), report_(report), provenance_(provenance) {
  if (weights_.empty()) {
    throw Error(ErrorCode::WeightSumError, "weight vector is empty");
  }
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w > 0.0)) throw Error(ErrorCode::WeightSumError, "weights must be positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > kWeightSumTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "weights sum to " << sum << ", expected 1";
    throw Error(ErrorCode::WeightSumError, os.str());
  }
}

WeightVector WeightVector::uniform(std::size_t n, Provenance provenance) {
  ConsistencyReport report;
  report.lambda_max = static_cast<double>(n);
  return WeightVector(std::vector<double>(n, 1.0 / static_cast<double>(n)), report, provenance);
}

double weighted_score(std::span<const double> weights, std::span<const double> scores) {
  if (weights.size() != scores.size() || scores.empty()) {
    throw Error(ErrorCode::LengthMismatch, "weights and scores differ in length");
  }
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  double weight_sum = 0.0;
  double excess = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    weight_sum += weights[i];
    excess += weights[i] * (scores[i] - *lo);
  }
  return std::clamp(*lo + excess / weight_sum, *lo, *hi);
}

EvaluationRecord EvaluationRecord::make(SentencePair pair, SubMetricScores scores,
                                        WeightVector weights, WeightTrace trace) {
  if (weights.size() != kCriterionCount) {
    throw Error(ErrorCode::LengthMismatch, "evaluation records need exactly three weights");
  }
  const double overall = weighted_score(weights.weights(), scores.values());
  return EvaluationRecord{std::move(pair), std::move(scores), std::move(weights), overall, trace};
}

// ---------------------------------------------------------------------------

std::string_view to_string(JudgmentLevel level) {
  return level == JudgmentLevel::System ? "system" : "sentence";
}

JudgmentLevel judgment_level_from_string(std::string_view text) {
  if (text == "system") return JudgmentLevel::System;
  if (text == "sentence") return JudgmentLevel::Sentence;
  throw Error(ErrorCode::InvalidArgument,
              "unknown judgment level '" + std::string(text) + "' (expected system or sentence)");
}

HumanJudgmentTable HumanJudgmentTable::system_level(
    std::vector<std::pair<std::string, double>> scores) {
  if (scores.empty()) throw Error(ErrorCode::EmptyTable, "human judgment table is empty");
  std::set<std::string> seen;
  for (const auto& [system, score] : scores) {
    if (!seen.insert(system).second) {
      throw Error(ErrorCode::SchemaError, "duplicate system '" + system + "'", "system_id");
    }
    if (!std::isfinite(score)) {
      throw Error(ErrorCode::SchemaError, "non-finite score for system '" + system + "'", "score");
    }
  }
  if (scores.size() < 2) {
    throw Error(ErrorCode::SchemaError, "system-level judgments need at least two systems");
  }
  HumanJudgmentTable table;
  table.level_ = JudgmentLevel::System;
  table.system_scores_ = std::move(scores);
  return table;
}

HumanJudgmentTable HumanJudgmentTable::sentence_level(std::vector<SentenceJudgments> sentences) {
  if (sentences.empty()) throw Error(ErrorCode::EmptyTable, "human judgment table is empty");
  std::set<std::string> seen_sentences;
  for (const auto& sentence : sentences) {
    if (!seen_sentences.insert(sentence.sentence_id).second) {
      throw Error(ErrorCode::SchemaError, "duplicate sentence '" + sentence.sentence_id + "'",
                  "sentence_id");
    }
    std::set<std::string> seen;
    for (const auto& judgment : sentence.systems) {
      if (!seen.insert(judgment.system_id).second) {
        throw Error(ErrorCode::SchemaError,
                    "duplicate system '" + judgment.system_id + "' for sentence '" +
                        sentence.sentence_id + "'",
                    "system_id");
      }
    }
    if (seen.size() < 2) {
      throw Error(ErrorCode::SchemaError,
                  "sentence '" + sentence.sentence_id + "' lists fewer than two systems");
    }
  }
  HumanJudgmentTable table;
  table.level_ = JudgmentLevel::Sentence;
  table.sentences_ = std::move(sentences);
  return table;
}

}  // namespace gecjudge
