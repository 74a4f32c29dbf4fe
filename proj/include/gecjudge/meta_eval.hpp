#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gecjudge/domain.hpp"

/// Statistics for judging a metric against human judgments.
namespace gecjudge::meta_eval {

/// Sample Pearson correlation. Throws LengthMismatch (unequal lengths or
/// fewer than two points) and ZeroVariance (a constant vector).
double pearson(std::span<const double> x, std::span<const double> y);

/// 1-based ranks with ties sharing their average rank.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of the average-rank vectors.
double spearman(std::span<const double> x, std::span<const double> y);

struct PairwiseAgreement {
  double accuracy = 0.0;
  double tau = 0.0;
  std::size_t concordant = 0;
  std::size_t discordant = 0;
  std::size_t metric_ties = 0;
  std::size_t ties_excluded = 0;  // pairs tied in the human judgment
  std::size_t n_pairs_compared = 0;
};

/// Metric score per (sentence_id, system_id); higher is better.
using SentenceScores = std::map<std::pair<std::string, std::string>, double>;

/// Pairwise agreement over every sentence and every unordered pair of
/// systems with a strict human preference (lower rank wins). Metric ties
/// earn half credit toward accuracy and nothing toward C - D:
///   accuracy = (C + T/2) / (C + D + T),  tau = (C - D) / (C + D + T).
/// Throws MissingScore when a judged (sentence, system) has no metric score
/// and DegenerateInput when no pair has a strict human preference.
PairwiseAgreement sentence_pairwise(const SentenceScores& metric, const HumanJudgmentTable& human);

/// alpha = k/(k-1) * (1 - sum(item variances) / variance(row totals)), with
/// n-1 denominators. Rows are observations, columns are items.
double cronbach_alpha(const std::vector<std::vector<double>>& items);

using CorrelationMatrix = std::array<std::array<double, kCriterionCount>, kCriterionCount>;

/// Pearson correlations between the three sub-metric columns. Throws
/// ZeroVariance naming the constant criterion.
CorrelationMatrix submetric_correlation_matrix(std::span<const SubMetricScores> scores);

struct MetaEvalReport {
  std::string metric_name;
  std::string judgment_set;
  JudgmentLevel level = JudgmentLevel::System;
  double pearson_r = 0.0;
  double spearman_rho = 0.0;
  double sentence_accuracy = 0.0;
  double kendall_tau = 0.0;
  std::size_t n_systems = 0;
  std::size_t n_pairs_compared = 0;
  std::size_t ties_excluded = 0;
  std::size_t metric_ties = 0;
  std::string tie_rule;
};

/// Correlates per-system metric scores with the human table. Every system in
/// the table must have a metric score (UnknownSystem otherwise); extra
/// metric systems are ignored.
MetaEvalReport system_level(const std::map<std::string, double>& metric,
                            const HumanJudgmentTable& human, std::string metric_name = "metric");

MetaEvalReport sentence_level(const SentenceScores& metric, const HumanJudgmentTable& human,
                              std::string metric_name = "metric");

}  // namespace gecjudge::meta_eval
