#include "gecjudge/meta_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gecjudge::meta_eval {

namespace {

constexpr const char* kTieRule =
    "all unordered system pairs per sentence; human ties excluded; metric ties count 0.5 "
    "toward accuracy and 0 toward C-D";

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::LengthMismatch, "pearson inputs differ in length (" +
                                               std::to_string(x.size()) + " vs " +
                                               std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw Error(ErrorCode::LengthMismatch, "pearson needs at least two points");
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); });
  };
  if (constant(x)) throw Error(ErrorCode::ZeroVariance, "first input is constant", "x");
  if (constant(y)) throw Error(ErrorCode::ZeroVariance, "second input is constant", "y");

  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<double> ranks(values.size());
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start + 1;
    while (end < order.size() && values[order[end]] == values[order[start]]) ++end;
    // positions start..end-1 hold ranks start+1..end
    const double rank = (static_cast<double>(start + 1) + static_cast<double>(end)) / 2.0;
    for (std::size_t k = start; k < end; ++k) ranks[order[k]] = rank;
    start = end;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::LengthMismatch, "spearman inputs differ in length");
  }
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

PairwiseAgreement sentence_pairwise(const SentenceScores& metric, const HumanJudgmentTable& human) {
  if (human.level() != JudgmentLevel::Sentence) {
    throw Error(ErrorCode::InvalidArgument, "sentence_pairwise needs sentence-level judgments");
  }

  PairwiseAgreement out;
  for (const auto& sentence : human.sentences()) {
    std::vector<double> scores;
    scores.reserve(sentence.systems.size());
    for (const auto& judgment : sentence.systems) {
      auto it = metric.find({sentence.sentence_id, judgment.system_id});
      if (it == metric.end()) {
        throw Error(ErrorCode::MissingScore,
                    "no metric score for sentence '" + sentence.sentence_id + "', system '" +
                        judgment.system_id + "'",
                    sentence.sentence_id + "/" + judgment.system_id);
      }
      scores.push_back(it->second);
    }

    const auto& systems = sentence.systems;
    for (std::size_t a = 0; a < systems.size(); ++a) {
      for (std::size_t b = a + 1; b < systems.size(); ++b) {
        const double human_diff = systems[b].rank - systems[a].rank;  // > 0: a preferred
        if (human_diff == 0.0) {
          ++out.ties_excluded;
          continue;
        }
        const double metric_diff = scores[a] - scores[b];  // > 0: a preferred
        if (metric_diff == 0.0) {
          ++out.metric_ties;
        } else if ((human_diff > 0.0) == (metric_diff > 0.0)) {
          ++out.concordant;
        } else {
          ++out.discordant;
        }
      }
    }
  }

  out.n_pairs_compared = out.concordant + out.discordant + out.metric_ties;
  if (out.n_pairs_compared == 0) {
    throw Error(ErrorCode::DegenerateInput, "no system pair has a strict human preference");
  }
  const double n = static_cast<double>(out.n_pairs_compared);
  out.accuracy = (static_cast<double>(out.concordant) + 0.5 * static_cast<double>(out.metric_ties)) / n;
  // (C - D) / N equals 2 * accuracy - 1 under half-credit ties; computing
  // it this way makes the identity hold bit-exactly.
  out.tau = 2.0 * out.accuracy - 1.0;
  return out;
}

// Up to this many items alpha is computed in covariance form (O(n k^2)),
// where identical items give exactly 1.
constexpr std::size_t kExactAlphaItems = 12;

// Total variance below this share of the summed item variances is rounding
// noise around a constant total (e.g. weight rows that each sum to 1).
constexpr long double kDegenerateShare = 1e-12L;

#ifdef __SIZEOF_FLOAT128__
using Wide = __float128;
#else
using Wide = long double;
#endif

double cronbach_alpha(const std::vector<std::vector<double>>& items) {
  const std::size_t n = items.size();
  if (n < 2) throw Error(ErrorCode::DegenerateInput, "cronbach's alpha needs at least two observations");
  const std::size_t k = items.front().size();
  if (k < 2) throw Error(ErrorCode::DegenerateInput, "cronbach's alpha needs at least two items");
  for (const auto& row : items) {
    if (row.size() != k) {
      throw Error(ErrorCode::DegenerateInput, "item matrix rows differ in length");
    }
  }

  std::vector<double> totals(n);
  for (std::size_t i = 0; i < n; ++i) {
    totals[i] = std::accumulate(items[i].begin(), items[i].end(), 0.0);
  }
  if (std::all_of(totals.begin(), totals.end(), [&](double t) { return t == totals.front(); })) {
    throw Error(ErrorCode::DegenerateInput, "total-score variance is zero");
  }

  std::vector<long double> means(k, 0.0L);
  for (const auto& row : items)
    for (std::size_t j = 0; j < k; ++j) means[j] += row[j];
  for (auto& m : means) m /= static_cast<long double>(n);
  const long double kd = static_cast<long double>(k);
  const long double dof = static_cast<long double>(n - 1);

  if (k <= kExactAlphaItems) {
    // Covariance form: var(total) is the sum of all item covariances, so
    // alpha = k * off / ((k - 1) * all) with `off` the off-diagonal part.
    // The sums are kept in a wider type than the covariances, so for
    // identical items both products are exact and alpha == 1 bit-exactly.
    Wide all = 0, off = 0, diag = 0;
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) {
        long double c = 0.0L;
        for (const auto& row : items) c += (row[a] - means[a]) * (row[b] - means[b]);
        c /= dof;
        all += c;
        if (a != b) off += c;
        else diag += c;
      }
    }
    if (!(all > static_cast<Wide>(kDegenerateShare) * diag)) {
      throw Error(ErrorCode::DegenerateInput, "total-score variance is zero");
    }
    const Wide kw = static_cast<Wide>(k);
    return static_cast<double>(kw * off / ((kw - 1) * all));
  }

  // Wide matrices: O(n k) variance form.
  long double item_variance = 0.0L, total_variance = 0.0L;
  long double total_mean = 0.0L;
  for (long double m : means) total_mean += m;
  for (const auto& row : items) {
    long double t = 0.0L;
    for (std::size_t j = 0; j < k; ++j) {
      const long double d = row[j] - means[j];
      item_variance += d * d;
      t += row[j];
    }
    total_variance += (t - total_mean) * (t - total_mean);
  }
  if (!(total_variance > kDegenerateShare * item_variance)) {
    throw Error(ErrorCode::DegenerateInput, "total-score variance is zero");
  }
  return static_cast<double>(kd / (kd - 1.0L) * (1.0L - item_variance / total_variance));
}

CorrelationMatrix submetric_correlation_matrix(std::span<const SubMetricScores> scores) {
  if (scores.size() < 2) {
    throw Error(ErrorCode::LengthMismatch, "correlation matrix needs at least two score triples");
  }
  std::array<std::vector<double>, kCriterionCount> columns;
  for (const auto& s : scores) {
    for (Criterion c : kCriteria) columns[index_of(c)].push_back(s[c]);
  }
  for (Criterion c : kCriteria) {
    const auto& col = columns[index_of(c)];
    if (std::all_of(col.begin(), col.end(), [&](double v) { return v == col.front(); })) {
      throw Error(ErrorCode::ZeroVariance, std::string(to_string(c)) + " scores are constant",
                  std::string(to_string(c)));
    }
  }

  CorrelationMatrix m{};
  for (std::size_t i = 0; i < kCriterionCount; ++i) {
    m[i][i] = 1.0;
    for (std::size_t j = i + 1; j < kCriterionCount; ++j) {
      m[i][j] = m[j][i] = pearson(columns[i], columns[j]);
    }
  }
  return m;
}

MetaEvalReport system_level(const std::map<std::string, double>& metric,
                            const HumanJudgmentTable& human, std::string metric_name) {
  if (human.level() != JudgmentLevel::System) {
    throw Error(ErrorCode::InvalidArgument, "system_level needs system-level judgments");
  }
  std::vector<double> x, y;
  for (const auto& [system, human_score] : human.system_scores()) {
    auto it = metric.find(system);
    if (it == metric.end()) {
      throw Error(ErrorCode::UnknownSystem, "metric has no score for system '" + system + "'",
                  system);
    }
    x.push_back(it->second);
    y.push_back(human_score);
  }
  MetaEvalReport report;
  report.metric_name = std::move(metric_name);
  report.level = JudgmentLevel::System;
  report.pearson_r = pearson(x, y);
  report.spearman_rho = spearman(x, y);
  report.n_systems = x.size();
  return report;
}

MetaEvalReport sentence_level(const SentenceScores& metric, const HumanJudgmentTable& human,
                              std::string metric_name) {
  const PairwiseAgreement agreement = sentence_pairwise(metric, human);
  MetaEvalReport report;
  report.metric_name = std::move(metric_name);
  report.level = JudgmentLevel::Sentence;
  report.sentence_accuracy = agreement.accuracy;
  report.kendall_tau = agreement.tau;
  report.n_pairs_compared = agreement.n_pairs_compared;
  report.ties_excluded = agreement.ties_excluded;
  report.metric_ties = agreement.metric_ties;
  report.tie_rule = kTieRule;
  std::map<std::string, bool> systems;
  for (const auto& s : human.sentences()) {
    for (const auto& j : s.systems) systems[j.system_id] = true;
  }
  report.n_systems = systems.size();
  return report;
}

}  // namespace gecjudge::meta_eval
