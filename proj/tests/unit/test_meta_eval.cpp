#include <doctest.h>

#include <random>

#include "gecjudge/meta_eval.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

using namespace gecjudge;
using namespace gecjudge::meta_eval;

namespace {

// Table 2 of the source publication: (metric, human) per system.
const std::vector<double> kMetric{9.631, 9.571, 9.498, 9.466, 9.444, 9.411, 9.385, 9.147,
                                  9.055, 9.034, 9.030, 9.017, 8.934, 8.899, 8.127};
const std::vector<double> kHuman{0.743,  0.175, 0.179,  0.067,  -0.001, -0.179, 0.023, -0.178,
                                 0.992,  -0.034, -0.234, -0.163, -0.300, -0.168, -0.992};

// Frozen from a 50-digit decimal evaluation of the textbook formulas.
constexpr double kTable2Pearson = 0.6454038048978132;
constexpr double kTable2Spearman = 0.725;  // 29/40

HumanJudgmentTable one_sentence(const std::vector<std::pair<std::string, double>>& ranks) {
  SentenceJudgments s{"s1", {}};
  for (const auto& [sys, r] : ranks) s.systems.push_back({sys, r});
  return HumanJudgmentTable::sentence_level({s});
}

}  // namespace

TEST_SUITE("meta_eval") {

TEST_CASE("pearson basics") {
  const std::vector<double> x{1, 2, 3}, y{3, 2, 1};
  CHECK(pearson(x, x) == 1.0);
  CHECK(pearson(x, y) == -1.0);
  CHECK_ERROR(pearson(x, std::vector<double>{1, 2}), ErrorCode::LengthMismatch);
  CHECK_ERROR(pearson(std::vector<double>{1}, std::vector<double>{1}), ErrorCode::LengthMismatch);
  CHECK_ERROR(pearson(x, std::vector<double>{2, 2, 2}), ErrorCode::ZeroVariance);
}

TEST_CASE("table 2 correlations match the frozen oracle") {
  CHECK(std::abs(pearson(kMetric, kHuman) - kTable2Pearson) <= 1e-12);
  CHECK(std::abs(spearman(kMetric, kHuman) - kTable2Spearman) <= 1e-12);
  CHECK(std::abs(oracle::pearson(kMetric, kHuman) - kTable2Pearson) <= 1e-12);
  CHECK(std::abs(oracle::spearman(kMetric, kHuman) - kTable2Spearman) <= 1e-12);
}

TEST_CASE("spearman examples") {
  const std::vector<double> x{1, 2, 3, 4};
  CHECK(spearman(x, std::vector<double>{10, 20, 35, 1000}) == doctest::Approx(1.0).epsilon(1e-15));
  // sum d^2 = 4 -> 1 - 6*4/(4*15) = 0.6
  CHECK(std::abs(spearman(x, std::vector<double>{2, 1, 4, 3}) - 0.6) < 1e-12);
  CHECK(average_ranks(std::vector<double>{3, 1, 3, 2}) == std::vector<double>{3.5, 1, 3.5, 2});
}

TEST_CASE("property: linear transforms give r = +-1 and monotone maps keep rho") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int k = 0; k < 300; ++k) {
    std::vector<double> x(3 + k % 20), y(x.size()), z(x.size()), f(x.size());
    for (auto& v : x) v = u(rng);
    for (auto& v : z) v = u(rng);
    double a = u(rng);
    if (std::abs(a) < 0.1) a = 1.5;
    const double b = u(rng);
    for (std::size_t i = 0; i < x.size(); ++i) {
      y[i] = a * x[i] + b;
      f[i] = std::exp(x[i]) + x[i] * x[i] * x[i];
    }
    CHECK(std::abs(pearson(x, y) - (a > 0 ? 1.0 : -1.0)) <= 1e-12);
    CHECK(spearman(f, z) == doctest::Approx(spearman(x, z)).epsilon(1e-14));
  }
}

TEST_CASE("property: statistics match brute-force oracles") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> small(1, 5);
  std::uniform_real_distribution<double> u(0, 10);
  for (int k = 0; k < 500; ++k) {
    std::vector<double> x(2 + k % 10), y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = k % 2 ? small(rng) : u(rng);
      y[i] = k % 3 ? small(rng) : u(rng);
    }
    const bool x_const = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
    const bool y_const = std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
    if (x_const || y_const) {
      CHECK_ERROR(pearson(x, y), ErrorCode::ZeroVariance);
      continue;
    }
    CHECK(std::abs(pearson(x, y) - oracle::pearson(x, y)) <= 1e-12);
    CHECK(std::abs(spearman(x, y) - oracle::spearman(x, y)) <= 1e-12);
  }
}

TEST_CASE("sentence pairwise examples") {
  const auto human = one_sentence({{"A", 1}, {"B", 2}, {"C", 3}});
  SUBCASE("same order") {
    const auto r = sentence_pairwise({{{"s1", "A"}, 3}, {{"s1", "B"}, 2}, {{"s1", "C"}, 1}}, human);
    CHECK(r.accuracy == 1.0);
    CHECK(r.tau == 1.0);
  }
  SUBCASE("reversed") {
    const auto r = sentence_pairwise({{{"s1", "A"}, 1}, {{"s1", "B"}, 2}, {{"s1", "C"}, 3}}, human);
    CHECK(r.accuracy == 0.0);
    CHECK(r.tau == -1.0);
  }
  SUBCASE("one discordant pair") {
    const auto r = sentence_pairwise({{{"s1", "A"}, 3}, {{"s1", "B"}, 1}, {{"s1", "C"}, 2}}, human);
    CHECK(r.concordant == 2);
    CHECK(r.discordant == 1);
    CHECK(r.accuracy == doctest::Approx(2.0 / 3).epsilon(1e-15));
    CHECK(r.tau == doctest::Approx(1.0 / 3).epsilon(1e-15));
  }
  SUBCASE("human ties excluded, metric ties half credit") {
    const auto tied = one_sentence({{"A", 1}, {"B", 1}, {"C", 2}});
    const auto r = sentence_pairwise({{{"s1", "A"}, 5}, {{"s1", "B"}, 4}, {{"s1", "C"}, 5}}, tied);
    CHECK(r.ties_excluded == 1);
    CHECK(r.metric_ties == 1);
    CHECK(r.concordant == 0);
    CHECK(r.discordant == 1);
    CHECK(r.n_pairs_compared == 2);
    CHECK(r.accuracy == 0.25);
    CHECK(r.tau == -0.5);
  }
  SUBCASE("errors") {
    CHECK_ERROR(sentence_pairwise({{{"s1", "A"}, 1}, {{"s1", "B"}, 2}}, human), ErrorCode::MissingScore);
    const auto all_tied = one_sentence({{"A", 1}, {"B", 1}});
    CHECK_ERROR(sentence_pairwise({{{"s1", "A"}, 1}, {{"s1", "B"}, 2}}, all_tied),
                ErrorCode::DegenerateInput);
  }
}

TEST_CASE("property: pairwise agreement matches enumeration and tau = 2 acc - 1") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> rank(1, 4);
  std::uniform_real_distribution<double> score(0, 1);
  std::uniform_int_distribution<int> coarse(1, 3);
  for (int k = 0; k < 300; ++k) {
    const std::size_t sentences = 1 + k % 4, systems = 2 + k % 5;
    const bool coarse_scores = k % 2 == 0;
    std::vector<std::vector<double>> h(sentences), m(sentences);
    std::vector<SentenceJudgments> table;
    SentenceScores metric;
    for (std::size_t s = 0; s < sentences; ++s) {
      SentenceJudgments sj{"s" + std::to_string(s), {}};
      for (std::size_t j = 0; j < systems; ++j) {
        h[s].push_back(rank(rng));
        m[s].push_back(coarse_scores ? coarse(rng) : score(rng));
        sj.systems.push_back({"sys" + std::to_string(j), h[s].back()});
        metric[{sj.sentence_id, "sys" + std::to_string(j)}] = m[s].back();
      }
      table.push_back(sj);
    }
    const auto human = HumanJudgmentTable::sentence_level(table);
    const auto expected = oracle::pairwise(h, m);
    if (expected.c + expected.d + expected.t == 0) {
      CHECK_ERROR(sentence_pairwise(metric, human), ErrorCode::DegenerateInput);
      continue;
    }
    const auto got = sentence_pairwise(metric, human);
    CHECK(std::abs(got.accuracy - expected.accuracy) <= 1e-12);
    CHECK(std::abs(got.tau - expected.tau) <= 1e-12);
    if (got.metric_ties == 0) CHECK(got.tau == 2 * got.accuracy - 1);
  }
}

TEST_CASE("cronbach alpha") {
  CHECK(cronbach_alpha({{1, 1, 1}, {2, 2, 2}, {4, 4, 4}}) == doctest::Approx(1.0).epsilon(1e-15));
  // An exact negation makes every row total equal (zero total variance);
  // a near negation drives alpha below zero.
  CHECK_ERROR(cronbach_alpha({{1, 5}, {2, 4}, {3, 3}, {5, 1}}), ErrorCode::DegenerateInput);
  CHECK(cronbach_alpha({{1, 5}, {2, 4}, {3, 3}, {5, 1.5}}) <= 0.0);
  // Frozen: 111/116 by direct evaluation.
  const double alpha = cronbach_alpha({{2, 3, 3}, {4, 4, 5}, {3, 3, 4}, {5, 5, 5}});
  CHECK(std::abs(alpha - 0.956896551724138) <= 1e-12);
  CHECK_ERROR(cronbach_alpha({{1, 2}}), ErrorCode::DegenerateInput);
  CHECK_ERROR(cronbach_alpha({{1}, {2}}), ErrorCode::DegenerateInput);
  CHECK_ERROR(cronbach_alpha({{1, 2}, {2, 1}}), ErrorCode::DegenerateInput);
  CHECK_ERROR(cronbach_alpha({{1, 2}, {2}}), ErrorCode::DegenerateInput);
}

TEST_CASE("property: alpha matches the oracle and ignores column shifts") {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> v(1, 9);
  std::uniform_real_distribution<double> shift(-3, 3);
  int checked = 0;
  for (int k = 0; k < 300; ++k) {
    std::vector<std::vector<double>> rows(3 + k % 6, std::vector<double>(2 + k % 4));
    for (auto& r : rows)
      for (auto& x : r) x = v(rng);
    double alpha;
    try {
      alpha = cronbach_alpha(rows);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DegenerateInput);
      continue;
    }
    CHECK(std::abs(alpha - oracle::cronbach(rows)) <= 1e-12);
    auto shifted = rows;
    const std::size_t col = k % rows[0].size();
    const double c = std::round(shift(rng));
    for (auto& r : shifted) r[col] += c;
    CHECK(cronbach_alpha(shifted) == doctest::Approx(alpha).epsilon(1e-12));
    ++checked;
  }
  CHECK(checked > 200);
}

TEST_CASE("alpha on wide item matrices") {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(0, 1);
  for (std::size_t k : {12u, 13u, 40u, 400u}) {
    std::vector<std::vector<double>> rows(3 + k % 5, std::vector<double>(k));
    for (auto& r : rows) {
      const double base = u(rng);
      for (auto& v : r) v = base + 0.3 * u(rng);
    }
    CHECK(std::abs(cronbach_alpha(rows) - oracle::cronbach(rows)) <= 1e-12);
    std::vector<std::vector<double>> same;
    for (const auto& r : rows) same.push_back(std::vector<double>(k, r[0]));
    CHECK(cronbach_alpha(same) == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("sub-metric correlation matrix") {
  SUBCASE("equal columns") {
    std::vector<SubMetricScores> s{{1, 1, 1}, {5, 5, 5}, {7, 7, 7}};
    for (const auto& row : submetric_correlation_matrix(s))
      for (double v : row) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("two points") {
    std::vector<SubMetricScores> s{{1, 9, 2}, {5, 3, 8}};
    for (const auto& row : submetric_correlation_matrix(s))
      for (double v : row) CHECK(std::abs(std::abs(v) - 1.0) < 1e-12);
  }
  SUBCASE("matches pairwise pearson") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(1, 10);
    std::vector<SubMetricScores> s;
    std::array<std::vector<double>, 3> cols;
    for (int k = 0; k < 200; ++k) {
      s.emplace_back(u(rng), u(rng), u(rng));
      for (std::size_t c = 0; c < 3; ++c) cols[c].push_back(s.back().values()[c]);
    }
    const auto m = submetric_correlation_matrix(s);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(m[i][j] == (i == j ? 1.0 : pearson(cols[i], cols[j])));
        CHECK(m[i][j] == m[j][i]);
      }
  }
  SUBCASE("constant criterion") {
    std::vector<SubMetricScores> s{{1, 4, 2}, {5, 4, 8}};
    try {
      submetric_correlation_matrix(s);
      FAIL("expected ZeroVariance");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ZeroVariance);
      CHECK(e.field() == "edit_level");
    }
  }
}

TEST_CASE("system-level report") {
  std::vector<std::pair<std::string, double>> human;
  std::map<std::string, double> metric;
  for (std::size_t i = 0; i < kMetric.size(); ++i) {
    human.emplace_back("sys" + std::to_string(i), kHuman[i]);
    metric["sys" + std::to_string(i)] = kMetric[i];
  }
  metric["extra"] = 1.0;
  const auto table = HumanJudgmentTable::system_level(human);
  const auto r = system_level(metric, table, "m");
  CHECK(r.n_systems == 15);
  CHECK(std::abs(r.pearson_r - kTable2Pearson) <= 1e-12);
  CHECK(std::abs(r.spearman_rho - kTable2Spearman) <= 1e-12);
  metric.erase("sys3");
  try {
    system_level(metric, table);
    FAIL("expected UnknownSystem");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownSystem);
    CHECK(std::string(e.what()).find("sys3") != std::string::npos);
  }
}

}  // TEST_SUITE
