#include "gecjudge/ahp.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace gecjudge::ahp {

namespace {

// Saaty's random consistency indices, indexed by order.
constexpr std::array<double, kMaxOrder + 1> kRandomIndex{
    0.0, 0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49};

std::vector<double> multiply(const JudgmentMatrix& a, const std::vector<double>& w) {
  const std::size_t n = a.order();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += a(i, j) * w[j];
    out[i] = acc;
  }
  return out;
}

void normalize(std::vector<double>& w) {
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= sum;
}

}  // namespace

double random_index(std::size_t n) {
  if (n < 1 || n > kMaxOrder) {
    throw Error(ErrorCode::UnsupportedOrder,
                "no random index for order " + std::to_string(n) + " (supported: 1..10)");
  }
  return kRandomIndex[n];
}

EigenResult principal_eigen(const JudgmentMatrix& matrix, double tol, int max_iter) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  if (max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be at least 1");

  const std::size_t n = matrix.order();
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  for (int iter = 1; iter <= max_iter; ++iter) {
    std::vector<double> aw = multiply(matrix, w);

    double lambda = 0.0;
    for (std::size_t i = 0; i < n; ++i) lambda += aw[i] / w[i];
    lambda /= static_cast<double>(n);

    double residual = 0.0;
    double w_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      residual = std::max(residual, std::abs(aw[i] - lambda * w[i]));
      w_norm = std::max(w_norm, std::abs(w[i]));
    }
    if (residual <= tol * w_norm) {
      return EigenResult{lambda, std::move(w), iter};
    }
    normalize(aw);
    w = std::move(aw);
  }
  throw Error(ErrorCode::NoConvergence,
              "power iteration did not converge in " + std::to_string(max_iter) + " iterations");
}

ConsistencyReport consistency(const JudgmentMatrix& matrix, double lambda_max, double theta) {
  const std::size_t n = matrix.order();
  if (n < 2 || n > kMaxOrder) {
    throw Error(ErrorCode::UnsupportedOrder,
                "consistency is defined for orders 2..10, got " + std::to_string(n));
  }
  ConsistencyReport report;
  report.lambda_max = lambda_max;
  report.ci = (lambda_max - static_cast<double>(n)) / static_cast<double>(n - 1);
  report.ri = random_index(n);
  // Every 2x2 reciprocal matrix is consistent; RI(2) = 0 would divide by zero.
  report.cr = n == 2 ? 0.0 : report.ci / report.ri;
  report.consistent = report.cr < theta;
  return report;
}

WeightVector derive_weights(const JudgmentMatrix& matrix, double theta) {
  EigenResult eig = principal_eigen(matrix);
  ConsistencyReport report = consistency(matrix, eig.lambda_max, theta);
  return WeightVector(std::move(eig.weights), report, Provenance::Dynamic);
}

RepairResult repair(const JudgmentMatrix& matrix, double theta, int max_rounds) {
  if (max_rounds < 0) throw Error(ErrorCode::InvalidArgument, "max_rounds must be >= 0");

  JudgmentMatrix current = matrix;
  EigenResult eig = principal_eigen(current);
  ConsistencyReport report = consistency(current, eig.lambda_max, theta);
  if (report.consistent) return RepairResult{current, report, 0, {report.cr}};
  std::vector<double> cr_path{report.cr};

  const std::size_t n = current.order();
  for (int round = 1; round <= max_rounds; ++round) {
    struct Candidate {
      std::size_t i, j;
      double deviation;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double implied = eig.weights[i] / eig.weights[j];
        candidates.push_back({i, j, std::abs(std::log(current(i, j)) - std::log(implied))});
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.deviation > b.deviation; });

    bool accepted = false;
    for (const Candidate& c : candidates) {
      const double target = std::clamp(eig.weights[c.i] / eig.weights[c.j], kSaatyMin, kSaatyMax);
      if (target == current(c.i, c.j)) continue;
      JudgmentMatrix trial = current.with_entry(c.i, c.j, target);
      EigenResult trial_eig = principal_eigen(trial);
      ConsistencyReport trial_report = consistency(trial, trial_eig.lambda_max, theta);
      if (trial_report.cr < report.cr) {
        current = std::move(trial);
        eig = std::move(trial_eig);
        report = trial_report;
        cr_path.push_back(report.cr);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw Error(ErrorCode::RepairFailed,
                  "repair stalled after " + std::to_string(round - 1) +
                      " round(s): no entry adjustment lowers CR");
    }
    if (report.consistent) return RepairResult{current, report, round, std::move(cr_path)};
  }
  std::ostringstream os;
  os << "CR " << report.cr << " still >= " << theta << " after " << max_rounds
     << " repair round(s)";
  throw Error(ErrorCode::RepairFailed, os.str());
}

WeightVector composite_weights(const Hierarchy& hierarchy, double theta) {
  if (hierarchy.levels.empty() || hierarchy.levels.front().size() != 1) {
    throw Error(ErrorCode::InvalidArgument, "hierarchy needs exactly one root matrix");
  }

  std::vector<double> leaf_weights{1.0};
  ConsistencyReport root_report;
  for (std::size_t level = 0; level < hierarchy.levels.size(); ++level) {
    const auto& matrices = hierarchy.levels[level];
    if (matrices.size() != leaf_weights.size()) {
      throw Error(ErrorCode::InvalidArgument,
                  "level " + std::to_string(level) + " has " + std::to_string(matrices.size()) +
                      " matrices but the level above has " + std::to_string(leaf_weights.size()) +
                      " criteria");
    }
    std::vector<double> next;
    for (std::size_t m = 0; m < matrices.size(); ++m) {
      WeightVector local = derive_weights(matrices[m], theta);
      if (!local.report().consistent) {
        std::ostringstream os;
        os << "matrix " << m << " at level " << level << " is inconsistent (CR "
           << local.report().cr << ")";
        throw Error(ErrorCode::InconsistentLevel, os.str(),
                    "level " + std::to_string(level) + " matrix " + std::to_string(m));
      }
      if (level == 0) root_report = local.report();
      for (double w : local.weights()) next.push_back(leaf_weights[m] * w);
    }
    leaf_weights = std::move(next);
  }
  return WeightVector(std::move(leaf_weights), root_report, Provenance::Dynamic);
}

double parse_ratio(std::string_view token) {
  auto parse_number = [&](std::string_view part) {
    double value = 0.0;
    const auto* end = part.data() + part.size();
    auto [ptr, ec] = std::from_chars(part.data(), end, value);
    if (ec != std::errc{} || ptr != end || part.empty()) {
      throw Error(ErrorCode::ParseError, "'" + std::string(token) + "' is not a number");
    }
    return value;
  };
  const auto slash = token.find('/');
  if (slash == std::string_view::npos) return parse_number(token);
  const double num = parse_number(token.substr(0, slash));
  const double den = parse_number(token.substr(slash + 1));
  if (den == 0.0) throw Error(ErrorCode::ParseError, "'" + std::string(token) + "' divides by zero");
  return num / den;
}

JudgmentMatrix parse_matrix(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string token;
  if (!(in >> token)) throw Error(ErrorCode::ParseError, "matrix file is empty");

  std::size_t n = 0;
  {
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), n);
    if (ec != std::errc{} || ptr != token.data() + token.size() || n < 2) {
      throw Error(ErrorCode::ParseError, "first token must be the matrix order (>= 2), got '" +
                                             token + "'");
    }
  }
  if (n > kMaxOrder) {
    throw Error(ErrorCode::UnsupportedOrder, "matrix order " + std::to_string(n) + " exceeds 10");
  }

  std::vector<double> entries;
  entries.reserve(n * n);
  std::string line;
  std::getline(in, line);  // rest of the order line
  std::size_t rows = 0;
  while (rows < n && std::getline(in, line)) {
    std::istringstream row(line);
    std::vector<double> values;
    while (row >> token) values.push_back(parse_ratio(token));
    if (values.empty()) continue;
    if (values.size() != n) {
      throw Error(ErrorCode::ParseError, "row " + std::to_string(rows + 1) + " has " +
                                             std::to_string(values.size()) + " values, expected " +
                                             std::to_string(n));
    }
    entries.insert(entries.end(), values.begin(), values.end());
    ++rows;
  }
  if (rows != n) {
    throw Error(ErrorCode::ParseError,
                "expected " + std::to_string(n) + " rows, found " + std::to_string(rows));
  }
  while (in >> token) {
    throw Error(ErrorCode::ParseError, "unexpected trailing content '" + token + "'");
  }
  return JudgmentMatrix(n, std::move(entries));
}

JudgmentMatrix read_matrix_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open matrix file '" + path + "'", path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_matrix(buffer.str());
}

}  // namespace gecjudge::ahp
