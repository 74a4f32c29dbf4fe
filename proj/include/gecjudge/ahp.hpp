#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "gecjudge/domain.hpp"

/// Analytic Hierarchy Process: principal-eigenvector weights, consistency
/// checking, deterministic matrix repair and hierarchical composition.
namespace gecjudge::ahp {

inline constexpr double kDefaultTheta = 0.1;
inline constexpr double kDefaultEigenTolerance = 1e-10;
inline constexpr int kDefaultMaxIterations = 10000;
inline constexpr int kDefaultRepairRounds = 10;
inline constexpr std::size_t kMaxOrder = 10;

/// Random index for matrices of order n (1..10). RI(1) = RI(2) = 0.
/// Throws UnsupportedOrder outside that range.
double random_index(std::size_t n);

struct EigenResult {
  double lambda_max;
  std::vector<double> weights;  // positive, sums to 1
  int iterations;
};

/// Power iteration from the uniform vector. Stops once
/// ||A w - lambda w||_inf <= tol * ||w||_inf, with lambda the mean Rayleigh
/// quotient mean_i((A w)_i / w_i). Throws NoConvergence after max_iter steps.
EigenResult principal_eigen(const JudgmentMatrix& matrix,
                            double tol = kDefaultEigenTolerance,
                            int max_iter = kDefaultMaxIterations);

/// CI = (lambda - n) / (n - 1), CR = CI / RI(n). For n = 2, CR is 0.
ConsistencyReport consistency(const JudgmentMatrix& matrix, double lambda_max,
                              double theta = kDefaultTheta);

/// Eigenvector weights plus their consistency report, tagged Dynamic.
WeightVector derive_weights(const JudgmentMatrix& matrix, double theta = kDefaultTheta);

struct RepairResult {
  JudgmentMatrix matrix;
  ConsistencyReport report;
  int rounds;
  /// CR of the input followed by the CR after each accepted round.
  std::vector<double> cr_path;
};

/// Pulls the worst-fitting entry toward the ratio implied by the current
/// weights until CR < theta.
///
/// Each round ranks the upper-triangle entries by |log a_ij - log(w_i/w_j)|
/// and replaces the first one whose replacement strictly lowers CR with
/// clamp(w_i/w_j, 1/9, 9) (and a_ji with its reciprocal). CR therefore
/// decreases monotonically along the accepted path. Throws RepairFailed when
/// CR >= theta after max_rounds rounds, or earlier when no entry can improve.
RepairResult repair(const JudgmentMatrix& matrix, double theta = kDefaultTheta,
                    int max_rounds = kDefaultRepairRounds);

/// Levels of a criteria hierarchy. levels[0] holds the single root matrix;
/// level l holds one matrix per criterion of level l-1, in order.
struct Hierarchy {
  std::vector<std::vector<JudgmentMatrix>> levels;
};

/// Leaf weights as the product of local weights along each path. Throws
/// InconsistentLevel naming the first matrix with CR >= theta, and
/// InvalidArgument when the level shapes do not line up.
WeightVector composite_weights(const Hierarchy& hierarchy, double theta = kDefaultTheta);

/// Parses the plain-text matrix format: first token n, then n rows of n
/// whitespace-separated values. Fractions such as "1/3" are accepted.
JudgmentMatrix parse_matrix(std::string_view text);
JudgmentMatrix read_matrix_file(const std::string& path);

/// Parses a decimal or a "p/q" fraction. Throws ParseError.
double parse_ratio(std::string_view token);

}  // namespace gecjudge::ahp
