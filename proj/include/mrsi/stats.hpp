#pragma once

// Two-sample Welch t-test, Spearman rank correlation, ordinary least squares
// and a pairwise Spearman correlation matrix.

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mrsi::stats {

/// Regularized incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);
/// P(T > t) for Student's t with (real) df degrees of freedom.
double student_t_sf(double t, double df);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

/// Throws InvalidArgument for samples smaller than 2 and
/// DegenerateSampleError when both variances vanish.
TTestResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// Average ranks (1-based), ties share the mean rank.
std::vector<double> average_ranks(std::span<const double> x);

struct SpearmanResult {
  double rho = 0.0;
  double p = 1.0;
};

enum class SpearmanP { TApproximation, ExactPermutation };

/// Throws UndefinedCorrelationError for a constant input. The exact
/// permutation p-value is available for n <= 10.
SpearmanResult spearman(std::span<const double> x, std::span<const double> y,
                        SpearmanP method = SpearmanP::TApproximation);

struct LinReg {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Throws UndefinedCorrelationError when x is constant.
LinReg linreg(std::span<const double> x, std::span<const double> y);

struct CorrMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<double>> rho;  // NaN where undefined
  std::vector<std::vector<double>> p;
  std::vector<std::vector<bool>> significant;  // p < alpha
  std::vector<std::vector<bool>> defined;
  std::vector<std::vector<std::size_t>> n;     // pairs used
};

/// Pairwise Spearman over columns; NaN entries are deleted pairwise. Pairs
/// that are constant after deletion (or shorter than 3) are marked undefined.
CorrMatrix correlation_matrix(const std::vector<std::string>& names,
                              const std::vector<std::vector<double>>& columns,
                              double alpha = 0.05);

}  // namespace mrsi::stats
