#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace joist {

/// Sums at or above this length use Neumaier-compensated accumulation.
inline constexpr std::size_t kCompensatedSumThreshold = 100'000;

double sum(std::span<const double> values);
double mean(std::span<const double> values);

struct Correlation {
  double r = 0.0;
  std::size_t n = 0;
};

/// Pearson's product-moment correlation. Throws ShapeError on length
/// mismatch or n < 2 and DegenerateError when either series is constant.
Correlation pearson_r(std::span<const double> x, std::span<const double> t);

/// Mean absolute error of predictions `t_hat` against observations `t`.
double mae(std::span<const double> t, std::span<const double> t_hat);
/// MAE divided by the mean observation. Throws DegenerateError if that mean is 0.
double emr(std::span<const double> t, std::span<const double> t_hat);

/// Coefficient of determination, 1 - RSS/TSS. May be negative.
double r_squared(std::span<const double> t, std::span<const double> t_hat);
/// Penalizes r2 for p predictors. Throws SampleCountError unless n > p + 1.
double adjusted_r_squared(double r2, std::size_t n, std::size_t p);

struct ExtremeValues {
  double max_prediction_us = 0.0;
  std::size_t n_exceeding_max_prediction = 0;  // observations strictly above max prediction
  double max_abs_error_us = 0.0;
};

ExtremeValues extreme_value_report(std::span<const double> t, std::span<const double> t_hat);

struct EvalReport {
  std::size_t n = 0;
  double mae_us = 0.0;
  double emr = 0.0;
  double r2 = 0.0;
  std::optional<double> adj_r2;  // absent when n <= p + 1
  double max_abs_error_us = 0.0;
  double max_prediction_us = 0.0;
  std::size_t n_exceeding_max_prediction = 0;
  double mean_observed_us = 0.0;
};

/// All evaluation statistics for one prediction run with p predictors.
EvalReport evaluate(std::span<const double> t, std::span<const double> t_hat, std::size_t p);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Least-squares line y = slope * x + intercept. Throws RankDeficiencyError
/// when x is constant.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace joist
