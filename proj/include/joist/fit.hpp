#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "joist/dataset.hpp"
#include "joist/models.hpp"

namespace joist {

struct FitResult {
  ModelSpec model;
  std::size_t n_samples = 0;
  double residual_sum_squares = 0.0;  // us^2
  /// Residual-based standard errors, ordered as the model's coefficients.
  std::vector<double> coefficient_std_errors;
  double intercept_std_error = 0.0;
  /// Set when the scaled design matrix is badly conditioned.
  std::optional<std::string> condition_warning;
};

/// Ordinary least squares with an intercept, solved by Householder QR on the
/// column-equilibrated design matrix [1 | predictor_vector(kind, block)].
///
/// Throws UnsupportedKindError for fixed_rate, SampleCountError when there
/// are fewer than predictor_count(kind) + 1 rows, ShapeError when `blocks` and
/// `times_us` differ in length, and RankDeficiencyError naming the predictors
/// involved when a column is zero or linearly dependent on earlier ones.
FitResult ols_fit(ModelKind kind, std::span<const BlockFeatures> blocks,
                  std::span<const double> times_us);

FitResult ols_fit(ModelKind kind, const Dataset& train);

}  // namespace joist
