#include "joist/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "joist/error.hpp"
#include "joist/stats.hpp"

namespace joist {
namespace {

// Columns are scaled to unit norm before factorization, so this bounds the
// distance of a column from the span of the preceding ones.
constexpr double kRankTolerance = 1e-10;
constexpr double kDependencyTolerance = 1e-8;
constexpr double kConditionWarning = 1e8;

std::string column_name(ModelKind kind, std::size_t column) {
  if (column == 0) return "intercept";
  return std::string(predictor_names(kind)[column - 1]);
}

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += "\"" + n + "\"";
  }
  return out;
}

// Column-major design matrix in place of a Householder QR factorization.
// After factorize(), the upper triangle (rows < m) holds R except for its
// diagonal, which lives in diag_.
class HouseholderQr {
 public:
  explicit HouseholderQr(std::vector<std::vector<double>> columns)
      : a_(std::move(columns)), diag_(a_.size(), 0.0) {}

  /// Returns the index of the first dependent column, or nullopt.
  std::optional<std::size_t> factorize(std::vector<double>& rhs) {
    const std::size_t n = a_.front().size();
    for (std::size_t j = 0; j < a_.size(); ++j) {
      auto& x = a_[j];
      double norm2 = 0.0;
      for (std::size_t i = j; i < n; ++i) norm2 += x[i] * x[i];
      const double norm = std::sqrt(norm2);
      if (norm <= kRankTolerance) return j;

      const double alpha = x[j] > 0 ? -norm : norm;
      // v = x[j..] - alpha e_j, stored in x[j..].
      x[j] -= alpha;
      const double vnorm2 = norm2 - 2.0 * alpha * (x[j] + alpha) + alpha * alpha;
      auto reflect = [&](std::vector<double>& y) {
        double dot = 0.0;
        for (std::size_t i = j; i < n; ++i) dot += x[i] * y[i];
        const double s = 2.0 * dot / vnorm2;
        for (std::size_t i = j; i < n; ++i) y[i] -= s * x[i];
      };
      for (std::size_t k = j + 1; k < a_.size(); ++k) reflect(a_[k]);
      reflect(rhs);
      diag_[j] = alpha;
    }
    return std::nullopt;
  }

  double r(std::size_t row, std::size_t col) const { return row == col ? diag_[row] : a_[col][row]; }

  /// Solves R[0..m, 0..m] x = b[0..m] for the leading m x m block.
  std::vector<double> solve_upper(std::size_t m, std::span<const double> b) const {
    std::vector<double> x(m, 0.0);
    for (std::size_t i = m; i-- > 0;) {
      double s = b[i];
      for (std::size_t k = i + 1; k < m; ++k) s -= r(i, k) * x[k];
      x[i] = s / r(i, i);
    }
    return x;
  }

  /// Row-wise squared norms of R^-1, the diagonal of (R^T R)^-1.
  std::vector<double> inverse_gram_diagonal() const {
    const std::size_t m = a_.size();
    std::vector<double> out(m, 0.0);
    std::vector<double> e(m, 0.0);
    for (std::size_t c = 0; c < m; ++c) {
      std::fill(e.begin(), e.end(), 0.0);
      e[c] = 1.0;
      const auto col = solve_upper(m, e);  // column c of R^-1
      for (std::size_t i = 0; i < m; ++i) out[i] += col[i] * col[i];
    }
    return out;
  }

  double condition_estimate() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (double d : diag_) {
      lo = std::min(lo, std::abs(d));
      hi = std::max(hi, std::abs(d));
    }
    return hi / lo;
  }

 private:
  std::vector<std::vector<double>> a_;
  std::vector<double> diag_;
};

}  // namespace

FitResult ols_fit(ModelKind kind, std::span<const BlockFeatures> blocks,
                  std::span<const double> times_us) {
  if (kind == ModelKind::fixed_rate) {
    throw UnsupportedKindError("fixed_rate models are given, not fitted");
  }
  if (blocks.size() != times_us.size()) {
    throw ShapeError("fit: " + std::to_string(blocks.size()) + " blocks but " +
                     std::to_string(times_us.size()) + " times");
  }
  const std::size_t p = predictor_count(kind);
  const std::size_t m = p + 1;
  const std::size_t n = blocks.size();
  if (n < m) {
    throw SampleCountError("fit: " + std::string(to_string(kind)) + " needs at least " +
                           std::to_string(m) + " samples, got " + std::to_string(n));
  }

  std::vector<std::vector<double>> columns(m, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = predictor_vector(kind, blocks[i]);
    for (std::size_t j = 0; j < p; ++j) columns[j + 1][i] = row[j];
  }

  std::vector<double> scale(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double norm2 = 0.0;
    for (double v : columns[j]) norm2 += v * v;
    scale[j] = std::sqrt(norm2);
    if (scale[j] == 0.0) {
      const auto name = column_name(kind, j);
      throw RankDeficiencyError({name}, "rank-deficient design matrix: predictor \"" + name +
                                            "\" is identically zero");
    }
    for (double& v : columns[j]) v /= scale[j];
  }

  HouseholderQr qr(std::move(columns));
  std::vector<double> rhs(times_us.begin(), times_us.end());
  if (auto dependent = qr.factorize(rhs)) {
    const std::size_t j = *dependent;
    std::vector<double> r_col(j);
    for (std::size_t i = 0; i < j; ++i) r_col[i] = qr.r(i, j);
    const auto combo = qr.solve_upper(j, r_col);

    std::vector<std::string> involved{column_name(kind, j)};
    std::vector<std::string> partners;
    for (std::size_t i = 0; i < j; ++i) {
      if (std::abs(combo[i]) > kDependencyTolerance) partners.push_back(column_name(kind, i));
    }
    for (const auto& name : partners) {
      if (name != "intercept") involved.push_back(name);
    }
    std::string what = "rank-deficient design matrix: predictor \"" + involved.front() + "\"";
    what += partners.size() == 1 && partners.front() == "intercept"
                ? " is constant"
                : " is collinear with " + join(partners);
    throw RankDeficiencyError(std::move(involved), what);
  }

  auto scaled = qr.solve_upper(m, rhs);
  std::vector<double> beta(p);
  for (std::size_t j = 0; j < p; ++j) beta[j] = scaled[j + 1] / scale[j + 1];
  const double intercept = scaled[0] / scale[0];

  FitResult result{ModelSpec(kind, beta, intercept), n, 0.0, {}, 0.0, std::nullopt};

  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = times_us[i] - predict(result.model, blocks[i]);
    sq[i] = e * e;
  }
  result.residual_sum_squares = sum(sq);

  const double sigma = n > m ? std::sqrt(result.residual_sum_squares / static_cast<double>(n - m))
                             : std::numeric_limits<double>::quiet_NaN();
  const auto gram = qr.inverse_gram_diagonal();
  result.intercept_std_error = sigma * std::sqrt(gram[0]) / scale[0];
  result.coefficient_std_errors.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    result.coefficient_std_errors[j] = sigma * std::sqrt(gram[j + 1]) / scale[j + 1];
  }

  if (const double cond = qr.condition_estimate(); cond > kConditionWarning) {
    result.condition_warning =
        "design matrix is ill-conditioned (scaled condition estimate " + std::to_string(cond) +
        "); coefficients may be unreliable";
  }
  return result;
}

FitResult ols_fit(ModelKind kind, const Dataset& train) {
  const auto blocks = train.features();
  const auto times = train.times_us();
  return ols_fit(kind, blocks, times);
}

}  // namespace joist
