#include "joist/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "joist/error.hpp"

namespace joist {
namespace {

void require_same_nonempty(std::span<const double> a, std::span<const double> b,
                           const char* what) {
  if (a.size() != b.size()) {
    throw ShapeError(std::string(what) + ": length mismatch (" + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw ShapeError(std::string(what) + ": empty input");
}

// Neumaier's variant of Kahan summation.
double compensated_sum(std::span<const double> values) {
  double s = 0.0;
  double c = 0.0;
  for (double v : values) {
    const double t = s + v;
    c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  }
  return s + c;
}

template <typename F>
double sum_of(std::size_t n, F&& term) {
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) terms[i] = term(i);
  return sum(terms);
}

}  // namespace

double sum(std::span<const double> values) {
  if (values.size() >= kCompensatedSumThreshold) return compensated_sum(values);
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

double mean(std::span<const double> values) {
  if (values.empty()) throw ShapeError("mean: empty input");
  return sum(values) / static_cast<double>(values.size());
}

Correlation pearson_r(std::span<const double> x, std::span<const double> t) {
  require_same_nonempty(x, t, "pearson_r");
  const std::size_t n = x.size();
  if (n < 2) throw ShapeError("pearson_r: need at least 2 observations");

  const double mx = mean(x);
  const double mt = mean(t);
  const double sxt = sum_of(n, [&](std::size_t i) { return (x[i] - mx) * (t[i] - mt); });
  const double sxx = sum_of(n, [&](std::size_t i) { return (x[i] - mx) * (x[i] - mx); });
  const double stt = sum_of(n, [&](std::size_t i) { return (t[i] - mt) * (t[i] - mt); });
  if (sxx == 0.0 || stt == 0.0) {
    throw DegenerateError(std::string("pearson_r: ") + (sxx == 0.0 ? "feature" : "time") +
                          " series is constant");
  }
  const double r = sxt / (std::sqrt(sxx) * std::sqrt(stt));
  return {std::clamp(r, -1.0, 1.0), n};
}

double mae(std::span<const double> t, std::span<const double> t_hat) {
  require_same_nonempty(t, t_hat, "mae");
  return sum_of(t.size(), [&](std::size_t i) { return std::abs(t[i] - t_hat[i]); }) /
         static_cast<double>(t.size());
}

double emr(std::span<const double> t, std::span<const double> t_hat) {
  const double m = mae(t, t_hat);
  const double t_bar = mean(t);
  if (t_bar == 0.0) throw DegenerateError("emr: mean observation is zero");
  return m / t_bar;
}

double r_squared(std::span<const double> t, std::span<const double> t_hat) {
  require_same_nonempty(t, t_hat, "r_squared");
  if (t.size() < 2) throw ShapeError("r_squared: need at least 2 observations");
  const double t_bar = mean(t);
  const double rss = sum_of(t.size(), [&](std::size_t i) {
    const double e = t[i] - t_hat[i];
    return e * e;
  });
  const double tss = sum_of(t.size(), [&](std::size_t i) {
    const double d = t[i] - t_bar;
    return d * d;
  });
  if (tss == 0.0) throw DegenerateError("r_squared: observed series is constant");
  return 1.0 - rss / tss;
}

double adjusted_r_squared(double r2, std::size_t n, std::size_t p) {
  if (n <= p + 1) {
    throw SampleCountError("adjusted_r_squared: need n > p + 1 (n=" + std::to_string(n) +
                           ", p=" + std::to_string(p) + ")");
  }
  return 1.0 - (1.0 - r2) * static_cast<double>(n - 1) / static_cast<double>(n - p - 1);
}

ExtremeValues extreme_value_report(std::span<const double> t, std::span<const double> t_hat) {
  require_same_nonempty(t, t_hat, "extreme_value_report");
  ExtremeValues ev;
  ev.max_prediction_us = *std::max_element(t_hat.begin(), t_hat.end());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] > ev.max_prediction_us) ++ev.n_exceeding_max_prediction;
    ev.max_abs_error_us = std::max(ev.max_abs_error_us, std::abs(t[i] - t_hat[i]));
  }
  return ev;
}

EvalReport evaluate(std::span<const double> t, std::span<const double> t_hat, std::size_t p) {
  EvalReport report;
  report.n = t.size();
  report.mae_us = mae(t, t_hat);
  report.mean_observed_us = mean(t);
  report.emr = emr(t, t_hat);
  report.r2 = r_squared(t, t_hat);
  if (report.n > p + 1) report.adj_r2 = adjusted_r_squared(report.r2, report.n, p);
  const auto ev = extreme_value_report(t, t_hat);
  report.max_abs_error_us = ev.max_abs_error_us;
  report.max_prediction_us = ev.max_prediction_us;
  report.n_exceeding_max_prediction = ev.n_exceeding_max_prediction;
  return report;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  require_same_nonempty(x, y, "fit_line");
  const std::size_t n = x.size();
  const double mx = mean(x);
  const double my = mean(y);
  const double sxy = sum_of(n, [&](std::size_t i) { return (x[i] - mx) * (y[i] - my); });
  const double sxx = sum_of(n, [&](std::size_t i) { return (x[i] - mx) * (x[i] - mx); });
  if (sxx == 0.0) {
    throw RankDeficiencyError({"predicted_us"},
                              "fit_line: predictor is constant, the line is undetermined");
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

}  // namespace joist
