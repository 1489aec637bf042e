#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "joist/error.hpp"
#include "joist/stats.hpp"
#include "naive_oracle.hpp"

using V = std::vector<double>;

TEST_CASE("pearson_r examples") {
  CHECK(joist::pearson_r(V{1, 2, 3}, V{2, 4, 6}).r == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(joist::pearson_r(V{1, 2, 3}, V{3, 2, 1}).r == doctest::Approx(-1.0).epsilon(1e-15));
  // r^2 = 16/25 by exact rational evaluation.
  const auto c = joist::pearson_r(V{1, 2, 3, 4}, V{1, 3, 2, 4});
  CHECK(std::abs(c.r - 0.8) < 1e-12);
  CHECK(c.n == 4);
}

TEST_CASE("pearson_r errors") {
  CHECK_THROWS_AS(joist::pearson_r(V{1, 2}, V{1, 2, 3}), joist::ShapeError);
  CHECK_THROWS_AS(joist::pearson_r(V{1}, V{1}), joist::ShapeError);
  CHECK_THROWS_AS(joist::pearson_r(V{1, 1, 1}, V{1, 2, 3}), joist::DegenerateError);
  CHECK_THROWS_AS(joist::pearson_r(V{1, 2, 3}, V{5, 5, 5}), joist::DegenerateError);
}

TEST_CASE("mae and emr examples") {
  CHECK(joist::mae(V{4, 5, 6}, V{4, 5, 6}) == 0.0);
  CHECK(joist::emr(V{4, 5, 6}, V{4, 5, 6}) == 0.0);
  CHECK(std::abs(joist::mae(V{10, 20, 30}, V{12, 18, 33}) - 7.0 / 3.0) < 1e-12);
  CHECK(std::abs(joist::emr(V{10, 20, 30}, V{12, 18, 33}) - 7.0 / 60.0) < 1e-12);
  CHECK(joist::mae(V{100}, V{0}) == 100.0);
  CHECK(joist::emr(V{100}, V{0}) == 1.0);
  CHECK_THROWS_AS(joist::mae(V{}, V{}), joist::ShapeError);
  CHECK_THROWS_AS(joist::mae(V{1}, V{1, 2}), joist::ShapeError);
  CHECK_THROWS_AS(joist::emr(V{-1, 1}, V{0, 0}), joist::DegenerateError);
}

TEST_CASE("r_squared and adjusted_r_squared examples") {
  const V t{3, 8, 1, 12, 7};
  CHECK(joist::r_squared(t, t) == 1.0);
  const double m = joist::mean(t);
  CHECK(std::abs(joist::r_squared(t, V(t.size(), m))) < 1e-12);
  CHECK(std::abs(joist::adjusted_r_squared(0.9, 11, 4) - 5.0 / 6.0) < 1e-12);
  CHECK_THROWS_AS(joist::adjusted_r_squared(0.9, 5, 4), joist::SampleCountError);
  CHECK_THROWS_AS(joist::r_squared(V{2, 2, 2}, V{1, 2, 3}), joist::DegenerateError);
}

TEST_CASE("r_squared is negative for a constant predictor below the mean") {
  // Right-skewed observations; predicting the median undershoots the mean.
  const V t{10, 11, 12, 13, 200};
  CHECK(joist::r_squared(t, V(t.size(), 12.0)) < 0.0);
}

TEST_CASE("extreme_value_report examples") {
  auto ev = joist::extreme_value_report(V{1, 2, 3}, V{3, 3, 3});
  CHECK(ev.n_exceeding_max_prediction == 0);
  CHECK(ev.max_prediction_us == 3.0);
  CHECK(ev.max_abs_error_us == 2.0);

  ev = joist::extreme_value_report(V{1, 2, 10}, V{2, 2, 2});
  CHECK(ev.n_exceeding_max_prediction == 1);
  CHECK(ev.max_abs_error_us == 8.0);

  CHECK_THROWS_AS(joist::extreme_value_report(V{1, 2}, V{1}), joist::ShapeError);
}

TEST_CASE("exceedance fraction is count over n") {
  // 2,849 of 20,000 measured blocks above a 71 ms maximum prediction.
  V t(20000, 10'000.0), th(20000, 71'000.0);
  for (std::size_t i = 0; i < 2849; ++i) t[i] = 100'000.0;
  const auto ev = joist::extreme_value_report(t, th);
  CHECK(ev.n_exceeding_max_prediction == 2849);
  CHECK(std::abs(static_cast<double>(ev.n_exceeding_max_prediction) / 20000.0 - 0.14) < 0.005);
}

TEST_CASE("statistics agree with the naive oracle on random inputs") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> len(6, 1000);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = len(rng);
    V x(n), t(n), th(n);
    const double scale = std::pow(10.0, 1 + 5 * u(rng));
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = std::floor(50 * u(rng));
      t[i] = scale * (1.0 + u(rng)) + 3 * x[i];
      th[i] = t[i] + scale * (u(rng) - 0.5);
    }
    CHECK(oracle::close(joist::pearson_r(x, t).r, oracle::pearson(x, t), 1e-9));
    CHECK(oracle::close(joist::mae(t, th), oracle::mae(t, th), 1e-9));
    CHECK(oracle::close(joist::emr(t, th), oracle::emr(t, th), 1e-9));
    const double r2 = joist::r_squared(t, th);
    CHECK(oracle::close(r2, oracle::r2(t, th), 1e-9));
    CHECK(oracle::close(joist::adjusted_r_squared(r2, n, 4), oracle::adjusted_r2(r2, n, 4), 1e-9));
  }
}

TEST_CASE("pearson_r symmetry, affine invariance and sign flip") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    V x(200), t(200);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = g(rng);
      t[i] = 0.5 * x[i] + g(rng);
    }
    const double r = joist::pearson_r(x, t).r;
    CHECK(std::abs(joist::pearson_r(t, x).r - r) < 1e-12);
    V xa(x), tn(t);
    for (auto& v : xa) v = 3.5 * v + 100.0;
    for (auto& v : tn) v = -v;
    CHECK(std::abs(joist::pearson_r(xa, t).r - r) < 1e-12);
    CHECK(std::abs(joist::pearson_r(x, tn).r + r) < 1e-12);
  }
}

TEST_CASE("MAE translation equivariance and scale behaviour") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(1.0, 1000.0);
  for (int trial = 0; trial < 50; ++trial) {
    V t(100), th(100);
    for (std::size_t i = 0; i < t.size(); ++i) {
      t[i] = u(rng);
      th[i] = u(rng);
    }
    const double m = joist::mae(t, th);
    const double e = joist::emr(t, th);
    V ts(t), ths(th), tl(t), thl(th);
    for (std::size_t i = 0; i < t.size(); ++i) {
      ts[i] += 250.0;
      ths[i] += 250.0;
      tl[i] *= 7.0;
      thl[i] *= 7.0;
    }
    CHECK(oracle::close(joist::mae(ts, ths), m, 1e-9));
    CHECK(oracle::close(joist::mae(tl, thl), 7.0 * m, 1e-12));
    CHECK(oracle::close(joist::emr(tl, thl), e, 1e-12));
  }
}

TEST_CASE("adjusted R^2 is strictly below R^2 for imperfect fits") {
  for (double r2 : {-0.5, 0.0, 0.3, 0.9, 0.999}) {
    for (std::size_t p : {1u, 4u}) {
      for (std::size_t n : {p + 2, std::size_t{100}, std::size_t{10000}}) {
        CHECK(joist::adjusted_r_squared(r2, n, p) < r2);
      }
    }
  }
}

TEST_CASE("compensated summation for long series") {
  // 1e16 followed by many ones: naive accumulation drops every one.
  V v(200'000, 1.0);
  v[0] = 1e16;
  CHECK(joist::sum(v) == 1e16 + 199'999.0);
}

TEST_CASE("evaluate collects all statistics") {
  const V t{10, 20, 30, 40, 50, 60, 70};
  const V th{12, 18, 33, 41, 45, 61, 65};
  const auto r = joist::evaluate(t, th, 1);
  CHECK(r.n == 7);
  CHECK(r.mae_us == doctest::Approx(joist::mae(t, th)));
  CHECK(r.emr == doctest::Approx(joist::emr(t, th)));
  CHECK(r.r2 == doctest::Approx(joist::r_squared(t, th)));
  REQUIRE(r.adj_r2.has_value());
  CHECK(*r.adj_r2 == doctest::Approx(joist::adjusted_r_squared(r.r2, 7, 1)));
  CHECK(r.max_prediction_us == 65.0);
  CHECK(r.n_exceeding_max_prediction == 1);
  CHECK(r.max_abs_error_us == 5.0);
  CHECK(r.mean_observed_us == 40.0);
  CHECK_FALSE(joist::evaluate(V{1, 2, 3}, V{1, 2, 3}, 4).adj_r2.has_value());
}

TEST_CASE("fit_line") {
  // Slope 23/14 and intercept 1/2 from exact rational evaluation.
  const auto line = joist::fit_line(V{1, 2, 4}, V{2, 4, 7});
  CHECK(std::abs(line.slope - 23.0 / 14.0) < 1e-12);
  CHECK(std::abs(line.intercept - 0.5) < 1e-12);
  CHECK_THROWS_AS(joist::fit_line(V{3, 3, 3}, V{1, 2, 3}), joist::RankDeficiencyError);
}
