#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "generators.hpp"
#include "mcprod/core_stats.hpp"
#include "mcprod/error.hpp"
#include "mcprod/random.hpp"
#include "mcprod/signed_log.hpp"

using namespace mcprod;

TEST_CASE("SampleBlock rejects non-finite entries and names the position") {
  std::vector<double> v{1.0, 2.0, 3.0, std::numeric_limits<double>::quiet_NaN()};
  try {
    SampleBlock b(2, 2, v);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
  CHECK_THROWS_AS(SampleBlock(0, 2, {}), InputError);
  CHECK_THROWS_AS(SampleBlock(2, 2, {1.0, 2.0, 3.0}), InputError);
}

TEST_CASE("moments of simple columns") {
  SUBCASE("constant column") {
    const auto m = moments(SampleBlock(3, 1, {2.5, 2.5, 2.5}), 0.0);
    CHECK(m.mean[0] == 2.5);
    CHECK(m.variance[0] == 0.0);
    CHECK(m.cv[0] == 0.0);
  }
  SUBCASE("two points 0 and 1") {
    const auto m = moments(SampleBlock(2, 1, {0.0, 1.0}), 0.0);
    CHECK(m.mean[0] == doctest::Approx(0.5));
    CHECK(m.variance[0] == doctest::Approx(0.25));
    CHECK(m.cv[0] == doctest::Approx(1.0));
    CHECK(m.zero_mean_count() == 0);
  }
  SUBCASE("exact cancellation lands in the zero-mean set") {
    const auto m = moments(SampleBlock(2, 1, {-1.0, 1.0}), 1e-12);
    CHECK(m.is_zero_mean(0));
    CHECK(std::isnan(m.cv[0]));
  }
}

TEST_CASE("default zero tolerance is relative to the largest mean") {
  const auto m = moments(SampleBlock(2, 2, {1e6, 1e-7, 1e6, -1e-7}));
  CHECK(m.zero_tol == doctest::Approx(1e-6));
  CHECK(m.is_zero_mean(1));
  CHECK_FALSE(m.is_zero_mean(0));
}

TEST_CASE("divisor-R variance reconstructs exactly") {
  for (std::uint64_t t = 0; t < 200; ++t) {
    Stream s(11, t);
    const auto b = testgen::dependent_block(s, 2 + s.index_below(40), 1 + s.index_below(6));
    const auto m = moments(b, 0.0);
    for (std::size_t c = 0; c < b.cols(); ++c) {
      double ss = 0.0;
      for (std::size_t r = 0; r < b.rows(); ++r) ss += (b(r, c) - m.mean[c]) * (b(r, c) - m.mean[c]);
      CHECK(testgen::rel(ss / b.rows(), m.variance[c]) < 1e-12);
    }
  }
}

TEST_CASE("batch_mce") {
  CHECK(batch_mce(std::vector<double>{5, 5, 5}) == 0.0);
  CHECK(batch_mce(std::vector<double>{0, 2}) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(batch_mce(std::vector<double>{1.0}), InputError);
  CHECK_THROWS_AS(batch_mce(std::vector<double>{1.0, INFINITY}), InputError);

  // Permutation invariance, up to summation order.
  Stream s(3, 0);
  std::vector<double> v(50);
  for (auto& x : v) x = s.normal(-2000.0, 3.0);
  std::vector<double> w(v.rbegin(), v.rend());
  CHECK(testgen::rel(batch_mce(v), batch_mce(w)) < 1e-12);
}

TEST_CASE("random streams are reproducible and distinct") {
  Stream a(42, 0), b(42, 0), c(42, 1);
  const double a0 = a.uniform();
  CHECK(a0 == b.uniform());
  CHECK(a0 != c.uniform());
  CHECK_THROWS_AS(make_streams(1, 0), InputError);
  CHECK_THROWS_AS(make_streams(1, -3), InputError);
  const auto set = make_streams(42, 4);
  Stream d = set.stream(0);
  CHECK(d.uniform() == a0);

  Stream u(7, 0);
  double sum = 0.0;
  for (int i = 0; i < 1000000; ++i) sum += u.uniform();
  CHECK(std::fabs(sum / 1e6 - 0.5) < 0.002);
}

TEST_CASE("Beta draws have the right mean and variance") {
  Stream s(5, 0);
  const double a = 0.1, b = 0.2;
  const int n = 400000;
  double m = 0.0, m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = s.beta(a, b);
    m += x;
    m2 += x * x;
  }
  m /= n;
  const double var = m2 / n - m * m;
  const double mean_exact = a / (a + b);
  const double var_exact = a * b / ((a + b) * (a + b) * (a + b + 1));
  CHECK(std::fabs(m - mean_exact) < 4.0 * std::sqrt(var_exact / n));
  CHECK(var == doctest::Approx(var_exact).epsilon(0.02));
}

TEST_CASE("signed log arithmetic") {
  const auto x = SignedLog::from_value(-3.0);
  const auto y = SignedLog::from_value(5.0);
  CHECK((x + y).value() == doctest::Approx(2.0));
  CHECK((x - y).value() == doctest::Approx(-8.0));
  CHECK((x * y).value() == doctest::Approx(-15.0));
  CHECK((y - y).is_zero());
  const std::vector<double> logs{-1000.0, -1000.0};
  CHECK(log_sum_exp(logs) == doctest::Approx(-1000.0 + std::log(2.0)));
  CHECK(log_mean_exp(logs) == doctest::Approx(-1000.0));
}
