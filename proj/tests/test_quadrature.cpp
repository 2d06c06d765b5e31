#include <doctest.h>

#include <cmath>
#include <limits>

#include "generators.hpp"
#include "mcprod/error.hpp"
#include "mcprod/gaussian.hpp"
#include "mcprod/quadrature.hpp"

using namespace mcprod;

namespace {

// E[x^d] under N(0, 1): zero for odd d, (d-1)!! for even d.
double normal_moment(int d) {
  if (d % 2) return 0.0;
  double m = 1.0;
  for (int k = d - 1; k > 1; k -= 2) m *= k;
  return m;
}

}  // namespace

TEST_CASE("small rules match hand values") {
  const auto two = gauss_hermite(2);
  CHECK(two.nodes[0] == doctest::Approx(-1.0));
  CHECK(two.nodes[1] == doctest::Approx(1.0));
  CHECK(two.weights[0] == doctest::Approx(0.5));

  const auto three = gauss_hermite(3);
  CHECK(three.nodes[0] == doctest::Approx(-std::sqrt(3.0)));
  CHECK(std::fabs(three.nodes[1]) < 1e-14);
  CHECK(three.weights[1] == doctest::Approx(2.0 / 3.0));
  CHECK(three.weights[2] == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("polynomial exactness up to degree 2n-1") {
  for (int n : {1, 2, 5, 10, 21, 40}) {
    const auto rule = gauss_hermite(n);
    double wsum = 0.0;
    for (double w : rule.weights) wsum += w;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-13));
    for (int d = 0; d <= 2 * n - 1; ++d) {
      double s = 0.0, scale = 0.0;
      for (std::size_t j = 0; j < rule.size(); ++j) {
        s += rule.weights[j] * std::pow(rule.nodes[j], d);
        scale += rule.weights[j] * std::pow(std::fabs(rule.nodes[j]), d);
      }
      CHECK(std::fabs(s - normal_moment(d)) <= 1e-12 * std::max(1.0, scale));
    }
  }
}

TEST_CASE("fourth moment at order 10") {
  const auto rule = gauss_hermite(10);
  CHECK(expect(rule, [](std::span<const double> x) { return std::pow(x[0], 4); }) ==
        doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("log expectation") {
  // log E[exp(x)] = 1/2
  const auto rule = gauss_hermite(30);
  CHECK(log_expect(rule, [](std::span<const double> x) { return x[0]; }) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(log_expect(rule, [](std::span<const double> x) { return -1000.0 + x[0]; }) ==
        doctest::Approx(-999.5).epsilon(1e-12));
}

TEST_CASE("tensor rule") {
  const auto t = tensor_rule(gauss_hermite(5), 2);
  CHECK(t.size() == 25u);
  CHECK(t.dimension == 2);
  const double e = expect(t, [](std::span<const double> x) { return x[0] * x[0] * x[1] * x[1] + x[0] * x[1]; });
  CHECK(e == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(tensor_rule(gauss_hermite(100), 4), InputError);
  CHECK_THROWS_AS(tensor_rule(gauss_hermite(3), 0), InputError);
}

TEST_CASE("order and integrand errors") {
  CHECK_THROWS_AS(gauss_hermite(0), InputError);
  CHECK_THROWS_AS(gauss_hermite(101), InputError);
  const auto rule = gauss_hermite(4);
  CHECK_THROWS_AS(expect(rule, [](std::span<const double>) { return std::numeric_limits<double>::quiet_NaN(); }),
                  NumericalError);
}

TEST_CASE("multivariate normal") {
  Eigen::MatrixXd cov(2, 2);
  cov << 2.0, 0.6, 0.6, 1.0;
  const MultivariateNormal g(Eigen::Vector2d(1.0, -1.0), cov);
  const double x[2] = {0.5, 0.0};
  const double det = 2.0 - 0.36;
  const double q = (1.0 * 0.25 - 2 * 0.6 * (-0.5) * 1.0 + 2.0 * 1.0) / det;
  CHECK(g.log_density(x) == doctest::Approx(-std::log(2 * M_PI) - 0.5 * std::log(det) - 0.5 * q));
  CHECK(g.entropy() == doctest::Approx(1.0 + std::log(2 * M_PI) + 0.5 * std::log(det)));

  SUBCASE("sampling and fitting") {
    Stream s(60, 0);
    Eigen::MatrixXd d(40000, 2);
    double buf[2];
    for (int r = 0; r < d.rows(); ++r) {
      g.sample(s, buf);
      d(r, 0) = buf[0];
      d(r, 1) = buf[1];
    }
    const auto f = MultivariateNormal::fit(d);
    CHECK(f.mean()(0) == doctest::Approx(1.0).epsilon(0.03));
    CHECK(f.covariance()(0, 1) == doctest::Approx(0.6).epsilon(0.05));
  }
  SUBCASE("singular covariance gets jitter") {
    Eigen::MatrixXd one = Eigen::MatrixXd::Ones(2, 2);
    const MultivariateNormal h(Eigen::Vector2d::Zero(), one);
    CHECK(h.jitter() > 0.0);
    CHECK(std::isfinite(h.log_density(x)));
  }
}
