#include <doctest.h>

#include <cmath>
#include <vector>

#include "generators.hpp"
#include "mcprod/covariation.hpp"
#include "mcprod/error.hpp"
#include "mcprod/product_mc.hpp"

using namespace mcprod;

namespace {

// Plain two-pass sample covariance, divisor R.
double cov(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t r = 0; r < x.size(); ++r) {
    mx += x[r];
    my += y[r];
  }
  mx /= x.size();
  my /= y.size();
  double c = 0;
  for (std::size_t r = 0; r < x.size(); ++r) c += (x[r] - mx) * (y[r] - my);
  return c / x.size();
}

std::vector<double> row_products(const SampleBlock& b, std::size_t upto) {
  std::vector<double> p(b.rows(), 1.0);
  for (std::size_t r = 0; r < b.rows(); ++r)
    for (std::size_t c = 0; c < upto; ++c) p[r] *= b(r, c);
  return p;
}

// Every combination of up to four support points per column, weighted
// equally: a factorized distribution laid out as a sample.
SampleBlock product_support(const std::vector<std::vector<double>>& support) {
  std::size_t rows = 1;
  for (const auto& s : support) rows *= s.size();
  const std::size_t n = support.size();
  std::vector<double> v(rows * n);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t code = r;
    for (std::size_t i = 0; i < n; ++i) {
      v[r * n + i] = support[i][code % support[i].size()];
      code /= support[i].size();
    }
  }
  return SampleBlock(rows, n, v);
}

}  // namespace

TEST_CASE("bivariate TCI is the sample covariance") {
  Stream s(31, 0);
  const auto b = testgen::dependent_block(s, 50, 2);
  CHECK(tci_sample(b) == doctest::Approx(cov(b.column(0), b.column(1))).epsilon(1e-12));
  CHECK(cov_partial(b, 2) == doctest::Approx(cov(b.column(0), b.column(1))).epsilon(1e-12));
  const auto rep = tci_decomposition(b);
  CHECK(rep.cov_terms.size() == 1);
  CHECK(rep.tci_decomposed == doctest::Approx(rep.cov_terms[0]));
}

TEST_CASE("constant column factors out of the TCI") {
  Stream s(32, 0);
  const auto b = testgen::dependent_block(s, 30, 3);
  std::vector<double> v;
  for (std::size_t r = 0; r < b.rows(); ++r) {
    for (double x : b.row(r)) v.push_back(x);
    v.push_back(2.5);
  }
  const SampleBlock with_const(b.rows(), 4, v);
  CHECK(tci_sample(with_const) == doctest::Approx(2.5 * tci_sample(b)).epsilon(1e-10));
  CHECK(cov_partial(with_const, 4) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("three-column decomposition by hand") {
  Stream s(33, 0);
  const auto b = testgen::dependent_block(s, 40, 3);
  const auto p12 = row_products(b, 2);
  const double e3 = moments(b, 0.0).mean[2];
  const double hand = cov(p12, b.column(2)) + e3 * cov(b.column(0), b.column(1));
  const auto rep = tci_decomposition(b);
  CHECK(rep.tci_decomposed == doctest::Approx(hand).epsilon(1e-12));
  CHECK(rep.tci_direct == doctest::Approx(hand).epsilon(1e-10));
}

TEST_CASE("cov_partial range and brute force") {
  Stream s(34, 0);
  const auto b = testgen::dependent_block(s, 25, 4);
  CHECK_THROWS_AS(cov_partial(b, 1), InputError);
  CHECK_THROWS_AS(cov_partial(b, 5), InputError);
  CHECK(cov_partial(b, 3) == doctest::Approx(cov(row_products(b, 2), b.column(2))).epsilon(1e-12));
  CHECK_THROWS_AS(tci_decomposition(SampleBlock(3, 1, {1, 2, 3})), InputError);
}

TEST_CASE("identities hold on random blocks") {
  for (std::uint64_t t = 0; t < 1000; ++t) {
    Stream s(35, t);
    const std::size_t n = 2 + s.index_below(7);
    const auto b = testgen::dependent_block(s, 3 + s.index_below(60), n);
    const auto rep = tci_report(b);
    CHECK(std::fabs(rep.tci_direct - rep.tci_decomposed) <= 1e-10 * rep.scale);
    CHECK(std::fabs(rep.tci_direct) <= rep.bound + 1e-10 * rep.scale);
    CHECK(std::fabs(rep.true_variance - (rep.indep_variance - rep.tci_direct * rep.tci_direct)) <=
          1e-10 * rep.indep_variance);
  }
}

TEST_CASE("bound conventions") {
  Stream s(36, 0);
  const auto b = testgen::dependent_block(s, 30, 2);
  const auto m = moments(b, 0.0);
  CHECK(tci_bound(m, partial_product_variances(b)) ==
        doctest::Approx(std::sqrt(m.variance[0] * m.variance[1])));
  const SampleBlock flat(4, 3, std::vector<double>(12, 1.5));
  const auto rep = tci_report(flat);
  CHECK(rep.bound == 0.0);
  CHECK(rep.tci_direct == doctest::Approx(0.0));
  CHECK_THROWS_AS(tci_bound(m, std::vector<double>{-1.0}), InputError);
}

TEST_CASE("factorized distributions have zero covariation") {
  for (std::uint64_t t = 0; t < 100; ++t) {
    Stream s(37, t);
    const std::size_t n = 2 + s.index_below(4);
    std::vector<std::vector<double>> support(n);
    for (auto& col : support) {
      col.resize(1 + s.index_below(4));
      for (auto& x : col) x = s.uniform(-2.0, 2.0);
    }
    const auto b = product_support(support);
    double scale = 0.0;
    for (double p : row_products(b, n)) scale = std::max(scale, std::fabs(p));
    CHECK(std::fabs(tci_sample(b)) <= 1e-14 * std::max(scale, 1.0));
    // True product variance is then the Goodman form.
    const auto vs = variance_underestimation(b);
    CHECK(vs.true_variance == doctest::Approx(goodman_product_variance(moments(b, 0.0))).epsilon(1e-12));
  }
}

TEST_CASE("variance split on an enumerated block") {
  const SampleBlock b = SampleBlock::from_rows({{1, 2, 0.5}, {2, 1, 1.5}, {0.5, 3, 1}, {1, 1, 2}});
  const auto p = row_products(b, 3);
  const double j = joint_estimate(b).value(), mgl = marginal_estimate(b).value();
  double tv = 0, iv = 0;
  for (double x : p) {
    tv += (x - j) * (x - j);
    iv += (x - mgl) * (x - mgl);
  }
  const auto vs = variance_underestimation(b);
  CHECK(vs.true_variance == doctest::Approx(tv / 4));
  CHECK(vs.indep_variance == doctest::Approx(iv / 4));
  CHECK(vs.tci == doctest::Approx(j - mgl));

  const SampleBlock no_cov = SampleBlock::from_rows({{1, 0.3}, {1, 2.0}, {1, 1.1}});
  const auto z = variance_underestimation(no_cov);
  CHECK(z.true_variance == doctest::Approx(z.indep_variance));
}

TEST_CASE("log-space TCI matches linear TCI where both are representable") {
  for (std::uint64_t t = 0; t < 100; ++t) {
    Stream s(38, t);
    const auto b = testgen::positive_block(s, 20, 2 + s.index_below(6));
    CHECK(tci_sample_log(b).value() == doctest::Approx(tci_sample(b)).epsilon(1e-9));
  }
}

TEST_CASE("ratio diagnostics") {
  Stream s(39, 0);
  const auto b = testgen::positive_block(s, 50, 5);
  const auto same = estimator_tci_diagnostics(b, &b);
  CHECK(same.net_log_effect == 0.0);
  const auto single = estimator_tci_diagnostics(b, nullptr);
  CHECK_FALSE(single.denominator.has_value());
  CHECK(single.net_log_effect == single.numerator.log_gap);
  CHECK(std::exp(single.numerator.log_gap) ==
        doctest::Approx(joint_estimate(b).value() / marginal_estimate(b).value()));
  CHECK_THROWS_AS(estimator_tci_diagnostics(SampleBlock(2, 2, {1, -1, 2, 2}), nullptr), InputError);
}

TEST_CASE("TCI of independent columns shrinks with R") {
  // Independent Uniform(0, 2) columns: the plug-in TCI has sd ~ 1/sqrt(R).
  Stream s(40, 0);
  const std::size_t rows = 1000000, n = 3;
  std::vector<double> v(rows * n);
  for (auto& x : v) x = s.uniform(0.0, 2.0);
  const SampleBlock b(rows, n, v);
  // To first order J - M is a mean of prod Y - sum_i Y_i, whose variance is
  // the order-2 and order-3 Goodman terms: 3 (1/3)^2 + (1/3)^3.
  const double se = std::sqrt((3.0 / 9.0 + 1.0 / 27.0) / rows);
  CHECK(std::fabs(tci_sample(b)) < 4.0 * se);
  const std::vector<std::size_t> prefixes{100, 10000, 1000000};
  const auto traj = tci_trajectory(b, prefixes);
  CHECK(traj.size() == 3);
  CHECK(traj[2] == doctest::Approx(tci_sample(b)));
}
