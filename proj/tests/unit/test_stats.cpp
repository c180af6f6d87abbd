#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "doctest.h"
#include "mrsi/errors.hpp"
#include "mrsi/stats.hpp"

using namespace mrsi;
using namespace mrsi::stats;

namespace {

// Textbook Welch statistic with a Boost t-distribution tail.
TTestResult welch_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  auto mv = [](const std::vector<double>& x, double& m, double& v) {
    long double s = 0, ss = 0;
    for (double e : x) s += e;
    m = static_cast<double>(s / x.size());
    for (double e : x) ss += (e - m) * (e - m);
    v = static_cast<double>(ss / (x.size() - 1));
  };
  double ma, va, mb, vb;
  mv(a, ma, va);
  mv(b, mb, vb);
  const double sa = va / a.size(), sb = vb / b.size();
  TTestResult r;
  r.t = (ma - mb) / std::sqrt(sa + sb);
  r.df = (sa + sb) * (sa + sb) / (sa * sa / (a.size() - 1) + sb * sb / (b.size() - 1));
  boost::math::students_t dist(r.df);
  r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

// Exact two-sided permutation p for tie-free data from sum of squared rank
// differences.
double exact_spearman_p(const std::vector<int>& ry) {
  const int n = static_cast<int>(ry.size());
  auto d2 = [&](const std::vector<int>& r) {
    long s = 0;
    for (int i = 0; i < n; ++i) s += static_cast<long>(i + 1 - r[i]) * (i + 1 - r[i]);
    return s;
  };
  const long mid = static_cast<long>(n) * (static_cast<long>(n) * n - 1) / 6;  // d2 at rho = 0
  const long obs = std::labs(d2(ry) - mid);
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 1);
  long hits = 0, total = 0;
  do {
    ++total;
    if (std::labs(d2(p) - mid) >= obs) ++hits;
  } while (std::next_permutation(p.begin(), p.end()));
  return static_cast<double>(hits) / total;
}

}  // namespace

TEST_CASE("incomplete beta against Boost") {
  for (double a : {0.5, 1.0, 2.5, 10.0, 40.0}) {
    for (double b : {0.5, 1.0, 3.0, 17.0}) {
      for (double x : {0.0, 0.01, 0.2, 0.5, 0.77, 0.99, 1.0}) {
        CHECK(incomplete_beta(a, b, x) == doctest::Approx(boost::math::ibeta(a, b, x)).epsilon(1e-10));
      }
    }
  }
  CHECK_THROWS_AS(incomplete_beta(1.0, 1.0, 1.5), InvalidArgument);
}

TEST_CASE("t survival function against Boost") {
  for (double df : {1.0, 2.5, 7.3, 30.0, 200.0}) {
    boost::math::students_t dist(df);
    for (double t : {-3.0, -0.5, 0.0, 0.4, 1.96, 5.0}) {
      CHECK(student_t_sf(t, df) ==
            doctest::Approx(boost::math::cdf(boost::math::complement(dist, t))).epsilon(1e-10));
    }
  }
}

TEST_CASE("Welch t-test") {
  const std::vector<double> a{1, 2, 3, 4, 5}, b{3, 4, 5, 6, 7};
  const auto r = welch_t_test(a, b);
  const auto o = welch_oracle(a, b);
  CHECK(r.t == doctest::Approx(-2.0));
  CHECK(r.df == doctest::Approx(8.0));
  CHECK(r.p == doctest::Approx(o.p).epsilon(1e-10));

  const std::vector<double> c{2.1, 3.3, 1.9, 4.4, 2.8, 3.0, 5.1}, d{4.0, 6.2, 5.5, 3.9};
  const auto s = welch_t_test(c, d);
  const auto so = welch_oracle(c, d);
  CHECK(s.t == doctest::Approx(so.t).epsilon(1e-12));
  CHECK(s.df == doctest::Approx(so.df).epsilon(1e-12));
  CHECK(s.p == doctest::Approx(so.p).epsilon(1e-10));
  // antisymmetry
  const auto sw = welch_t_test(d, c);
  CHECK(sw.t == doctest::Approx(-s.t));
  CHECK(sw.p == doctest::Approx(s.p));
  // identical samples
  const auto same = welch_t_test(c, c);
  CHECK(same.t == 0.0);
  CHECK(same.p == doctest::Approx(1.0));
  // errors
  const std::vector<double> one{1.0}, k1{2, 2, 2}, k2{3, 3};
  CHECK_THROWS_AS(welch_t_test(one, a), InvalidArgument);
  CHECK_THROWS_AS(welch_t_test(k1, k2), DegenerateSampleError);
  // one constant sample is fine
  CHECK(std::isfinite(welch_t_test(k1, a).p));
}

TEST_CASE("average ranks") {
  const std::vector<double> x{10, 20, 20, 5, 20};
  const auto r = average_ranks(x);
  CHECK(r == std::vector<double>{2, 4, 4, 1, 4});
}

TEST_CASE("Spearman hand cases") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> up{2, 4, 6, 8, 10}, down{5, 4, 3, 2, 1}, mixed{2, 1, 4, 3, 5};
  CHECK(spearman(x, up).rho == doctest::Approx(1.0));
  CHECK(spearman(x, down).rho == doctest::Approx(-1.0));
  CHECK(spearman(x, mixed).rho == doctest::Approx(0.8));
  // monotone transforms leave rho unchanged
  std::vector<double> ex(x.size()), cube(mixed.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    ex[i] = std::exp(x[i]);
    cube[i] = mixed[i] * mixed[i] * mixed[i] - 7.0;
  }
  CHECK(spearman(ex, cube).rho == doctest::Approx(0.8));
  // ties: x ranks {1.5,1.5,3,4}, y ranks {1,2,3,4}
  const std::vector<double> tx{1, 1, 2, 3}, ty{1, 2, 3, 4};
  const double rx[4] = {1.5, 1.5, 3, 4};
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < 4; ++i) {
    sxy += (rx[i] - 2.5) * (i + 1 - 2.5);
    sxx += (rx[i] - 2.5) * (rx[i] - 2.5);
    syy += (i + 1 - 2.5) * (i + 1 - 2.5);
  }
  CHECK(spearman(tx, ty).rho == doctest::Approx(sxy / std::sqrt(sxx * syy)));
  // t approximation p
  const double rho = 0.8, t = rho * std::sqrt(3.0 / (1 - rho * rho));
  boost::math::students_t dist(3.0);
  CHECK(spearman(x, mixed).p ==
        doctest::Approx(2 * boost::math::cdf(boost::math::complement(dist, t))).epsilon(1e-10));
  const std::vector<double> flat{3, 3, 3, 3, 3};
  CHECK_THROWS_AS(spearman(x, flat), UndefinedCorrelationError);
  CHECK_THROWS_AS(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2}), InvalidArgument);
}

TEST_CASE("Spearman exact permutation p") {
  const std::vector<double> x{1, 2, 3, 4, 5}, y{2, 1, 4, 3, 5};
  CHECK(spearman(x, y, SpearmanP::ExactPermutation).p == doctest::Approx(16.0 / 120.0));
  const std::vector<int> ry{3, 1, 7, 2, 5, 8, 4, 6};
  std::vector<double> x8(8), y8(8);
  for (int i = 0; i < 8; ++i) {
    x8[i] = i + 1;
    y8[i] = ry[i] * 1.5;
  }
  CHECK(spearman(x8, y8, SpearmanP::ExactPermutation).p == doctest::Approx(exact_spearman_p(ry)));
  std::vector<double> big(11);
  std::iota(big.begin(), big.end(), 0.0);
  CHECK_THROWS_AS(spearman(big, big, SpearmanP::ExactPermutation), InvalidArgument);
}

TEST_CASE("linear regression") {
  const std::vector<double> x{0, 1, 2, 3, 4};
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = 2 * x[i] + 1;
  const auto r = linreg(x, y);
  CHECK(r.slope == doctest::Approx(2.0));
  CHECK(r.intercept == doctest::Approx(1.0));
  CHECK(r.r2 == doctest::Approx(1.0));
  const std::vector<double> c{4, 4, 4, 4, 4};
  const auto rc = linreg(x, c);
  CHECK(rc.slope == 0.0);
  CHECK(rc.intercept == 4.0);
  CHECK(rc.r2 == 0.0);
  CHECK_THROWS_AS(linreg(c, x), UndefinedCorrelationError);

  // normal equations in long double
  const std::vector<double> xs{0.3, 1.7, 2.2, 4.9, 5.0, 7.4}, ys{1.1, 2.0, 3.7, 4.1, 6.3, 6.0};
  long double n = xs.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += (long double)xs[i] * xs[i];
    sxy += (long double)xs[i] * ys[i];
  }
  const long double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const long double icpt = (sy - slope * sx) / n;
  const auto rl = linreg(xs, ys);
  CHECK(rl.slope == doctest::Approx(static_cast<double>(slope)).epsilon(1e-12));
  CHECK(rl.intercept == doctest::Approx(static_cast<double>(icpt)).epsilon(1e-12));
  CHECK(rl.r2 > 0.0);
  CHECK(rl.r2 < 1.0);
}

TEST_CASE("correlation matrix") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<std::string> names{"a", "b", "c", "d"};
  const std::vector<std::vector<double>> cols{
      {1, 2, 3, 4, 5, 6},
      {1, 2, 3, 4, 5, 6},
      {6, 5, nan, 3, 2, 1},
      {2, 2, 2, 2, 2, 9},
  };
  const auto m = correlation_matrix(names, cols);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(m.rho[i][i] == 1.0);
    CHECK(m.defined[i][i]);
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(m.defined[i][j] == m.defined[j][i]);
      if (m.defined[i][j]) {
        CHECK(m.rho[i][j] == m.rho[j][i]);
        CHECK(m.p[i][j] == m.p[j][i]);
      }
    }
  }
  CHECK(m.rho[0][1] == doctest::Approx(1.0));
  CHECK(m.rho[0][2] == doctest::Approx(-1.0));
  CHECK(m.n[0][2] == 5);
  CHECK(m.n[0][1] == 6);
  CHECK(m.significant[0][1]);
  // d is constant once c's missing row goes
  const std::vector<std::vector<double>> cols2{{1, 2, 3, 4}, {5, 5, 5, nan}};
  const auto m2 = correlation_matrix({"x", "y"}, cols2);
  CHECK_FALSE(m2.defined[0][1]);
  CHECK(std::isnan(m2.rho[0][1]));
  CHECK(m2.n[0][1] == 3);
  CHECK_THROWS_AS(correlation_matrix({"x"}, {{1, 2, 3}}), InvalidArgument);
}
