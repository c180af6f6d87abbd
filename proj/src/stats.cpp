#include "mrsi/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mrsi/errors.hpp"

namespace mrsi::stats {

namespace {

// Lentz's method for the continued fraction of I_x(a, b).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge");
}

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_var(std::span<const double> v, double m) {
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw UndefinedCorrelationError("constant input vector");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw InvalidArgument("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("incomplete beta needs x in [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double lbt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                     b * std::log1p(-x);
  const double bt = std::exp(lbt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cf(a, b, x) / a;
  return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_sf(double t, double df) {
  if (!(df > 0.0)) throw InvalidArgument("degrees of freedom must be positive");
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  const double x = df / (df + t * t);
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x);  // P(|T| > |t|) / 2
  return t >= 0.0 ? tail : 1.0 - tail;
}

TTestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw InvalidArgument("each sample needs at least 2 values");
  const double ma = mean(a), mb = mean(b);
  const double va = sample_var(a, ma) / static_cast<double>(a.size());
  const double vb = sample_var(b, mb) / static_cast<double>(b.size());
  if (!(va + vb > 0.0)) throw DegenerateSampleError("both samples have zero variance");
  TTestResult r;
  r.t = (ma - mb) / std::sqrt(va + vb);
  r.df = (va + vb) * (va + vb) /
         (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  r.p = std::clamp(2.0 * student_t_sf(std::abs(r.t), r.df), 0.0, 1.0);
  return r;
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

SpearmanResult spearman(std::span<const double> x, std::span<const double> y, SpearmanP method) {
  if (x.size() != y.size()) throw InvalidArgument("spearman inputs differ in length");
  if (x.size() < 3) throw InvalidArgument("spearman needs at least 3 pairs");
  if (is_constant(x) || is_constant(y)) throw UndefinedCorrelationError("constant input vector");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  SpearmanResult r;
  r.rho = pearson(rx, ry);
  const std::size_t n = x.size();

  if (method == SpearmanP::ExactPermutation) {
    if (n > 10) throw InvalidArgument("exact permutation p-value is limited to n <= 10");
    std::vector<double> perm = ry;
    std::sort(perm.begin(), perm.end());
    std::size_t hits = 0, total = 0;
    const double obs = std::abs(r.rho) - 1e-12;
    do {
      ++total;
      double rho = 0.0;
      try {
        rho = pearson(rx, perm);
      } catch (const UndefinedCorrelationError&) {
      }
      if (std::abs(rho) >= obs) ++hits;
    } while (std::next_permutation(perm.begin(), perm.end()));
    // next_permutation visits each distinct arrangement once; ties collapse
    // equivalent arrangements, which carry equal weight
    r.p = static_cast<double>(hits) / static_cast<double>(total);
    return r;
  }

  if (std::abs(r.rho) >= 1.0) {
    r.p = 0.0;
    return r;
  }
  const double df = static_cast<double>(n - 2);
  const double t = r.rho * std::sqrt(df / (1.0 - r.rho * r.rho));
  r.p = std::clamp(2.0 * student_t_sf(std::abs(t), df), 0.0, 1.0);
  return r;
}

LinReg linreg(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("linreg inputs differ in length");
  if (x.size() < 2) throw InvalidArgument("linreg needs at least 2 points");
  if (is_constant(x)) throw UndefinedCorrelationError("constant x: slope undefined");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinReg r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  if (syy > 0.0) {
    double ssres = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = y[i] - (r.intercept + r.slope * x[i]);
      ssres += e * e;
    }
    r.r2 = 1.0 - ssres / syy;
  } else {
    r.r2 = 0.0;
  }
  return r;
}

CorrMatrix correlation_matrix(const std::vector<std::string>& names,
                              const std::vector<std::vector<double>>& columns, double alpha) {
  if (columns.size() < 2) throw InvalidArgument("correlation matrix needs at least 2 columns");
  if (names.size() != columns.size()) throw InvalidArgument("one name per column required");
  for (const auto& c : columns) {
    if (c.size() != columns.front().size()) throw InvalidArgument("columns differ in length");
  }
  const std::size_t m = columns.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CorrMatrix cm;
  cm.names = names;
  cm.rho.assign(m, std::vector<double>(m, nan));
  cm.p.assign(m, std::vector<double>(m, nan));
  cm.significant.assign(m, std::vector<bool>(m, false));
  cm.defined.assign(m, std::vector<bool>(m, false));
  cm.n.assign(m, std::vector<std::size_t>(m, 0));

  for (std::size_t i = 0; i < m; ++i) {
    cm.rho[i][i] = 1.0;
    cm.p[i][i] = 0.0;
    cm.defined[i][i] = true;
    cm.n[i][i] = static_cast<std::size_t>(std::count_if(
        columns[i].begin(), columns[i].end(), [](double v) { return !std::isnan(v); }));
    for (std::size_t j = i + 1; j < m; ++j) {
      std::vector<double> x, y;
      for (std::size_t k = 0; k < columns[i].size(); ++k) {
        if (std::isnan(columns[i][k]) || std::isnan(columns[j][k])) continue;
        x.push_back(columns[i][k]);
        y.push_back(columns[j][k]);
      }
      cm.n[i][j] = cm.n[j][i] = x.size();
      if (x.size() < 3 || is_constant(x) || is_constant(y)) continue;
      const auto s = spearman(x, y);
      cm.rho[i][j] = cm.rho[j][i] = s.rho;
      cm.p[i][j] = cm.p[j][i] = s.p;
      cm.defined[i][j] = cm.defined[j][i] = true;
      cm.significant[i][j] = cm.significant[j][i] = s.p < alpha;
    }
  }
  return cm;
}

}  // namespace mrsi::stats
