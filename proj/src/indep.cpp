#include "ncfa/indep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ncfa/rng.hpp"

namespace ncfa::indep {

TestMethod method_from_string(const std::string& s) {
  if (s == "dcov") return TestMethod::dcov;
  if (s == "xi") return TestMethod::xi;
  throw std::invalid_argument("unknown test method: " + s);
}

std::string to_string(TestMethod method) {
  return method == TestMethod::dcov ? "dcov" : "xi";
}

SampleMatrix::SampleMatrix(Eigen::MatrixXd d, std::vector<std::string> column_names)
    : data(std::move(d)), names(std::move(column_names)) {
  if (!data.allFinite())
    throw std::invalid_argument("sample matrix contains non-finite entries");
  if (!names.empty() && static_cast<int>(names.size()) != n())
    throw std::invalid_argument("column name count does not match data");
}

namespace {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

/// Indices ordering rows by (x, y); fixes the accumulation order so that
/// statistics are bitwise invariant under row permutation.
std::vector<int> canonical_order(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  std::vector<int> idx(static_cast<std::size_t>(x.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });
  return idx;
}

}  // namespace

DcovStat distance_covariance(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const auto s = x.size();
  if (s != y.size()) throw std::invalid_argument("vector lengths differ");
  if (s < 2) throw std::invalid_argument("need at least two observations");

  const std::vector<int> idx = canonical_order(x, y);
  std::vector<double> xs(static_cast<std::size_t>(s)), ys(static_cast<std::size_t>(s));
  for (Eigen::Index i = 0; i < s; ++i) {
    xs[static_cast<std::size_t>(i)] = x[idx[static_cast<std::size_t>(i)]];
    ys[static_cast<std::size_t>(i)] = y[idx[static_cast<std::size_t>(i)]];
  }

  // V^2 = S1 + S2 - 2 S3 over the a_kl = |x_k - x_l| distance matrices,
  // using only row sums and the elementwise product (O(s) memory)
  std::vector<double> row_a(static_cast<std::size_t>(s), 0.0);
  std::vector<double> row_b(static_cast<std::size_t>(s), 0.0);
  double s1 = 0.0;
  for (std::size_t k = 0; k < static_cast<std::size_t>(s); ++k) {
    for (std::size_t l = k + 1; l < static_cast<std::size_t>(s); ++l) {
      const double dx = std::abs(xs[k] - xs[l]);
      const double dy = std::abs(ys[k] - ys[l]);
      s1 += 2.0 * dx * dy;
      row_a[k] += dx;
      row_a[l] += dx;
      row_b[k] += dy;
      row_b[l] += dy;
    }
  }
  const double ss = static_cast<double>(s);
  double total_a = 0.0, total_b = 0.0, s3 = 0.0;
  for (std::size_t k = 0; k < static_cast<std::size_t>(s); ++k) {
    total_a += row_a[k];
    total_b += row_b[k];
    s3 += row_a[k] * row_b[k];
  }
  s1 /= ss * ss;
  s3 /= ss * ss * ss;
  const double mean_a = total_a / (ss * ss);
  const double mean_b = total_b / (ss * ss);

  DcovStat out;
  out.mean_dist_x = mean_a;
  out.mean_dist_y = mean_b;
  out.degenerate = (mean_a == 0.0 || mean_b == 0.0);
  out.v2 = out.degenerate ? 0.0 : s1 + mean_a * mean_b - 2.0 * s3;
  return out;
}

PairTestResult dcov_pvalue(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() < 10) throw std::invalid_argument("dcov test needs s >= 10");
  const DcovStat st = distance_covariance(x, y);
  PairTestResult r;
  r.method = TestMethod::dcov;
  if (st.degenerate) {
    r.statistic = 0.0;
    r.p_value = 1.0;
    r.degenerate = true;
    return r;
  }
  const double t = std::max(
      0.0, static_cast<double>(x.size()) * st.v2 / (st.mean_dist_x * st.mean_dist_y));
  r.statistic = t;
  r.p_value = std::min(1.0, 2.0 * normal_sf(std::sqrt(t)));
  return r;
}

double xi_coefficient(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      std::uint64_t seed) {
  const auto s = x.size();
  if (s != y.size()) throw std::invalid_argument("vector lengths differ");
  if (s < 2) throw std::invalid_argument("need at least two observations");

  std::vector<int> idx = canonical_order(x, y);
  // break x-ties by a seeded shuffle within each run of equal x
  Rng rng(derive_seed(seed, 0x78695453ULL));
  std::size_t run = 0;
  while (run < idx.size()) {
    std::size_t end = run + 1;
    while (end < idx.size() && x[idx[end]] == x[idx[run]]) ++end;
    if (end - run > 1) {
      for (std::size_t i = end - run; i > 1; --i)
        std::swap(idx[run + i - 1], idx[run + rng.below(i)]);
    }
    run = end;
  }

  // max-rank convention for y ties: r_i = #{j : y_j <= y_i}
  std::vector<double> sorted_y(static_cast<std::size_t>(s));
  for (Eigen::Index i = 0; i < s; ++i) sorted_y[static_cast<std::size_t>(i)] = y[i];
  std::sort(sorted_y.begin(), sorted_y.end());
  auto rank_of = [&](double v) {
    return static_cast<double>(
        std::upper_bound(sorted_y.begin(), sorted_y.end(), v) - sorted_y.begin());
  };

  double jumps = 0.0;
  double prev = rank_of(y[idx[0]]);
  for (std::size_t i = 1; i < idx.size(); ++i) {
    const double cur = rank_of(y[idx[i]]);
    jumps += std::abs(cur - prev);
    prev = cur;
  }
  const double ss = static_cast<double>(s);
  return 1.0 - 3.0 * jumps / (ss * ss - 1.0);
}

PairTestResult xi_pvalue(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                         std::uint64_t seed) {
  if (x.size() < 20) throw std::invalid_argument("xi test needs s >= 20");
  const double xi = xi_coefficient(x, y, seed);
  PairTestResult r;
  r.method = TestMethod::xi;
  r.statistic = xi;
  const double z = std::sqrt(static_cast<double>(x.size())) * xi / std::sqrt(0.4);
  r.p_value = std::min(1.0, std::max(0.0, normal_sf(z)));
  return r;
}

UdgEstimate estimate_udg(const SampleMatrix& sample, double alpha,
                         TestMethod method, std::uint64_t seed) {
  if (sample.s() < 20)
    throw std::invalid_argument("UDG estimation needs s >= 20");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must lie in (0, 1)");

  UdgEstimate out{UndirectedGraph(sample.n()), {}, {}};
  for (int c = 0; c < sample.n(); ++c) {
    const Eigen::VectorXd col = sample.data.col(c);
    if (col.maxCoeff() == col.minCoeff()) out.degenerate_columns.push_back(c);
  }

  long long pair_index = 0;
  for (int i = 0; i < sample.n(); ++i) {
    for (int j = i + 1; j < sample.n(); ++j, ++pair_index) {
      const Eigen::VectorXd xi_col = sample.data.col(i);
      const Eigen::VectorXd xj_col = sample.data.col(j);
      PairTestResult r;
      if (method == TestMethod::dcov) {
        r = dcov_pvalue(xi_col, xj_col);
      } else {
        const std::uint64_t pair_seed =
            derive_seed(seed, static_cast<std::uint64_t>(pair_index));
        // the xi statistic is directional; test both orders and combine
        // with a Bonferroni factor of two
        const PairTestResult fwd = xi_pvalue(xi_col, xj_col, derive_seed(pair_seed, 0));
        const PairTestResult rev = xi_pvalue(xj_col, xi_col, derive_seed(pair_seed, 1));
        r = fwd.p_value <= rev.p_value ? fwd : rev;
        r.p_value = std::min(1.0, 2.0 * r.p_value);
      }
      r.pair = {i, j};
      if (r.p_value < alpha) out.graph.add_edge(i, j);
      out.tests.push_back(r);
    }
  }
  return out;
}

}  // namespace ncfa::indep
