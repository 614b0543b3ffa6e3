#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ncfa/graph.hpp"

namespace ncfa::indep {

enum class TestMethod { dcov, xi };

TestMethod method_from_string(const std::string& s);
std::string to_string(TestMethod method);

/// s x n data matrix, rows = observations, columns = measurement variables.
struct SampleMatrix {
  Eigen::MatrixXd data;
  std::vector<std::string> names;  // empty or one per column

  SampleMatrix() = default;
  explicit SampleMatrix(Eigen::MatrixXd d, std::vector<std::string> column_names = {});

  int s() const { return static_cast<int>(data.rows()); }
  int n() const { return static_cast<int>(data.cols()); }
};

struct PairTestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  TestMethod method = TestMethod::dcov;
  std::pair<int, int> pair{0, 0};
  bool degenerate = false;
};

struct DcovStat {
  double v2 = 0.0;          // sample distance covariance V^2_s
  double mean_dist_x = 0.0; // normalizers for the asymptotic test
  double mean_dist_y = 0.0;
  bool degenerate = false;  // a constant input vector
};

/// Sample distance covariance from double-centered pairwise distances,
/// accumulated in a canonical order so results are permutation invariant.
DcovStat distance_covariance(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Conservative asymptotic test: T = s V^2 / (mean_dx * mean_dy) compared
/// against a squared standard normal, p = 2(1 - Phi(sqrt(T))).
PairTestResult dcov_pvalue(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Chatterjee's rank coefficient, no-ties form; ties in x are broken
/// uniformly at random from the seed, ties in y take the max rank.
double xi_coefficient(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      std::uint64_t seed = 0);

/// One-sided asymptotic test from sqrt(s) xi -> N(0, 2/5) under the null.
PairTestResult xi_pvalue(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                         std::uint64_t seed);

struct UdgEstimate {
  UndirectedGraph graph;
  std::vector<PairTestResult> tests;   // all pairs (i,j), i<j, in lex order
  std::vector<int> degenerate_columns; // constant columns
};

/// Algorithm step 1: start from the complete graph and keep edge (i,j)
/// iff the pairwise test rejects independence at level alpha. The xi test
/// runs in both directions and Bonferroni-combines the smaller p-value.
UdgEstimate estimate_udg(const SampleMatrix& sample, double alpha,
                         TestMethod method, std::uint64_t seed);

}  // namespace ncfa::indep
