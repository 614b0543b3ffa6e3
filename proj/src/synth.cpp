#include "ncfa/synth.hpp"

#include <cmath>
#include <stdexcept>

#include "ncfa/rng.hpp"

namespace ncfa::synth {

long long er_edge_count(int n, double p) {
  if (n < 2) throw std::invalid_argument("need at least two vertices");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("density must lie in [0, 1]");
  const double target = p * static_cast<double>(UndirectedGraph::pair_count(n));
  const double floor_part = std::floor(target);
  const double frac = target - floor_part;
  // the density grid can put the target exactly on a half edge
  // (e.g. 0.1 * 45 = 4.5); round those halves to even
  if (std::abs(frac - 0.5) < 1e-9) {
    const long long k = static_cast<long long>(floor_part);
    return (k % 2 == 0) ? k : k + 1;
  }
  return static_cast<long long>(std::llround(target));
}

UndirectedGraph sample_er_udg(int n, double p, std::uint64_t seed) {
  const long long m = er_edge_count(n, p);
  std::vector<Edge> all;
  all.reserve(static_cast<std::size_t>(UndirectedGraph::pair_count(n)));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) all.push_back({i, j});

  Rng rng(derive_seed(seed, 0x65726475ULL));
  UndirectedGraph g(n);
  for (long long k = 0; k < m; ++k) {
    const std::size_t pick =
        static_cast<std::size_t>(k) +
        static_cast<std::size_t>(rng.below(all.size() - static_cast<std::size_t>(k)));
    std::swap(all[static_cast<std::size_t>(k)], all[pick]);
    g.add_edge(all[static_cast<std::size_t>(k)].first,
               all[static_cast<std::size_t>(k)].second);
  }
  return g;
}

GroundTruth make_ground_truth(const UndirectedGraph& udg, std::uint64_t seed,
                              ecc::Mode solver_mode, int cap) {
  const ecc::Solution sol = ecc::solve(udg, solver_mode, derive_seed(seed, 1), cap);
  const CliqueCover cover = add_singleton_cliques(sol.cover, udg);
  MCMGraph mcm = mcm_from_cover(cover);

  Rng rng(derive_seed(seed, 2));
  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(mcm.latent_count(), mcm.n());
  for (int k = 0; k < mcm.latent_count(); ++k) {
    for (int i = 0; i < mcm.n(); ++i) {
      if (mcm.biadjacency(k, i) == 0) continue;
      const double magnitude = rng.uniform(0.5, 2.0);
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      weights(k, i) = sign * magnitude;
    }
  }
  return GroundTruth{udg, std::move(mcm), std::move(weights),
                     Eigen::VectorXd::Ones(udg.n())};
}

indep::SampleMatrix sample_dataset(const GroundTruth& gt, int s,
                                   std::uint64_t seed) {
  if (s < 1) throw std::invalid_argument("sample count must be positive");
  const int k = gt.mcm.latent_count();
  const int n = gt.mcm.n();
  Rng rng(derive_seed(seed, 3));
  Eigen::MatrixXd factors(s, k);
  for (int r = 0; r < s; ++r)
    for (int c = 0; c < k; ++c) factors(r, c) = rng.normal();
  Eigen::MatrixXd noise(s, n);
  const Eigen::ArrayXd sd = gt.noise_variances.array().sqrt();
  for (int r = 0; r < s; ++r)
    for (int c = 0; c < n; ++c) noise(r, c) = sd[c] * rng.normal();
  return indep::SampleMatrix(factors * gt.weights + noise);
}

}  // namespace ncfa::synth
