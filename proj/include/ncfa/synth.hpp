#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "ncfa/ecc.hpp"
#include "ncfa/graph.hpp"
#include "ncfa/indep.hpp"

namespace ncfa::synth {

/// A generating model: the UDG, its minimum-cover MCM structure, and linear
/// factor loadings whose support equals the biadjacency.
struct GroundTruth {
  UndirectedGraph udg;
  MCMGraph mcm;
  Eigen::MatrixXd weights;          // K x n, zero exactly off the biadjacency
  Eigen::VectorXd noise_variances;  // n, all ones by default
};

/// Uniform over graphs with exactly round-half-even(p * C(n,2)) edges.
UndirectedGraph sample_er_udg(int n, double p, std::uint64_t seed);

/// The realized edge count used by sample_er_udg for a given n and p.
long long er_edge_count(int n, double p);

/// Solves the ECC (exact for n within the cap), assigns singleton cliques to
/// isolated vertices, and draws loadings with magnitudes in [0.5, 2] and
/// fair-coin signs.
GroundTruth make_ground_truth(const UndirectedGraph& udg, std::uint64_t seed,
                              ecc::Mode solver_mode = ecc::Mode::automatic,
                              int cap = ecc::kDefaultExactCap);

/// M = L W + eps with L ~ N(0, I_K) and eps ~ N(0, diag(noise_variances)).
indep::SampleMatrix sample_dataset(const GroundTruth& gt, int s,
                                   std::uint64_t seed);

}  // namespace ncfa::synth
