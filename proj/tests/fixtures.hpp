#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ncfa/graph.hpp"
#include "ncfa/rng.hpp"
#include "ncfa/synth.hpp"

namespace fixtures {

// Diamond UDG over M1..M4 (0-indexed): all pairs except M1-M4.
inline ncfa::UndirectedGraph diamond_udg() {
  return ncfa::UndirectedGraph::from_edges(
      4, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}});
}

inline ncfa::CliqueCover diamond_cover() {
  return ncfa::make_cover(4, {{0, 1, 2}, {1, 2, 3}});
}

// Latent->measurement structures of the worked distance table.
inline ncfa::MCMGraph b1() {
  Eigen::MatrixXi m(2, 4);
  m << 1, 1, 1, 0,
       0, 1, 1, 1;
  return ncfa::MCMGraph{m};
}

inline ncfa::MCMGraph b2() {
  Eigen::MatrixXi m(4, 4);
  m << 1, 1, 0, 0,
       1, 0, 1, 0,
       0, 1, 0, 1,
       0, 0, 1, 1;
  return ncfa::MCMGraph{m};
}

inline ncfa::MCMGraph b3() {
  Eigen::MatrixXi m(2, 4);
  m << 1, 1, 1, 0,
       0, 0, 1, 1;
  return ncfa::MCMGraph{m};
}

// Octahedron: K6 minus the perfect matching {0-1, 2-4, 3-5}. Admits exactly
// two minimum covers, four triangles each.
inline ncfa::UndirectedGraph octahedron() {
  ncfa::UndirectedGraph g(6);
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j) g.add_edge(i, j);
  ncfa::UndirectedGraph out(6);
  for (auto [i, j] : g.edges()) {
    const bool matched = (i == 0 && j == 1) || (i == 2 && j == 4) || (i == 3 && j == 5);
    if (!matched) out.add_edge(i, j);
  }
  return out;
}

inline std::vector<std::vector<int>> octahedron_cover_a() {
  return {{0, 2, 3}, {0, 4, 5}, {1, 2, 5}, {1, 3, 4}};
}

inline std::vector<std::vector<int>> octahedron_cover_b() {
  return {{0, 2, 5}, {0, 3, 4}, {1, 2, 3}, {1, 4, 5}};
}

// Six-vertex UDG with the unique minimum cover {{0,3},{1,4},{2,5},{3,4,5}};
// identifiable although latent 4 has no pure child.
inline ncfa::UndirectedGraph pendant_triangle_udg() {
  return ncfa::UndirectedGraph::from_edges(
      6, {{0, 3}, {1, 4}, {2, 5}, {3, 4}, {4, 5}, {3, 5}});
}

inline std::vector<std::vector<int>> pendant_triangle_cover() {
  return {{0, 3}, {1, 4}, {2, 5}, {3, 4, 5}};
}

// Diamond-UDG ground truth with fixed strong loadings (magnitudes inside
// [0.5, 2]), so every edge is comfortably detectable at s = 1000.
inline ncfa::synth::GroundTruth diamond_ground_truth() {
  ncfa::synth::GroundTruth gt;
  gt.udg = diamond_udg();
  gt.mcm = ncfa::mcm_from_cover(diamond_cover());
  Eigen::MatrixXd w(2, 4);
  w << 1.5, -1.2, 0.9, 0.0,
       0.0, 1.1, -1.4, 1.3;
  gt.weights = w;
  gt.noise_variances = Eigen::VectorXd::Ones(4);
  return gt;
}

// Bernoulli-edge random graph for property tests.
inline ncfa::UndirectedGraph random_graph(int n, double edge_prob,
                                          std::uint64_t seed) {
  ncfa::Rng rng(ncfa::derive_seed(seed, 0xF1A7ULL));
  ncfa::UndirectedGraph g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < edge_prob) g.add_edge(i, j);
  return g;
}

// Random 0/1 biadjacency with no all-zero rows.
inline ncfa::MCMGraph random_mcm(int k, int n, std::uint64_t seed) {
  ncfa::Rng rng(ncfa::derive_seed(seed, 0xB1ADULL));
  Eigen::MatrixXi b(k, n);
  for (int i = 0; i < k; ++i) {
    int row_sum = 0;
    for (int j = 0; j < n; ++j) {
      b(i, j) = rng.uniform() < 0.4 ? 1 : 0;
      row_sum += b(i, j);
    }
    if (row_sum == 0) b(i, static_cast<int>(rng.below(n))) = 1;
  }
  return ncfa::MCMGraph{b};
}

// UDG whose minimum cover has one pure child per latent: vertices 0..k-1
// are the pure children, the rest join one or more latent cliques.
inline ncfa::UndirectedGraph random_pure_child_graph(int k, int n,
                                                     std::uint64_t seed) {
  ncfa::Rng rng(ncfa::derive_seed(seed, 0x9C1DULL));
  std::vector<std::vector<int>> children(static_cast<std::size_t>(k));
  for (int l = 0; l < k; ++l) children[static_cast<std::size_t>(l)].push_back(l);
  for (int v = k; v < n; ++v) {
    bool placed = false;
    for (int l = 0; l < k; ++l)
      if (rng.uniform() < 0.5) {
        children[static_cast<std::size_t>(l)].push_back(v);
        placed = true;
      }
    if (!placed)
      children[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(k)))]
          .push_back(v);
  }
  ncfa::UndirectedGraph g(n);
  for (const auto& c : children)
    for (std::size_t a = 0; a < c.size(); ++a)
      for (std::size_t b = a + 1; b < c.size(); ++b) g.add_edge(c[a], c[b]);
  return g;
}

}  // namespace fixtures
