#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

namespace ncfa {

using Edge = std::pair<int, int>;  // stored canonically with first < second

/// Undirected dependence graph over measurement variables 0..n-1.
/// No self-loops; each edge stored once in (min,max) order.
class UndirectedGraph {
 public:
  UndirectedGraph() = default;
  explicit UndirectedGraph(int n);
  static UndirectedGraph complete(int n);
  static UndirectedGraph from_edges(int n, const std::vector<Edge>& edges);

  int n() const { return n_; }
  long long edge_count() const { return static_cast<long long>(edges_.size()); }
  long long absent_count() const { return pair_count(n_) - edge_count(); }
  bool has_edge(int i, int j) const;
  void add_edge(int i, int j);
  const std::set<Edge>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int v) const;
  int degree(int v) const;
  bool is_clique(const std::vector<int>& vertices) const;

  bool operator==(const UndirectedGraph& o) const {
    return n_ == o.n_ && edges_ == o.edges_;
  }

  static long long pair_count(int n) {
    return static_cast<long long>(n) * (n - 1) / 2;
  }

 private:
  void check_vertex(int v) const;

  int n_ = 0;
  std::set<Edge> edges_;
  std::vector<std::vector<int>> adj_;  // sorted neighbor lists
};

/// An edge clique cover candidate: an ordered list of cliques (vertex sets).
/// Validity against a particular graph is checked by validate_cover.
struct CliqueCover {
  int n = 0;
  std::vector<std::vector<int>> cliques;  // each sorted ascending, distinct entries

  std::size_t size() const { return cliques.size(); }
};

/// Normalizes clique vertex order and checks ranges; throws on empty cliques,
/// duplicate vertices, or out-of-range indices.
CliqueCover make_cover(int n, std::vector<std::vector<int>> cliques);

/// Cover as a canonical set of vertex sets (sorted cliques in lex order,
/// duplicates removed) for comparing covers irrespective of clique order.
std::vector<std::vector<int>> canonical_cliques(const CliqueCover& cover);

/// Bipartite latent->measurement structure as a K x n 0/1 biadjacency.
/// Row i marks the children of latent i; rows must not be all zero.
struct MCMGraph {
  Eigen::MatrixXi biadjacency;

  int latent_count() const { return static_cast<int>(biadjacency.rows()); }
  int n() const { return static_cast<int>(biadjacency.cols()); }
  /// n x n Gram matrix B^T B; off-diagonal (i,j) counts shared latent parents.
  Eigen::MatrixXi gram() const;

  bool operator==(const MCMGraph& o) const {
    return biadjacency.rows() == o.biadjacency.rows() &&
           biadjacency.cols() == o.biadjacency.cols() &&
           biadjacency == o.biadjacency;
  }
};

/// MCM graph with each latent i replicated multiplicities[i] >= 1 times;
/// lambda is the total latent degrees of freedom (sum of multiplicities).
struct NCFAGraph {
  MCMGraph mcm;
  std::vector<int> multiplicities;
  long long lambda = 0;

  int n() const { return mcm.n(); }
  int clique_count() const { return mcm.latent_count(); }
  /// lambda x n matrix with row i of the MCM biadjacency repeated k_i times.
  Eigen::MatrixXi expanded_biadjacency() const;
};

/// True iff every clique induces a complete subgraph of `graph` and every
/// edge of `graph` lies in at least one clique. Minimality is not checked.
bool validate_cover(const UndirectedGraph& graph, const CliqueCover& cover);

/// Appends a singleton clique for every isolated vertex, so downstream
/// models give each measurement at least one latent parent.
CliqueCover add_singleton_cliques(const CliqueCover& cover,
                                  const UndirectedGraph& graph);

MCMGraph mcm_from_cover(const CliqueCover& cover);

/// Edge (i,j) present iff measurements i and j share a latent parent.
UndirectedGraph udg_of_mcm(const MCMGraph& mcm);

/// Two MCM graphs are observationally equivalent iff they induce the same
/// unconditional dependence graph.
bool ecc_equivalent(const MCMGraph& g1, const MCMGraph& g2);

/// Squared Frobenius norm of B1^T B1 - B2^T B2 (latent counts may differ).
long long sfd(const MCMGraph& b1, const MCMGraph& b2);

/// Number of edges present in exactly one of the two graphs.
long long shd(const UndirectedGraph& u1, const UndirectedGraph& u2);

/// Upper bound 1 - (1-alpha)^a (1-beta)^e on the probability of estimating
/// the dependence graph with at least one wrong edge.
double udg_error_bound(long long absent_edges, long long edges, double alpha,
                       double beta);

/// floor(n^2 / 4); returns 0 for n = 1 (callers clamp lambda up to K).
long long default_lambda(int n);

/// Distributes lambda latents over the K cliques: one each, then the
/// remainder round-robin from clique 0. lambda < K is clamped up to K.
NCFAGraph assign_latents(const MCMGraph& mcm, long long lambda);

}  // namespace ncfa
