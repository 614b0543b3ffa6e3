#include "ncfa/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ncfa {

UndirectedGraph::UndirectedGraph(int n) : n_(n), adj_(static_cast<std::size_t>(std::max(n, 0))) {
  if (n < 0) throw std::invalid_argument("vertex count must be nonnegative");
}

UndirectedGraph UndirectedGraph::complete(int n) {
  UndirectedGraph g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.add_edge(i, j);
  return g;
}

UndirectedGraph UndirectedGraph::from_edges(int n, const std::vector<Edge>& edges) {
  UndirectedGraph g(n);
  for (const auto& [i, j] : edges) g.add_edge(i, j);
  return g;
}

void UndirectedGraph::check_vertex(int v) const {
  if (v < 0 || v >= n_) throw std::invalid_argument("vertex index out of range");
}

bool UndirectedGraph::has_edge(int i, int j) const {
  check_vertex(i);
  check_vertex(j);
  if (i == j) return false;
  const auto& nb = adj_[static_cast<std::size_t>(i)];
  return std::binary_search(nb.begin(), nb.end(), j);
}

void UndirectedGraph::add_edge(int i, int j) {
  check_vertex(i);
  check_vertex(j);
  if (i == j) throw std::invalid_argument("self-loops are not allowed");
  if (i > j) std::swap(i, j);
  if (!edges_.insert({i, j}).second) return;
  auto& ni = adj_[static_cast<std::size_t>(i)];
  ni.insert(std::lower_bound(ni.begin(), ni.end(), j), j);
  auto& nj = adj_[static_cast<std::size_t>(j)];
  nj.insert(std::lower_bound(nj.begin(), nj.end(), i), i);
}

const std::vector<int>& UndirectedGraph::neighbors(int v) const {
  check_vertex(v);
  return adj_[static_cast<std::size_t>(v)];
}

int UndirectedGraph::degree(int v) const {
  return static_cast<int>(neighbors(v).size());
}

bool UndirectedGraph::is_clique(const std::vector<int>& vertices) const {
  for (std::size_t a = 0; a < vertices.size(); ++a)
    for (std::size_t b = a + 1; b < vertices.size(); ++b)
      if (!has_edge(vertices[a], vertices[b])) return false;
  return true;
}

CliqueCover make_cover(int n, std::vector<std::vector<int>> cliques) {
  for (auto& c : cliques) {
    if (c.empty()) throw std::invalid_argument("empty clique in cover");
    std::sort(c.begin(), c.end());
    if (std::adjacent_find(c.begin(), c.end()) != c.end())
      throw std::invalid_argument("duplicate vertex in clique");
    if (c.front() < 0 || c.back() >= n)
      throw std::invalid_argument("clique vertex out of range");
  }
  return CliqueCover{n, std::move(cliques)};
}

std::vector<std::vector<int>> canonical_cliques(const CliqueCover& cover) {
  std::vector<std::vector<int>> cs = cover.cliques;
  for (auto& c : cs) std::sort(c.begin(), c.end());
  std::sort(cs.begin(), cs.end());
  cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
  return cs;
}

Eigen::MatrixXi MCMGraph::gram() const {
  return biadjacency.transpose() * biadjacency;
}

Eigen::MatrixXi NCFAGraph::expanded_biadjacency() const {
  const int cols = mcm.n();
  Eigen::MatrixXi out(lambda, cols);
  long long row = 0;
  for (int i = 0; i < mcm.latent_count(); ++i)
    for (int r = 0; r < multiplicities[static_cast<std::size_t>(i)]; ++r)
      out.row(row++) = mcm.biadjacency.row(i);
  return out;
}

bool validate_cover(const UndirectedGraph& graph, const CliqueCover& cover) {
  if (cover.n != graph.n())
    throw std::invalid_argument("cover and graph vertex counts differ");
  std::set<Edge> covered;
  for (const auto& c : cover.cliques) {
    if (c.empty()) throw std::invalid_argument("empty clique in cover");
    for (int v : c)
      if (v < 0 || v >= graph.n())
        throw std::invalid_argument("clique vertex out of range");
    for (std::size_t a = 0; a < c.size(); ++a)
      for (std::size_t b = a + 1; b < c.size(); ++b) {
        int i = c[a], j = c[b];
        if (i > j) std::swap(i, j);
        if (i == j || !graph.has_edge(i, j)) return false;
        covered.insert({i, j});
      }
  }
  return covered.size() == graph.edges().size();
}

CliqueCover add_singleton_cliques(const CliqueCover& cover,
                                  const UndirectedGraph& graph) {
  if (cover.n != graph.n())
    throw std::invalid_argument("cover and graph vertex counts differ");
  CliqueCover out = cover;
  for (int v = 0; v < graph.n(); ++v)
    if (graph.degree(v) == 0) out.cliques.push_back({v});
  return out;
}

MCMGraph mcm_from_cover(const CliqueCover& cover) {
  if (cover.cliques.empty())
    throw std::invalid_argument("cover has no cliques");
  Eigen::MatrixXi b = Eigen::MatrixXi::Zero(
      static_cast<Eigen::Index>(cover.cliques.size()), cover.n);
  for (std::size_t i = 0; i < cover.cliques.size(); ++i) {
    const auto& c = cover.cliques[i];
    if (c.empty()) throw std::invalid_argument("empty clique in cover");
    for (int v : c) {
      if (v < 0 || v >= cover.n)
        throw std::invalid_argument("clique vertex out of range");
      b(static_cast<Eigen::Index>(i), v) = 1;
    }
  }
  return MCMGraph{std::move(b)};
}

UndirectedGraph udg_of_mcm(const MCMGraph& mcm) {
  UndirectedGraph g(mcm.n());
  const Eigen::MatrixXi gram = mcm.gram();
  for (int i = 0; i < mcm.n(); ++i)
    for (int j = i + 1; j < mcm.n(); ++j)
      if (gram(i, j) > 0) g.add_edge(i, j);
  return g;
}

bool ecc_equivalent(const MCMGraph& g1, const MCMGraph& g2) {
  if (g1.n() != g2.n())
    throw std::invalid_argument("measurement counts differ");
  return udg_of_mcm(g1) == udg_of_mcm(g2);
}

long long sfd(const MCMGraph& b1, const MCMGraph& b2) {
  if (b1.n() != b2.n())
    throw std::invalid_argument("measurement counts differ");
  const Eigen::MatrixXi d = b1.gram() - b2.gram();
  long long total = 0;
  for (int i = 0; i < d.rows(); ++i)
    for (int j = 0; j < d.cols(); ++j)
      total += static_cast<long long>(d(i, j)) * d(i, j);
  return total;
}

long long shd(const UndirectedGraph& u1, const UndirectedGraph& u2) {
  if (u1.n() != u2.n())
    throw std::invalid_argument("vertex counts differ");
  long long count = 0;
  for (const auto& e : u1.edges())
    if (!u2.edges().count(e)) ++count;
  for (const auto& e : u2.edges())
    if (!u1.edges().count(e)) ++count;
  return count;
}

double udg_error_bound(long long absent_edges, long long edges, double alpha,
                       double beta) {
  if (absent_edges < 0 || edges < 0)
    throw std::invalid_argument("edge counts must be nonnegative");
  if (!(alpha >= 0.0 && alpha <= 1.0) || !(beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("error rates must lie in [0, 1]");
  const double la =
      absent_edges == 0 ? 0.0 : static_cast<double>(absent_edges) * std::log1p(-alpha);
  const double le = edges == 0 ? 0.0 : static_cast<double>(edges) * std::log1p(-beta);
  const double correct = std::exp(la + le);
  return std::min(1.0, std::max(0.0, 1.0 - correct));
}

long long default_lambda(int n) {
  if (n < 1) throw std::invalid_argument("vertex count must be positive");
  return static_cast<long long>(n) * n / 4;
}

NCFAGraph assign_latents(const MCMGraph& mcm, long long lambda) {
  const int k = mcm.latent_count();
  if (k < 1) throw std::invalid_argument("MCM graph has no latents");
  for (int i = 0; i < k; ++i)
    if (mcm.biadjacency.row(i).sum() == 0)
      throw std::invalid_argument("MCM graph has an all-zero latent row");
  const long long used = std::max(lambda, static_cast<long long>(k));
  const long long extra = used - k;
  const long long base = extra / k;
  const long long rem = extra % k;
  std::vector<int> mult(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    mult[static_cast<std::size_t>(i)] =
        static_cast<int>(1 + base + (i < rem ? 1 : 0));
  return NCFAGraph{mcm, std::move(mult), used};
}

}  // namespace ncfa
