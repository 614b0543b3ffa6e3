#include "ncfa/ecc.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <set>

#include "ncfa/rng.hpp"

namespace ncfa::ecc {

Mode mode_from_string(const std::string& s) {
  if (s == "auto" || s == "automatic") return Mode::automatic;
  if (s == "exact") return Mode::exact;
  if (s == "heuristic") return Mode::heuristic;
  if (s == "pure-child" || s == "pure_child") return Mode::pure_child;
  throw std::invalid_argument("unknown solver mode: " + s);
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::automatic: return "auto";
    case Mode::exact: return "exact";
    case Mode::heuristic: return "heuristic";
    case Mode::pure_child: return "pure-child";
  }
  return "auto";
}

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::exact: return "exact";
    case SolverKind::heuristic: return "heuristic";
    case SolverKind::pure_child: return "pure-child";
  }
  return "exact";
}

namespace {

using Mask = std::uint64_t;

struct BitGraph {
  int n = 0;
  std::vector<Mask> adj;        // open neighborhoods
  std::vector<Edge> edge_list;  // lex order
  std::vector<Mask> edge_mask;

  bool is_clique(Mask mask) const {
    while (mask) {
      const int v = std::countr_zero(mask);
      mask &= mask - 1;
      if ((mask & ~adj[static_cast<std::size_t>(v)]) != 0) return false;
    }
    return true;
  }
};

BitGraph to_bits(const UndirectedGraph& g) {
  BitGraph bg;
  bg.n = g.n();
  bg.adj.assign(static_cast<std::size_t>(g.n()), 0);
  for (const auto& [i, j] : g.edges()) {
    bg.adj[static_cast<std::size_t>(i)] |= Mask{1} << j;
    bg.adj[static_cast<std::size_t>(j)] |= Mask{1} << i;
    bg.edge_list.push_back({i, j});
    bg.edge_mask.push_back((Mask{1} << i) | (Mask{1} << j));
  }
  return bg;
}

void bron_kerbosch(const BitGraph& g, Mask r, Mask p, Mask x,
                   std::vector<Mask>& out) {
  if (p == 0 && x == 0) {
    out.push_back(r);
    return;
  }
  Mask px = p | x;
  int pivot = -1, best = -1;
  while (px) {
    const int v = std::countr_zero(px);
    px &= px - 1;
    const int c = std::popcount(p & g.adj[static_cast<std::size_t>(v)]);
    if (c > best) {
      best = c;
      pivot = v;
    }
  }
  Mask cand = p & ~g.adj[static_cast<std::size_t>(pivot)];
  while (cand) {
    const int v = std::countr_zero(cand);
    cand &= cand - 1;
    const Mask vb = Mask{1} << v;
    bron_kerbosch(g, r | vb, p & g.adj[static_cast<std::size_t>(v)],
                  x & g.adj[static_cast<std::size_t>(v)], out);
    p &= ~vb;
    x |= vb;
  }
}

std::vector<int> mask_to_clique(Mask m) {
  std::vector<int> c;
  while (m) {
    c.push_back(std::countr_zero(m));
    m &= m - 1;
  }
  return c;
}

CliqueCover masks_to_cover(int n, const std::vector<Mask>& masks) {
  std::vector<std::vector<int>> cliques;
  cliques.reserve(masks.size());
  for (Mask m : masks) cliques.push_back(mask_to_clique(m));
  return make_cover(n, std::move(cliques));
}

/// Greedy set of pairwise "independent" uncovered edges: no single clique
/// can cover two of them, so the set size bounds the cliques still needed.
int uncovered_lower_bound(const BitGraph& g, const std::vector<char>& covered) {
  std::vector<Mask> chosen;
  for (std::size_t e = 0; e < g.edge_list.size(); ++e) {
    if (covered[e]) continue;
    bool independent = true;
    for (Mask cm : chosen) {
      if (g.is_clique(cm | g.edge_mask[e])) {
        independent = false;
        break;
      }
    }
    if (independent) chosen.push_back(g.edge_mask[e]);
  }
  return static_cast<int>(chosen.size());
}

struct MinSearch {
  const BitGraph& g;
  const std::vector<Mask>& maximal;
  const std::vector<std::vector<int>>& cliques_of_edge;
  std::vector<char> covered;
  std::vector<int> cover_count;  // how many chosen cliques cover each edge
  int uncovered = 0;
  std::vector<Mask> stack;
  std::vector<Mask> best;
  long long nodes = 0;

  int pick_edge() const {
    int pick = -1;
    std::size_t fewest = SIZE_MAX;
    for (std::size_t e = 0; e < g.edge_list.size(); ++e) {
      if (covered[e]) continue;
      if (cliques_of_edge[e].size() < fewest) {
        fewest = cliques_of_edge[e].size();
        pick = static_cast<int>(e);
      }
    }
    return pick;
  }

  void apply(Mask q, std::vector<int>& touched) {
    for (std::size_t e = 0; e < g.edge_list.size(); ++e) {
      if ((q & g.edge_mask[e]) == g.edge_mask[e]) {
        touched.push_back(static_cast<int>(e));
        if (cover_count[e]++ == 0) {
          covered[e] = 1;
          --uncovered;
        }
      }
    }
  }

  void revert(const std::vector<int>& touched) {
    for (int e : touched) {
      if (--cover_count[static_cast<std::size_t>(e)] == 0) {
        covered[static_cast<std::size_t>(e)] = 0;
        ++uncovered;
      }
    }
  }

  void dfs() {
    ++nodes;
    if (uncovered == 0) {
      if (stack.size() < best.size()) best = stack;
      return;
    }
    const int lb = uncovered_lower_bound(g, covered);
    if (stack.size() + static_cast<std::size_t>(lb) >= best.size()) return;
    const int e = pick_edge();
    for (int qi : cliques_of_edge[static_cast<std::size_t>(e)]) {
      std::vector<int> touched;
      stack.push_back(maximal[static_cast<std::size_t>(qi)]);
      apply(maximal[static_cast<std::size_t>(qi)], touched);
      dfs();
      revert(touched);
      stack.pop_back();
    }
  }
};

struct EnumSearch {
  const BitGraph& g;
  std::size_t kstar;
  std::vector<char> covered;
  std::vector<int> cover_count;
  int uncovered = 0;
  std::vector<Mask> stack;
  std::set<std::vector<Mask>> found;
  long long nodes = 0;

  /// Every clique containing both endpoints of edge e: the edge itself plus
  /// any clique-inducing subset of the common neighborhood.
  void cliques_with_edge(int e, std::vector<Mask>& out) const {
    const auto [u, v] = g.edge_list[static_cast<std::size_t>(e)];
    const Mask base = g.edge_mask[static_cast<std::size_t>(e)];
    grow(base, g.adj[static_cast<std::size_t>(u)] & g.adj[static_cast<std::size_t>(v)], out);
  }

  void grow(Mask cur, Mask cand, std::vector<Mask>& out) const {
    out.push_back(cur);
    while (cand) {
      const int w = std::countr_zero(cand);
      cand &= cand - 1;
      grow(cur | (Mask{1} << w), cand & g.adj[static_cast<std::size_t>(w)], out);
    }
  }

  int pick_edge() const {
    int pick = -1;
    std::size_t fewest = SIZE_MAX;
    for (std::size_t e = 0; e < g.edge_list.size(); ++e) {
      if (covered[e]) continue;
      const auto [u, v] = g.edge_list[e];
      const std::size_t width = static_cast<std::size_t>(std::popcount(
          g.adj[static_cast<std::size_t>(u)] & g.adj[static_cast<std::size_t>(v)]));
      if (width < fewest) {
        fewest = width;
        pick = static_cast<int>(e);
      }
    }
    return pick;
  }

  void apply(Mask q, std::vector<int>& touched) {
    for (std::size_t e = 0; e < g.edge_list.size(); ++e) {
      if ((q & g.edge_mask[e]) == g.edge_mask[e]) {
        touched.push_back(static_cast<int>(e));
        if (cover_count[e]++ == 0) {
          covered[e] = 1;
          --uncovered;
        }
      }
    }
  }

  void revert(const std::vector<int>& touched) {
    for (int e : touched) {
      if (--cover_count[static_cast<std::size_t>(e)] == 0) {
        covered[static_cast<std::size_t>(e)] = 0;
        ++uncovered;
      }
    }
  }

  void dfs() {
    ++nodes;
    if (uncovered == 0) {
      std::vector<Mask> cover = stack;
      std::sort(cover.begin(), cover.end());
      found.insert(std::move(cover));
      return;
    }
    const int lb = uncovered_lower_bound(g, covered);
    if (stack.size() + static_cast<std::size_t>(lb) > kstar) return;
    const int e = pick_edge();
    std::vector<Mask> branches;
    cliques_with_edge(e, branches);
    for (Mask q : branches) {
      std::vector<int> touched;
      stack.push_back(q);
      apply(q, touched);
      dfs();
      revert(touched);
      stack.pop_back();
    }
  }
};

}  // namespace

Solution exact_min_ecc(const UndirectedGraph& graph, bool enumerate_all, int cap,
                       std::vector<CliqueCover>* all_minimum) {
  if (cap > 62) cap = 62;  // clique bitmask width
  if (graph.n() > cap)
    throw SolverRefused("graph has " + std::to_string(graph.n()) +
                        " vertices, above the exact-solver cap of " +
                        std::to_string(cap) + "; use the heuristic solver");

  Solution sol;
  sol.solver = SolverKind::exact;
  sol.is_certified_minimum = true;

  if (graph.edge_count() == 0) {
    sol.cover = CliqueCover{graph.n(), {}};
    if (enumerate_all) {
      sol.minimum_covers_found = 1;
      if (all_minimum) *all_minimum = {sol.cover};
    }
    return sol;
  }

  const BitGraph bg = to_bits(graph);

  std::vector<Mask> maximal;
  Mask full = graph.n() >= 64 ? ~Mask{0} : (Mask{1} << graph.n()) - 1;
  bron_kerbosch(bg, 0, full, 0, maximal);
  std::sort(maximal.begin(), maximal.end());

  std::vector<std::vector<int>> cliques_of_edge(bg.edge_list.size());
  for (std::size_t e = 0; e < bg.edge_list.size(); ++e)
    for (std::size_t q = 0; q < maximal.size(); ++q)
      if ((maximal[q] & bg.edge_mask[e]) == bg.edge_mask[e])
        cliques_of_edge[e].push_back(static_cast<int>(q));

  // incumbent from the greedy heuristic
  const Solution incumbent = heuristic_ecc(graph, 0);
  std::vector<Mask> incumbent_masks;
  for (const auto& c : incumbent.cover.cliques) {
    Mask m = 0;
    for (int v : c) m |= Mask{1} << v;
    incumbent_masks.push_back(m);
  }

  MinSearch search{bg, maximal, cliques_of_edge,
                   std::vector<char>(bg.edge_list.size(), 0),
                   std::vector<int>(bg.edge_list.size(), 0),
                   static_cast<int>(bg.edge_list.size())};
  search.best = incumbent_masks;
  search.dfs();
  sol.nodes_expanded = search.nodes;
  sol.cover = masks_to_cover(graph.n(), search.best);

  if (enumerate_all) {
    EnumSearch en{bg, search.best.size(),
                  std::vector<char>(bg.edge_list.size(), 0),
                  std::vector<int>(bg.edge_list.size(), 0),
                  static_cast<int>(bg.edge_list.size())};
    en.dfs();
    sol.nodes_expanded += en.nodes;
    sol.minimum_covers_found = static_cast<long long>(en.found.size());
    if (all_minimum) {
      all_minimum->clear();
      for (const auto& masks : en.found)
        all_minimum->push_back(masks_to_cover(graph.n(), masks));
    }
  }
  return sol;
}

Solution heuristic_ecc(const UndirectedGraph& graph, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x68657572ULL));
  std::vector<Edge> edges(graph.edges().begin(), graph.edges().end());
  std::map<Edge, std::size_t> index;
  for (std::size_t e = 0; e < edges.size(); ++e) index[edges[e]] = e;
  std::vector<char> covered(edges.size(), 0);
  std::size_t remaining = edges.size();

  auto edge_id = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    return index.at({a, b});
  };

  std::vector<std::vector<int>> cliques;
  while (remaining > 0) {
    // seed edge: uncovered, maximal degree sum
    int best_score = -1;
    std::vector<std::size_t> ties;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (covered[e]) continue;
      const int score = graph.degree(edges[e].first) + graph.degree(edges[e].second);
      if (score > best_score) {
        best_score = score;
        ties.clear();
      }
      if (score == best_score) ties.push_back(e);
    }
    const Edge start = edges[ties[ties.size() == 1 ? 0 : rng.below(ties.size())]];

    std::vector<int> clique = {start.first, start.second};
    std::vector<int> cand;
    std::set_intersection(graph.neighbors(start.first).begin(),
                          graph.neighbors(start.first).end(),
                          graph.neighbors(start.second).begin(),
                          graph.neighbors(start.second).end(),
                          std::back_inserter(cand));
    while (!cand.empty()) {
      // extend with the candidate covering the most uncovered edges into
      // the clique so far; break ties by degree, then by seeded draw
      int best_new = -1, best_deg = -1;
      std::vector<std::size_t> ctie;
      for (std::size_t ci = 0; ci < cand.size(); ++ci) {
        int fresh = 0;
        for (int u : clique)
          if (!covered[edge_id(cand[ci], u)]) ++fresh;
        const int deg = graph.degree(cand[ci]);
        if (fresh > best_new || (fresh == best_new && deg > best_deg)) {
          best_new = fresh;
          best_deg = deg;
          ctie.clear();
        }
        if (fresh == best_new && deg == best_deg) ctie.push_back(ci);
      }
      const int w = cand[ctie[ctie.size() == 1 ? 0 : rng.below(ctie.size())]];
      clique.push_back(w);
      std::vector<int> next;
      std::set_intersection(cand.begin(), cand.end(), graph.neighbors(w).begin(),
                            graph.neighbors(w).end(), std::back_inserter(next));
      next.erase(std::remove(next.begin(), next.end(), w), next.end());
      cand = std::move(next);
    }
    std::sort(clique.begin(), clique.end());
    for (std::size_t a = 0; a < clique.size(); ++a)
      for (std::size_t b = a + 1; b < clique.size(); ++b) {
        const std::size_t e = edge_id(clique[a], clique[b]);
        if (!covered[e]) {
          covered[e] = 1;
          --remaining;
        }
      }
    cliques.push_back(std::move(clique));
  }

  // merge pass: drop cliques whose edges are all covered elsewhere
  std::vector<int> count(edges.size(), 0);
  for (const auto& c : cliques)
    for (std::size_t a = 0; a < c.size(); ++a)
      for (std::size_t b = a + 1; b < c.size(); ++b)
        ++count[edge_id(c[a], c[b])];
  std::vector<std::vector<int>> kept;
  for (const auto& c : cliques) {
    bool redundant = true;
    for (std::size_t a = 0; a < c.size() && redundant; ++a)
      for (std::size_t b = a + 1; b < c.size(); ++b)
        if (count[edge_id(c[a], c[b])] < 2) {
          redundant = false;
          break;
        }
    if (redundant) {
      for (std::size_t a = 0; a < c.size(); ++a)
        for (std::size_t b = a + 1; b < c.size(); ++b)
          --count[edge_id(c[a], c[b])];
    } else {
      kept.push_back(c);
    }
  }

  Solution sol;
  sol.solver = SolverKind::heuristic;
  sol.cover = make_cover(graph.n(), std::move(kept));
  return sol;
}

std::optional<Solution> pure_child_ecc(const UndirectedGraph& graph) {
  // one representative per distinct closed neighborhood of a simplicial vertex
  std::map<std::vector<int>, int> groups;
  for (int v = 0; v < graph.n(); ++v) {
    if (graph.degree(v) == 0) continue;
    if (!graph.is_clique(graph.neighbors(v))) continue;
    std::vector<int> closed = graph.neighbors(v);
    closed.insert(std::lower_bound(closed.begin(), closed.end(), v), v);
    groups.try_emplace(std::move(closed), v);
  }
  std::vector<std::pair<int, std::vector<int>>> reps;
  for (const auto& [closed, v] : groups) reps.push_back({v, closed});
  std::sort(reps.begin(), reps.end());

  // greedy maximal independent subset of representatives
  std::vector<int> selected;
  std::vector<std::vector<int>> cliques;
  for (const auto& [v, closed] : reps) {
    bool independent = true;
    for (int u : selected)
      if (graph.has_edge(u, v)) {
        independent = false;
        break;
      }
    if (independent) {
      selected.push_back(v);
      cliques.push_back(closed);
    }
  }

  std::set<Edge> covered;
  for (const auto& c : cliques)
    for (std::size_t a = 0; a < c.size(); ++a)
      for (std::size_t b = a + 1; b < c.size(); ++b)
        covered.insert({c[a], c[b]});
  if (static_cast<long long>(covered.size()) != graph.edge_count())
    return std::nullopt;

  Solution sol;
  sol.solver = SolverKind::pure_child;
  // size equals the number of pairwise nonadjacent simplicial vertices,
  // which lower-bounds every cover, so minimality is certified
  sol.is_certified_minimum = true;
  sol.cover = make_cover(graph.n(), std::move(cliques));
  return sol;
}

Solution solve(const UndirectedGraph& graph, Mode mode, std::uint64_t seed,
               int cap) {
  switch (mode) {
    case Mode::exact:
      return exact_min_ecc(graph, false, cap);
    case Mode::heuristic:
      return heuristic_ecc(graph, seed);
    case Mode::automatic:
      return graph.n() <= cap ? exact_min_ecc(graph, false, cap)
                              : heuristic_ecc(graph, seed);
    case Mode::pure_child: {
      if (auto sol = pure_child_ecc(graph)) return *sol;
      Solution sol = graph.n() <= cap ? exact_min_ecc(graph, false, cap)
                                      : heuristic_ecc(graph, seed);
      sol.fallback = "pure-child precondition violated; fell back to " +
                     to_string(sol.solver);
      return sol;
    }
  }
  throw std::invalid_argument("unknown solver mode");
}

}  // namespace ncfa::ecc
