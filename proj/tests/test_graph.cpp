#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "ncfa/ecc.hpp"
#include "ncfa/graph.hpp"
#include "ncfa/io.hpp"
#include "ncfa/rng.hpp"

using namespace ncfa;

TEST_SUITE_BEGIN("graph");

TEST_CASE("validate_cover on the diamond UDG") {
  const UndirectedGraph u = fixtures::diamond_udg();
  CHECK(validate_cover(u, fixtures::diamond_cover()));
  CHECK_FALSE(validate_cover(u, make_cover(4, {{0, 1, 2}})));  // 1-3 uncovered
  CHECK_FALSE(validate_cover(u, make_cover(4, {{0, 1, 3}, {1, 2, 3}})));  // 0-3 not an edge
  CHECK_THROWS_AS(validate_cover(u, make_cover(5, {{0, 1}})), std::invalid_argument);
}

TEST_CASE("every edge as a 2-clique is always a valid cover") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const UndirectedGraph g = fixtures::random_graph(8, 0.4, seed);
    std::vector<std::vector<int>> cliques;
    for (auto [i, j] : g.edges()) cliques.push_back({i, j});
    if (cliques.empty()) continue;
    CHECK(validate_cover(g, make_cover(8, cliques)));
  }
}

TEST_CASE("mcm_from_cover") {
  SUBCASE("diamond cover gives the worked biadjacency") {
    CHECK(mcm_from_cover(fixtures::diamond_cover()) == fixtures::b1());
  }
  SUBCASE("single full clique gives one all-ones row") {
    const MCMGraph m = mcm_from_cover(make_cover(5, {{0, 1, 2, 3, 4}}));
    CHECK(m.latent_count() == 1);
    CHECK(m.biadjacency.sum() == 5);
  }
  SUBCASE("disjoint 2-cliques") {
    const MCMGraph m = mcm_from_cover(make_cover(4, {{0, 1}, {2, 3}}));
    Eigen::MatrixXi expect(2, 4);
    expect << 1, 1, 0, 0, 0, 0, 1, 1;
    CHECK(m.biadjacency == expect);
  }
  SUBCASE("rejects empty input") {
    CHECK_THROWS_AS(mcm_from_cover(CliqueCover{4, {}}), std::invalid_argument);
    CHECK_THROWS_AS(make_cover(4, {{0, 1}, {}}), std::invalid_argument);
  }
}

TEST_CASE("udg_of_mcm") {
  CHECK(udg_of_mcm(fixtures::b1()) == fixtures::diamond_udg());
  const MCMGraph ones{Eigen::MatrixXi::Ones(1, 5)};
  CHECK(udg_of_mcm(ones) == UndirectedGraph::complete(5));
  const MCMGraph identity{Eigen::MatrixXi::Identity(4, 4)};
  CHECK(udg_of_mcm(identity).edge_count() == 0);
}

TEST_CASE("ecc_equivalent") {
  const MCMGraph ga = mcm_from_cover(make_cover(6, fixtures::octahedron_cover_a()));
  const MCMGraph gb = mcm_from_cover(make_cover(6, fixtures::octahedron_cover_b()));
  CHECK(ecc_equivalent(ga, gb));
  CHECK(ecc_equivalent(ga, ga));
  const MCMGraph identity{Eigen::MatrixXi::Identity(4, 4)};
  CHECK_FALSE(ecc_equivalent(fixtures::b1(), identity));
  CHECK_THROWS_AS(ecc_equivalent(ga, identity), std::invalid_argument);
}

TEST_CASE("sfd reproduces the worked table") {
  CHECK(sfd(fixtures::b1(), fixtures::b2()) == 10);
  CHECK(sfd(fixtures::b1(), fixtures::b3()) == 5);
  CHECK(sfd(fixtures::b2(), fixtures::b3()) == 7);
  CHECK(sfd(fixtures::b2(), fixtures::b2()) == 0);
  CHECK_THROWS_AS(sfd(fixtures::b1(), MCMGraph{Eigen::MatrixXi::Ones(1, 5)}),
                  std::invalid_argument);
}

TEST_CASE("shd reproduces the worked table") {
  const UndirectedGraph u1 = udg_of_mcm(fixtures::b1());
  const UndirectedGraph u2 = udg_of_mcm(fixtures::b2());
  const UndirectedGraph u3 = udg_of_mcm(fixtures::b3());
  CHECK(shd(u1, u2) == 1);
  CHECK(shd(u1, u3) == 1);
  CHECK(shd(u2, u3) == 2);
  CHECK(shd(u1, u1) == 0);
  CHECK(shd(UndirectedGraph(4), UndirectedGraph::complete(4)) == 6);
}

TEST_CASE("sfd is a metric on the gram matrices") {
  Rng rng(42);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 2 + static_cast<int>(rng.below(5));
    const MCMGraph a = fixtures::random_mcm(1 + static_cast<int>(rng.below(4)), n,
                                            rng.next_u64());
    const MCMGraph b = fixtures::random_mcm(1 + static_cast<int>(rng.below(4)), n,
                                            rng.next_u64());
    const MCMGraph c = fixtures::random_mcm(1 + static_cast<int>(rng.below(4)), n,
                                            rng.next_u64());
    const long long ab = sfd(a, b), ba = sfd(b, a);
    CHECK(ab >= 0);
    CHECK(ab == ba);
    CHECK((ab == 0) == (a.gram() == b.gram()));
    // triangle inequality holds for the square roots (Frobenius norm)
    const double dab = std::sqrt(static_cast<double>(ab));
    const double dac = std::sqrt(static_cast<double>(sfd(a, c)));
    const double dcb = std::sqrt(static_cast<double>(sfd(c, b)));
    CHECK(dab <= dac + dcb + 1e-9);
  }
}

TEST_CASE("gram off-diagonals count shared latent parents") {
  Rng rng(7);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 2 + static_cast<int>(rng.below(5));
    const int k = 1 + static_cast<int>(rng.below(6));
    const MCMGraph m = fixtures::random_mcm(k, n, rng.next_u64());
    const Eigen::MatrixXi gram = m.gram();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        int shared = 0;
        for (int r = 0; r < k; ++r)
          if (m.biadjacency(r, i) == 1 && m.biadjacency(r, j) == 1) ++shared;
        CHECK(gram(i, j) == shared);
      }
  }
}

TEST_CASE("cover round trip recovers the graph") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const int n = 3 + static_cast<int>(seed % 8);
    const UndirectedGraph g = fixtures::random_graph(n, 0.45, seed);
    if (g.edge_count() == 0) continue;
    std::vector<std::vector<int>> edge_cliques;
    for (auto [i, j] : g.edges()) edge_cliques.push_back({i, j});
    CHECK(udg_of_mcm(mcm_from_cover(make_cover(n, edge_cliques))) == g);
    const auto sol = ecc::heuristic_ecc(g, seed);
    REQUIRE(validate_cover(g, sol.cover));
    CHECK(udg_of_mcm(mcm_from_cover(sol.cover)) == g);
  }
}

TEST_CASE("udg_error_bound") {
  CHECK(udg_error_bound(1, 0, 0.05, 0.7) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(udg_error_bound(0, 0, 0.3, 0.3) == 0.0);
  // two independent evaluation routes for the same value
  const double direct = 1.0 - std::pow(0.95, 36) * std::pow(0.9, 9);
  const double logspace = 1.0 - std::exp(36.0 * std::log(0.95) + 9.0 * std::log(0.9));
  CHECK(direct == doctest::Approx(logspace).epsilon(1e-12));
  CHECK(udg_error_bound(36, 9, 0.05, 0.1) == doctest::Approx(direct).epsilon(1e-12));
  CHECK_THROWS_AS(udg_error_bound(1, 1, -0.1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(udg_error_bound(1, 1, 0.5, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(udg_error_bound(-1, 1, 0.5, 0.5), std::invalid_argument);
}

TEST_CASE("udg_error_bound is monotone in every argument") {
  Rng rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    const long long a = static_cast<long long>(rng.below(50));
    const long long e = static_cast<long long>(rng.below(50));
    const double alpha = rng.uniform(0.0, 0.5);
    const double beta = rng.uniform(0.0, 0.5);
    const double base = udg_error_bound(a, e, alpha, beta);
    CHECK(udg_error_bound(a + 1, e, alpha, beta) >= base - 1e-15);
    CHECK(udg_error_bound(a, e + 1, alpha, beta) >= base - 1e-15);
    CHECK(udg_error_bound(a, e, std::min(1.0, alpha + 0.1), beta) >= base - 1e-15);
    CHECK(udg_error_bound(a, e, alpha, std::min(1.0, beta + 0.1)) >= base - 1e-15);
  }
}

TEST_CASE("default_lambda") {
  CHECK(default_lambda(10) == 25);
  CHECK(default_lambda(784) == 153664);
  CHECK(default_lambda(2) == 1);
  CHECK(default_lambda(1) == 0);
  CHECK_THROWS_AS(default_lambda(0), std::invalid_argument);
}

TEST_CASE("assign_latents") {
  const MCMGraph two = fixtures::b1();
  SUBCASE("two cliques, lambda four") {
    const NCFAGraph g = assign_latents(two, 4);
    CHECK(g.multiplicities == std::vector<int>{2, 2});
    CHECK(g.lambda == 4);
    CHECK(g.expanded_biadjacency().rows() == 4);
  }
  SUBCASE("even and uneven remainders") {
    const MCMGraph three = fixtures::random_mcm(3, 5, 1);
    CHECK(assign_latents(three, 3).multiplicities == std::vector<int>{1, 1, 1});
    CHECK(assign_latents(three, 5).multiplicities == std::vector<int>{2, 2, 1});
  }
  SUBCASE("lambda below K clamps up") {
    const MCMGraph three = fixtures::random_mcm(3, 5, 2);
    const NCFAGraph g = assign_latents(three, 1);
    CHECK(g.lambda == 3);
    CHECK(g.multiplicities == std::vector<int>{1, 1, 1});
  }
  SUBCASE("deterministic and well formed on random inputs") {
    Rng rng(3);
    for (int rep = 0; rep < 100; ++rep) {
      const int k = 1 + static_cast<int>(rng.below(6));
      const MCMGraph m = fixtures::random_mcm(k, 4, rng.next_u64());
      const long long lambda = 1 + static_cast<long long>(rng.below(20));
      const NCFAGraph g1 = assign_latents(m, lambda);
      const NCFAGraph g2 = assign_latents(m, lambda);
      CHECK(g1.multiplicities == g2.multiplicities);
      long long total = 0;
      for (int ki : g1.multiplicities) {
        CHECK(ki >= 1);
        total += ki;
      }
      CHECK(total == g1.lambda);
      CHECK(g1.lambda == std::max(lambda, static_cast<long long>(k)));
    }
  }
}

TEST_CASE("singleton cliques for isolated vertices") {
  UndirectedGraph g(5);
  g.add_edge(0, 1);
  const CliqueCover covered = add_singleton_cliques(make_cover(5, {{0, 1}}), g);
  REQUIRE(covered.size() == 4);
  CHECK(covered.cliques[1] == std::vector<int>{2});
  CHECK(covered.cliques[3] == std::vector<int>{4});
  const MCMGraph m = mcm_from_cover(covered);
  for (int i = 0; i < m.latent_count(); ++i) CHECK(m.biadjacency.row(i).sum() >= 1);
  CHECK(udg_of_mcm(m) == g);
}

TEST_CASE("graph JSON round trips are bit exact") {
  Rng rng(5);
  for (int rep = 0; rep < 25; ++rep) {
    const int n = 2 + static_cast<int>(rng.below(7));
    const UndirectedGraph g = fixtures::random_graph(n, 0.4, rng.next_u64());
    const io::json j = io::udg_to_json(g);
    CHECK(io::udg_from_json(j) == g);
    const std::string text = io::canonical_dump(j);
    CHECK(io::canonical_dump(io::json::parse(text)) == text);

    const MCMGraph m = fixtures::random_mcm(1 + static_cast<int>(rng.below(4)), n,
                                            rng.next_u64());
    const io::json jm = io::mcm_to_json(m);
    CHECK(io::mcm_from_json(jm) == m);
    const std::string tm = io::canonical_dump(jm);
    CHECK(io::canonical_dump(io::json::parse(tm)) == tm);

    const NCFAGraph ncfa_graph = assign_latents(m, m.latent_count() + 3);
    const io::json jn = io::ncfa_to_json(ncfa_graph);
    const NCFAGraph back = io::ncfa_from_json(jn);
    CHECK(back.mcm == ncfa_graph.mcm);
    CHECK(back.multiplicities == ncfa_graph.multiplicities);
    CHECK(back.lambda == ncfa_graph.lambda);
    const std::string tn = io::canonical_dump(jn);
    CHECK(io::canonical_dump(io::json::parse(tn)) == tn);
  }
}

TEST_SUITE_END();
