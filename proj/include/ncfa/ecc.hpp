#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ncfa/graph.hpp"

namespace ncfa::ecc {

enum class Mode { automatic, exact, heuristic, pure_child };
enum class SolverKind { exact, heuristic, pure_child };

Mode mode_from_string(const std::string& s);
std::string to_string(Mode mode);
std::string to_string(SolverKind kind);

/// Thrown when the exact solver is asked for a graph above its vertex cap.
struct SolverRefused : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kDefaultExactCap = 14;

struct Solution {
  CliqueCover cover;
  bool is_certified_minimum = false;
  long long minimum_covers_found = 0;  // set when enumeration was requested
  SolverKind solver = SolverKind::exact;
  long long nodes_expanded = 0;
  std::string fallback;  // nonempty when the pure-child path fell back
};

/// Branch-and-bound minimum edge clique cover. With enumerate_all, also
/// reports every minimum cover (as canonical sets of vertex sets) through
/// all_minimum and sets minimum_covers_found; finding exactly one cover
/// certifies identifiability of the minimum MCM structure.
Solution exact_min_ecc(const UndirectedGraph& graph, bool enumerate_all = false,
                       int cap = kDefaultExactCap,
                       std::vector<CliqueCover>* all_minimum = nullptr);

/// Greedy cover: repeatedly grow the uncovered edge of maximal degree sum
/// into a maximal clique, then drop cliques made redundant by the rest.
/// Valid but not necessarily minimum; deterministic given the seed.
Solution heuristic_ecc(const UndirectedGraph& graph, std::uint64_t seed);

/// Fast path for graphs where every latent has a pure child: covers by
/// closed neighborhoods of an independent set of simplicial vertices.
/// Returns nullopt when the structural precondition fails, in which case
/// the caller must fall back to another solver.
std::optional<Solution> pure_child_ecc(const UndirectedGraph& graph);

/// Mode dispatch: automatic picks exact for n <= cap and heuristic above;
/// pure_child falls back to the automatic path on precondition violation
/// and records the fallback in the solution.
Solution solve(const UndirectedGraph& graph, Mode mode, std::uint64_t seed,
               int cap = kDefaultExactCap);

}  // namespace ncfa::ecc
