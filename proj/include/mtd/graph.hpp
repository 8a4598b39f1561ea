#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mtd {

// Attack-defense structure: the directed contact graph along which an attacker
// can push compromise between nodes.  An ordered pair (u, v) means "u can
// attack v", i.e. entry A[v][u] = 1 of the adjacency matrix.  Undirected
// structures store both orientations of every edge, so all consumers can treat
// the edge set as ordered pairs regardless of directedness.
//
// Structures are immutable after construction and safe to share across
// threads.  The spectral radius is computed on demand and cached (the cache is
// the only mutable state, guarded by a mutex).
class AttackDefenseStructure {
 public:
  // Builds a structure from ordered attack pairs.  Node ids are 0-based here;
  // the text loader below converts from the 1-based file format.  For
  // undirected = false the pairs are taken verbatim; for undirected graphs the
  // caller passes each edge once and both orientations are stored.  Duplicate
  // pairs collapse; self-loops are rejected.
  static AttackDefenseStructure from_pairs(int node_count,
                                           const std::vector<std::pair<int, int>>& pairs,
                                           bool directed);

  int node_count() const noexcept { return node_count_; }
  bool directed() const noexcept { return directed_; }

  // Number of ordered pairs (an undirected edge counts twice).
  std::size_t ordered_edge_count() const noexcept { return ordered_edge_count_; }

  // Nodes that can attack v (in-neighbors of v), sorted ascending.
  const std::vector<int>& attackers_of(int v) const;

  // True when u can attack v.
  bool has_edge(int u, int v) const;

  int in_degree(int v) const { return static_cast<int>(attackers_of(v).size()); }
  int out_degree(int v) const;
  int max_in_degree() const noexcept { return max_in_degree_; }
  int max_out_degree() const noexcept { return max_out_degree_; }

  // Largest-magnitude adjacency eigenvalue lambda_1 (the Perron root; real and
  // non-negative for these 0/1 matrices).  Power iteration on A + I: the unit
  // diagonal shift strictly separates the Perron root from the -lambda_1
  // partner that bipartite graphs otherwise oscillate between, and is
  // subtracted from the converged value.  Convergence tests:
  //   undirected: residual ||A'x - rho x|| <= tol * scale (symmetric residual
  //               bounds the eigenvalue error directly);
  //   directed:   Collatz-Wielandt ratio interval [min, max] of (A'x)_i / x_i
  //               shrinks below tol * scale (the interval brackets the Perron
  //               root of a non-negative matrix for any positive x).
  // An empty edge set short-circuits to 0.  Deterministic: the start vector
  // comes from a fixed-seed generator.  Throws SpectralIterationError when
  // max_iter is exhausted (reducible directed structures, e.g. DAGs, may close
  // the ratio interval only at rate 1/k and can legitimately land here).
  // The first successful result is cached on the structure and returned by
  // subsequent calls.
  double spectral_radius(double tol = 1e-9, int max_iter = 10000) const;

  std::optional<double> cached_lambda1() const;

 private:
  AttackDefenseStructure() = default;

  int node_count_ = 0;
  bool directed_ = false;
  std::size_t ordered_edge_count_ = 0;
  int max_in_degree_ = 0;
  int max_out_degree_ = 0;
  std::vector<std::vector<int>> attackers_;  // attackers_[v] = sorted in-neighbors of v
  std::vector<int> out_degree_;

  // Heap-allocated so the structure stays movable despite the mutex.
  struct Lambda1Cache {
    std::mutex mutex;
    std::optional<double> value;
  };
  std::unique_ptr<Lambda1Cache> cache_ = std::make_unique<Lambda1Cache>();
};

// Canned generators.  All validate their parameters (throwing ValidationError
// that names the offending field) and produce undirected structures.
AttackDefenseStructure generate_complete(int node_count);
AttackDefenseStructure generate_star(int leaves);  // node 0 is the hub
AttackDefenseStructure generate_path(int node_count);
// Erdos-Renyi G(n, p): each unordered pair kept independently with
// probability p.  Deterministic for a fixed seed.
AttackDefenseStructure generate_erdos_renyi(int node_count, double edge_probability,
                                            std::uint64_t seed);

// Parses the edge-list text format:
//   - '#' starts a comment (rest of the line ignored)
//   - an optional leading "n=<count>" line fixes the node count; otherwise the
//     node count is the largest id seen
//   - every other non-blank line is "<u> <v>" with 1-based node ids
// Errors carry the 1-based line number.  With directed = false each line adds
// both orientations.
AttackDefenseStructure load_edge_list(std::string_view text, bool directed = false);

// Convenience file wrapper around load_edge_list.
AttackDefenseStructure load_edge_list_file(const std::string& path, bool directed = false);

}  // namespace mtd
