#pragma once

#include "ginet/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ginet {

// Simple undirected graph on nodes 0..n-1, stored as a dense 0/1 adjacency
// matrix (the problem sizes here are at most a few hundred nodes).
struct Graph {
  int n = 0;
  IntMatrix adj;  // n x n, symmetric, zero diagonal

  Graph() = default;
  explicit Graph(int n_) : n(n_), adj(IntMatrix::Zero(n_, n_)) {}

  bool has_edge(int i, int j) const { return adj(i, j) != 0; }

  void add_edge(int i, int j) {
    if (i == j) throw ParameterError("add_edge: self-loop");
    adj(i, j) = 1;
    adj(j, i) = 1;
  }

  int num_edges() const;
  int degree(int i) const { return adj.row(i).sum(); }
  std::vector<std::vector<int>> adjacency_list() const;

  // Throws if the adjacency matrix is not symmetric 0/1 with a zero diagonal.
  void validate() const;
};

// ---- Generators (deterministic in the seed) --------------------------------

// Erdos-Renyi: every unordered pair is an edge independently with prob p.
Graph generate_er(int n, double p, std::uint64_t seed);

// Watts-Strogatz: ring lattice where each node links to its k nearest
// neighbours (k even), then the far endpoint of each clockwise lattice edge is
// rewired with probability p_rewire to a uniform node, redrawing on self-loops
// and duplicates, so the edge count n*k/2 is preserved.
Graph generate_ws(int n, int k, double p_rewire, std::uint64_t seed);

// Barabasi-Albert: a ring over the first m0 nodes seeds the graph; each later
// node attaches k edges to distinct existing nodes picked with probability
// proportional to current degree. Final edge count is m0 + (n - m0) * k.
Graph generate_ba(int n, int m0, int k, std::uint64_t seed);

// ---- Observability partition ------------------------------------------------

struct NodePartition {
  std::vector<int> observed;  // ascending
  std::vector<int> hidden;    // ascending

  int n() const { return static_cast<int>(observed.size() + hidden.size()); }
  int n_observed() const { return static_cast<int>(observed.size()); }
  int n_hidden() const { return static_cast<int>(hidden.size()); }

  // observed followed by hidden; position in this order is the row index used
  // by the relabelled matrices throughout the pipeline.
  std::vector<int> reorder() const;
  void validate(int n_total) const;
};

// Draws n_hidden distinct hidden nodes uniformly at random.
NodePartition partition_nodes(int n, int n_hidden, std::uint64_t seed);

// Boolean n x n mask, true where at least one endpoint is hidden (the
// inverted-L region in the observed-first node ordering). True count is
// n^2 - n_obs^2.
BoolMatrix unobserved_mask(const NodePartition& p);

// Relabels the adjacency so observed nodes come first (rows/cols permuted by
// partition.reorder()).
IntMatrix reorder_adjacency(const Graph& g, const NodePartition& p);

// ---- Structural statistics ---------------------------------------------------

struct StructuralStats {
  double average_degree = 0.0;
  double average_path_length = 0.0;  // over the largest connected component
  double density = 0.0;
  double average_clustering = 0.0;  // local coefficient, 0 for degree < 2
  int largest_component = 0;
};

StructuralStats structural_stats(const Graph& g);

// ---- I/O ---------------------------------------------------------------------

// CSV edge list with header "src,dst". Node count is max id + 1 unless
// expected_n >= 0 pins it; every id in [0, n) must occur (no gaps), ids must
// be < n, and self-loops/duplicate edges are rejected.
Graph load_edge_list(const std::string& path, int expected_n = -1);
void save_edge_list(const Graph& g, const std::string& path);

// JSON object {"n": ..., "hidden": [...]}.
NodePartition load_partition(const std::string& path);
void save_partition(const NodePartition& p, const std::string& path);

}  // namespace ginet
