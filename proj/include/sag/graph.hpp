#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

// Undirected simple graphs with regularity metadata, plus the structural
// quantities the privacy bounds consume: spectral expansion, vertex
// connectivity, and the curious-neighbor density of a node subset.

namespace sag {

struct Graph {
  int n = 0;
  std::vector<std::vector<int>> adjacency;  // per-node sorted neighbor lists
  std::optional<int> degree_uniform;        // common degree when regular

  int degree(int v) const { return static_cast<int>(adjacency[v].size()); }
  bool has_edge(int u, int v) const;
  long long edge_count() const;
};

// Set F of protocol-compliant but curious nodes. Members are sorted and
// unique; the threat model requires |F| < n - 1 so at least two honest nodes
// remain.
struct CuriousSet {
  std::vector<int> members;

  int f() const { return static_cast<int>(members.size()); }
  bool contains(int v) const;
};

// Exact rational value num/den, used for the adversarial density so that
// gating comparisons against 1 - lambda never hinge on float round-off in
// the density itself.
struct Density {
  long long num = 0;
  long long den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// Builds a validated Graph from an explicit edge set. Throws
// std::invalid_argument on self-loops, duplicate edges, or out-of-range
// endpoints. Sets degree_uniform when all degrees coincide.
Graph make_graph(int n, const std::vector<std::pair<int, int>>& edges);

// Validates members against g and the |F| < n - 1 requirement; returns the
// sorted, deduplicated set.
CuriousSet make_curious_set(const Graph& g, std::vector<int> members);

// Samples a simple connected d-regular graph via configuration-model stub
// pairing; invalid pairings and disconnected samples are discarded whole and
// resampled. Deterministic given seed. Throws std::invalid_argument when no
// d-regular graph exists (n*d odd, or d outside [3, n-1]) and
// std::runtime_error after retry_limit discarded samples.
Graph generate_random_regular(int n, int d, std::uint64_t seed, int retry_limit = 10000);

// Canonical fixture graphs: complete, cycle, path, petersen, hypercube.
// Throws std::invalid_argument for an unknown kind or a size the kind does
// not support (petersen requires n = 10, hypercube a power of two, ...).
Graph named_graph(const std::string& kind, int n);

bool is_connected(const Graph& g);

// lambda(G): the largest absolute eigenvalue of the degree-normalized
// adjacency matrix other than the trivial eigenvalue 1. Requires a connected
// graph; dense eigendecomposition, capped at n <= 4096.
double spectral_expansion(const Graph& g);

// kappa(G): minimum number of node removals that disconnect g (n - 1 for
// complete graphs). Max-flow with node splitting; capped at size_cap nodes.
int vertex_connectivity(const Graph& g, int size_cap = 200);

// One minimum vertex cut realizing kappa(G). Throws std::invalid_argument on
// complete graphs, which have no vertex cut.
std::vector<int> min_vertex_cut(const Graph& g, int size_cap = 200);

// alpha_F: the maximum over honest nodes v of deg_F(v)/d, as an exact
// rational over the common degree d. Requires a regular graph.
Density adversarial_density(const Graph& g, const CuriousSet& F);

// True iff the subgraph induced by the non-curious nodes is connected.
bool induced_subgraph_connected(const Graph& g, const CuriousSet& F);

// Edge-list text format: a header line "n m", then m lines "u v" with
// 0-indexed endpoints, u < v, sorted lexicographically. The writer is
// bit-exact deterministic given a Graph; the reader rejects self-loops,
// duplicates, and malformed input.
void write_edge_list(const Graph& g, std::ostream& out);
Graph read_edge_list(std::istream& in);
void save_edge_list(const Graph& g, const std::string& path);
Graph load_edge_list(const std::string& path);

}  // namespace sag
