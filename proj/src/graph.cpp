#include "sag/graph.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "sag/rng.hpp"

namespace sag {

bool Graph::has_edge(int u, int v) const {
  const auto& nb = adjacency[u];
  return std::binary_search(nb.begin(), nb.end(), v);
}

long long Graph::edge_count() const {
  long long total = 0;
  for (const auto& nb : adjacency) total += static_cast<long long>(nb.size());
  return total / 2;
}

bool CuriousSet::contains(int v) const {
  return std::binary_search(members.begin(), members.end(), v);
}

Graph make_graph(int n, const std::vector<std::pair<int, int>>& edges) {
  if (n < 0) throw std::invalid_argument("make_graph: negative node count");
  Graph g;
  g.n = n;
  g.adjacency.assign(n, {});
  for (const auto& [u, v] : edges) {
    if (u < 0 || u >= n || v < 0 || v >= n)
      throw std::invalid_argument("make_graph: edge endpoint out of range");
    if (u == v) throw std::invalid_argument("make_graph: self-loop");
    g.adjacency[u].push_back(v);
    g.adjacency[v].push_back(u);
  }
  bool uniform = true;
  for (int v = 0; v < n; ++v) {
    auto& nb = g.adjacency[v];
    std::sort(nb.begin(), nb.end());
    if (std::adjacent_find(nb.begin(), nb.end()) != nb.end())
      throw std::invalid_argument("make_graph: duplicate edge");
    if (nb.size() != g.adjacency[0].size()) uniform = false;
  }
  if (n > 0 && uniform) g.degree_uniform = g.degree(0);
  return g;
}

CuriousSet make_curious_set(const Graph& g, std::vector<int> members) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  for (int v : members) {
    if (v < 0 || v >= g.n)
      throw std::invalid_argument("make_curious_set: member out of range");
  }
  if (static_cast<int>(members.size()) >= g.n - 1)
    throw std::invalid_argument("make_curious_set: need |F| < n - 1 so two honest nodes remain");
  return CuriousSet{std::move(members)};
}

namespace {

// One configuration-model attempt: repeatedly shuffle the unpaired stubs and
// pair them consecutively, keeping pairs that are neither self-loops nor
// repeats. A pass that makes no progress means the leftover stubs admit no
// valid pairing in this order, so the whole sample is discarded (no edge
// swaps). Returns the edge set on success.
bool try_stub_pairing(int n, int d, std::mt19937_64& rng,
                      std::vector<std::pair<int, int>>& edges_out) {
  std::vector<int> stubs;
  stubs.reserve(static_cast<std::size_t>(n) * d);
  for (int v = 0; v < n; ++v)
    for (int k = 0; k < d; ++k) stubs.push_back(v);

  std::unordered_set<std::uint64_t> seen;
  seen.reserve(stubs.size());
  edges_out.clear();
  const auto key = [n](int u, int v) {
    return static_cast<std::uint64_t>(std::min(u, v)) * static_cast<std::uint64_t>(n) +
           static_cast<std::uint64_t>(std::max(u, v));
  };

  while (!stubs.empty()) {
    std::shuffle(stubs.begin(), stubs.end(), rng);
    std::vector<int> leftover;
    for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
      const int u = stubs[i];
      const int v = stubs[i + 1];
      if (u == v || seen.count(key(u, v))) {
        leftover.push_back(u);
        leftover.push_back(v);
        continue;
      }
      seen.insert(key(u, v));
      edges_out.emplace_back(u, v);
    }
    if (leftover.size() == stubs.size()) return false;  // dead end, discard sample
    stubs.swap(leftover);
  }
  return true;
}

bool connected_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adj(n);
  for (const auto& [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::vector<char> vis(n, 0);
  std::deque<int> queue{0};
  vis[0] = 1;
  int count = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int w : adj[u]) {
      if (!vis[w]) {
        vis[w] = 1;
        ++count;
        queue.push_back(w);
      }
    }
  }
  return count == n;
}

}  // namespace

Graph generate_random_regular(int n, int d, std::uint64_t seed, int retry_limit) {
  if (d < 3 || d >= n)
    throw std::invalid_argument("generate_random_regular: need 3 <= d < n");
  if ((static_cast<long long>(n) * d) % 2 != 0)
    throw std::invalid_argument("generate_random_regular: n*d must be even");
  auto rng = rng_for(seed, 0);
  std::vector<std::pair<int, int>> edges;
  for (int attempt = 0; attempt < retry_limit; ++attempt) {
    if (!try_stub_pairing(n, d, rng, edges)) continue;
    if (!connected_edges(n, edges)) continue;
    return make_graph(n, edges);
  }
  throw std::runtime_error("generate_random_regular: retry limit exceeded");
}

Graph named_graph(const std::string& kind, int n) {
  std::vector<std::pair<int, int>> edges;
  if (kind == "complete") {
    if (n < 1) throw std::invalid_argument("named_graph: complete graph needs n >= 1");
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v) edges.emplace_back(u, v);
  } else if (kind == "cycle") {
    if (n < 3) throw std::invalid_argument("named_graph: cycle needs n >= 3");
    for (int u = 0; u < n; ++u) edges.emplace_back(u, (u + 1) % n);
  } else if (kind == "path") {
    if (n < 2) throw std::invalid_argument("named_graph: path needs n >= 2");
    for (int u = 0; u + 1 < n; ++u) edges.emplace_back(u, u + 1);
  } else if (kind == "petersen") {
    if (n != 10) throw std::invalid_argument("named_graph: petersen requires n = 10");
    for (int i = 0; i < 5; ++i) {
      edges.emplace_back(i, (i + 1) % 5);           // outer cycle
      edges.emplace_back(5 + i, 5 + (i + 2) % 5);   // inner pentagram
      edges.emplace_back(i, 5 + i);                 // spokes
    }
  } else if (kind == "hypercube") {
    if (n < 2 || (n & (n - 1)) != 0)
      throw std::invalid_argument("named_graph: hypercube requires n a power of two, n >= 2");
    for (int u = 0; u < n; ++u)
      for (int bit = 1; bit < n; bit <<= 1)
        if ((u ^ bit) > u) edges.emplace_back(u, u ^ bit);
  } else {
    throw std::invalid_argument("named_graph: unknown kind '" + kind + "'");
  }
  auto deduped = edges;
  std::sort(deduped.begin(), deduped.end());
  deduped.erase(std::unique(deduped.begin(), deduped.end()), deduped.end());
  return make_graph(n, deduped);
}

bool is_connected(const Graph& g) {
  if (g.n == 0) return true;
  std::vector<char> vis(g.n, 0);
  std::deque<int> queue{0};
  vis[0] = 1;
  int count = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int w : g.adjacency[u]) {
      if (!vis[w]) {
        vis[w] = 1;
        ++count;
        queue.push_back(w);
      }
    }
  }
  return count == g.n;
}

double spectral_expansion(const Graph& g) {
  if (!is_connected(g)) throw std::invalid_argument("spectral_expansion: graph is disconnected");
  if (g.n > 4096) throw std::runtime_error("spectral_expansion: dense eigendecomposition capped at n <= 4096");
  if (g.n <= 1) return 0.0;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.n, g.n);
  std::vector<double> inv_sqrt_deg(g.n);
  for (int v = 0; v < g.n; ++v) inv_sqrt_deg[v] = 1.0 / std::sqrt(static_cast<double>(g.degree(v)));
  for (int u = 0; u < g.n; ++u)
    for (int v : g.adjacency[u]) a(u, v) = inv_sqrt_deg[u] * inv_sqrt_deg[v];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("spectral_expansion: eigensolver failed to converge");
  const auto& evals = solver.eigenvalues();  // ascending
  return std::max(std::abs(evals(0)), std::abs(evals(g.n - 2)));
}

namespace {

// Dinic max-flow on the node-split digraph used for vertex connectivity:
// each node v becomes v_in -> v_out with capacity 1, each edge {u, v}
// becomes u_out -> v_in and v_out -> u_in with effectively infinite capacity.
struct FlowNetwork {
  struct Arc {
    int to;
    int cap;
    int rev;
  };
  std::vector<std::vector<Arc>> arcs;
  std::vector<int> level, iter;

  explicit FlowNetwork(int size) : arcs(size), level(size), iter(size) {}

  void add_arc(int from, int to, int cap) {
    arcs[from].push_back({to, cap, static_cast<int>(arcs[to].size())});
    arcs[to].push_back({from, 0, static_cast<int>(arcs[from].size()) - 1});
  }

  bool bfs(int s, int t) {
    std::fill(level.begin(), level.end(), -1);
    std::deque<int> queue{s};
    level[s] = 0;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (const auto& a : arcs[u]) {
        if (a.cap > 0 && level[a.to] < 0) {
          level[a.to] = level[u] + 1;
          queue.push_back(a.to);
        }
      }
    }
    return level[t] >= 0;
  }

  int dfs(int u, int t, int limit) {
    if (u == t) return limit;
    for (int& i = iter[u]; i < static_cast<int>(arcs[u].size()); ++i) {
      Arc& a = arcs[u][i];
      if (a.cap > 0 && level[a.to] == level[u] + 1) {
        const int pushed = dfs(a.to, t, std::min(limit, a.cap));
        if (pushed > 0) {
          a.cap -= pushed;
          arcs[a.to][a.rev].cap += pushed;
          return pushed;
        }
      }
    }
    return 0;
  }

  int max_flow(int s, int t, int stop_at) {
    int flow = 0;
    while (flow < stop_at && bfs(s, t)) {
      std::fill(iter.begin(), iter.end(), 0);
      while (flow < stop_at) {
        const int pushed = dfs(s, t, stop_at - flow);
        if (pushed == 0) break;
        flow += pushed;
      }
    }
    return flow;
  }

  // After a max-flow run, the residual-reachable set from s crosses only
  // saturated split arcs; the owning nodes form a minimum vertex cut.
  std::vector<int> split_arc_cut(int s) {
    std::vector<char> vis(arcs.size(), 0);
    std::deque<int> queue{s};
    vis[s] = 1;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (const auto& a : arcs[u]) {
        if (a.cap > 0 && !vis[a.to]) {
          vis[a.to] = 1;
          queue.push_back(a.to);
        }
      }
    }
    std::vector<int> cut;
    for (std::size_t v = 0; 2 * v + 1 < arcs.size(); ++v)
      if (vis[2 * v] && !vis[2 * v + 1]) cut.push_back(static_cast<int>(v));
    return cut;
  }
};

constexpr int kInfiniteCap = 1 << 29;

// Local vertex connectivity between non-adjacent s and t; optionally
// extracts the realizing cut.
int local_connectivity(const Graph& g, int s, int t, int stop_at, std::vector<int>* cut_out) {
  FlowNetwork net(2 * g.n);
  for (int v = 0; v < g.n; ++v)
    net.add_arc(2 * v, 2 * v + 1, (v == s || v == t) ? kInfiniteCap : 1);
  for (int u = 0; u < g.n; ++u)
    for (int v : g.adjacency[u])
      net.add_arc(2 * u + 1, 2 * v, kInfiniteCap);
  const int flow = net.max_flow(2 * s + 1, 2 * t, cut_out ? kInfiniteCap : stop_at);
  if (cut_out) *cut_out = net.split_arc_cut(2 * s + 1);
  return flow;
}

struct ConnectivityResult {
  int kappa;
  int best_s = -1, best_t = -1;  // minimizing non-adjacent pair, -1 when the
                                 // trivial neighborhood bound was never beaten
};

ConnectivityResult connectivity_impl(const Graph& g, int size_cap) {
  if (!is_connected(g)) throw std::invalid_argument("vertex_connectivity: graph is disconnected");
  if (g.n > size_cap) throw std::runtime_error("vertex_connectivity: size cap exceeded");
  if (g.n < 2) throw std::invalid_argument("vertex_connectivity: need at least two nodes");
  if (g.edge_count() == static_cast<long long>(g.n) * (g.n - 1) / 2)
    return {g.n - 1};  // complete graph, no vertex cut exists

  // Fix a minimum-degree node v0. kappa is realized either between v0 and a
  // non-neighbor, or between two non-adjacent neighbors of v0 (any cut that
  // avoids v0 separates it from somebody on the other side).
  int v0 = 0;
  for (int v = 1; v < g.n; ++v)
    if (g.degree(v) < g.degree(v0)) v0 = v;

  ConnectivityResult result{g.degree(v0)};
  const auto consider = [&](int s, int t) {
    const int local = local_connectivity(g, s, t, result.kappa, nullptr);
    if (local < result.kappa) {
      result.kappa = local;
      result.best_s = s;
      result.best_t = t;
    }
  };
  for (int u = 0; u < g.n; ++u)
    if (u != v0 && !g.has_edge(v0, u)) consider(v0, u);
  const auto& nb = g.adjacency[v0];
  for (std::size_t i = 0; i < nb.size(); ++i)
    for (std::size_t j = i + 1; j < nb.size(); ++j)
      if (!g.has_edge(nb[i], nb[j])) consider(nb[i], nb[j]);
  return result;
}

}  // namespace

int vertex_connectivity(const Graph& g, int size_cap) {
  return connectivity_impl(g, size_cap).kappa;
}

std::vector<int> min_vertex_cut(const Graph& g, int size_cap) {
  const auto result = connectivity_impl(g, size_cap);
  if (result.kappa == g.n - 1 && g.edge_count() == static_cast<long long>(g.n) * (g.n - 1) / 2)
    throw std::invalid_argument("min_vertex_cut: complete graph has no vertex cut");
  if (result.best_s < 0) {
    // Every flow matched the minimum degree: the neighborhood of a
    // minimum-degree node is itself a minimum cut.
    int v0 = 0;
    for (int v = 1; v < g.n; ++v)
      if (g.degree(v) < g.degree(v0)) v0 = v;
    return g.adjacency[v0];
  }
  std::vector<int> cut;
  local_connectivity(g, result.best_s, result.best_t, g.n, &cut);
  std::sort(cut.begin(), cut.end());
  return cut;
}

Density adversarial_density(const Graph& g, const CuriousSet& F) {
  if (!g.degree_uniform)
    throw std::invalid_argument("adversarial_density: graph is not regular");
  const int d = *g.degree_uniform;
  long long worst = 0;
  for (int v = 0; v < g.n; ++v) {
    if (F.contains(v)) continue;
    long long count = 0;
    for (int w : g.adjacency[v])
      if (F.contains(w)) ++count;
    worst = std::max(worst, count);
  }
  return Density{worst, std::max(d, 1)};
}

bool induced_subgraph_connected(const Graph& g, const CuriousSet& F) {
  if (F.f() >= g.n) throw std::invalid_argument("induced_subgraph_connected: F must be a proper subset");
  int start = -1;
  int honest = 0;
  for (int v = 0; v < g.n; ++v) {
    if (!F.contains(v)) {
      ++honest;
      if (start < 0) start = v;
    }
  }
  if (honest == 0) return true;
  std::vector<char> vis(g.n, 0);
  std::deque<int> queue{start};
  vis[start] = 1;
  int count = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int w : g.adjacency[u]) {
      if (!vis[w] && !F.contains(w)) {
        vis[w] = 1;
        ++count;
        queue.push_back(w);
      }
    }
  }
  return count == honest;
}

void write_edge_list(const Graph& g, std::ostream& out) {
  out << g.n << ' ' << g.edge_count() << '\n';
  for (int u = 0; u < g.n; ++u)
    for (int v : g.adjacency[u])
      if (u < v) out << u << ' ' << v << '\n';
}

Graph read_edge_list(std::istream& in) {
  int n = 0;
  long long m = 0;
  if (!(in >> n >> m)) throw std::invalid_argument("read_edge_list: malformed header");
  if (n < 0 || m < 0) throw std::invalid_argument("read_edge_list: negative node or edge count");
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long long i = 0; i < m; ++i) {
    int u = 0, v = 0;
    if (!(in >> u >> v)) throw std::invalid_argument("read_edge_list: truncated edge list");
    if (u >= v) throw std::invalid_argument("read_edge_list: edges must satisfy u < v");
    edges.emplace_back(u, v);
  }
  return make_graph(n, edges);  // rejects duplicates and out-of-range endpoints
}

void save_edge_list(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_edge_list: cannot open '" + path + "'");
  write_edge_list(g, out);
}

Graph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_edge_list: cannot open '" + path + "'");
  return read_edge_list(in);
}

}  // namespace sag
