#include "gffperc/graph.hpp"

#include <algorithm>
#include <deque>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "gffperc/errors.hpp"
#include "gffperc/rng.hpp"

namespace gffperc {

namespace {

bool connected(int n, const std::vector<int>& adjacency, int d) {
  if (n == 0) return true;
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int x = stack.back();
    stack.pop_back();
    for (int j = 0; j < d; ++j) {
      const int y = adjacency[static_cast<std::size_t>(x) * d + j];
      if (!seen[y]) {
        seen[y] = 1;
        ++count;
        stack.push_back(y);
      }
    }
  }
  return count == n;
}

}  // namespace

Graph Graph::from_edges(int n, std::span<const std::pair<int, int>> edges,
                        std::uint64_t seed, GraphMethod method) {
  if (n <= 0) throw InvalidArgument("graph needs at least one vertex");
  std::vector<std::pair<int, int>> sorted;
  sorted.reserve(edges.size());
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw InvalidArgument("edge endpoint out of range");
    if (u == v) throw InvalidArgument("self-loop in edge list");
    sorted.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InvalidArgument("multi-edge in edge list");
  if ((2 * sorted.size()) % static_cast<std::size_t>(n) != 0)
    throw InvalidArgument("edge list is not regular");
  const int d = static_cast<int>(2 * sorted.size() / n);

  std::vector<std::vector<std::pair<int, int>>> lists(n);
  for (std::size_t e = 0; e < sorted.size(); ++e) {
    auto [u, v] = sorted[e];
    lists[u].emplace_back(v, static_cast<int>(e));
    lists[v].emplace_back(u, static_cast<int>(e));
  }
  Graph g;
  g.n_ = n;
  g.d_ = d;
  g.seed_ = seed;
  g.method_ = method;
  g.adjacency_.resize(static_cast<std::size_t>(n) * d);
  g.incident_.resize(static_cast<std::size_t>(n) * d);
  for (int x = 0; x < n; ++x) {
    auto& list = lists[x];
    if (static_cast<int>(list.size()) != d)
      throw InvalidArgument("vertex " + std::to_string(x) + " has degree " +
                            std::to_string(list.size()) + ", expected " +
                            std::to_string(d));
    std::sort(list.begin(), list.end());
    for (int j = 0; j < d; ++j) {
      g.adjacency_[static_cast<std::size_t>(x) * d + j] = list[j].first;
      g.incident_[static_cast<std::size_t>(x) * d + j] = list[j].second;
    }
  }
  if (!connected(n, g.adjacency_, d)) throw InvalidArgument("graph is not connected");
  g.edges_ = std::move(sorted);
  return g;
}

bool Graph::adjacent(int x, int y) const {
  auto nb = neighbors(x);
  return std::binary_search(nb.begin(), nb.end(), y);
}

Graph build_random_regular(int n, int d, std::uint64_t seed, int max_retries) {
  if (d < 3) throw InvalidArgument("degree must be at least 3");
  if ((static_cast<std::int64_t>(n) * d) % 2 != 0)
    throw ParityError("n*d must be even (n=" + std::to_string(n) +
                      ", d=" + std::to_string(d) + ")");
  if (n < d + 1) throw InvalidArgument("need n >= d + 1");

  const std::size_t stubs = static_cast<std::size_t>(n) * d;
  std::vector<int> points(stubs);
  std::vector<std::pair<int, int>> edges(stubs / 2);
  std::vector<int> degree_check;
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    Engine engine = make_engine(seed, Stream::graph, static_cast<std::uint64_t>(attempt));
    for (std::size_t i = 0; i < stubs; ++i) points[i] = static_cast<int>(i / d);
    // Fisher-Yates with a fully specified integer distribution.
    for (std::size_t i = stubs - 1; i > 0; --i) {
      boost::random::uniform_int_distribution<std::size_t> pick(0, i);
      std::swap(points[i], points[pick(engine)]);
    }
    bool simple = true;
    for (std::size_t e = 0; e < stubs / 2; ++e) {
      const int u = points[2 * e];
      const int v = points[2 * e + 1];
      if (u == v) {
        simple = false;
        break;
      }
      edges[e] = {std::min(u, v), std::max(u, v)};
    }
    if (!simple) continue;
    std::vector<std::pair<int, int>> sorted = edges;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;
    try {
      return Graph::from_edges(n, sorted, seed, GraphMethod::configuration_model);
    } catch (const InvalidArgument&) {
      continue;  // disconnected outcome
    }
  }
  throw RetryLimitError("configuration model exceeded " + std::to_string(max_retries) +
                        " attempts");
}

Graph complete_graph(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) edges.emplace_back(u, v);
  return Graph::from_edges(n, edges);
}

Ball ball(const Graph& g, int x, int r) {
  Ball b;
  std::vector<int> dist(g.n_vertices(), -1);
  b.vertices.push_back(x);
  b.distance.push_back(0);
  dist[x] = 0;
  for (std::size_t head = 0; head < b.vertices.size(); ++head) {
    const int u = b.vertices[head];
    if (dist[u] == r) continue;
    for (int v : g.neighbors(u)) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        b.vertices.push_back(v);
        b.distance.push_back(dist[v]);
      }
    }
  }
  return b;
}

std::int64_t ball_cycle_rank(const Graph& g, int x, int r) {
  const Ball b = ball(g, x, r);
  std::vector<int> sorted = b.vertices;
  std::sort(sorted.begin(), sorted.end());
  std::int64_t twice_edges = 0;
  for (int u : b.vertices)
    for (int v : g.neighbors(u))
      if (std::binary_search(sorted.begin(), sorted.end(), v)) ++twice_edges;
  return twice_edges / 2 - static_cast<std::int64_t>(b.vertices.size()) + 1;
}

bool is_treelike(const Graph& g, int x, int r) { return ball_cycle_rank(g, x, r) == 0; }

std::int64_t tree_ball_size(int d, int r) {
  std::int64_t power = 1;
  for (int i = 0; i < r; ++i) power *= (d - 1);
  return (d * power - 2) / (d - 2);
}

std::vector<int> vertex_boundary(const Graph& g, std::span<const int> set) {
  std::vector<char> in(g.n_vertices(), 0);
  for (int x : set) in[x] = 1;
  std::vector<char> mark(g.n_vertices(), 0);
  std::vector<int> out;
  for (int x : set)
    for (int y : g.neighbors(x))
      if (!in[y] && !mark[y]) {
        mark[y] = 1;
        out.push_back(y);
      }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> bfs_distances(const Graph& g, int source) {
  std::vector<int> dist(g.n_vertices(), -1);
  std::deque<int> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : g.neighbors(u))
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
  }
  return dist;
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << "# n=" << g.n_vertices() << " d=" << g.degree() << " seed=" << g.seed() << '\n';
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

Graph read_edge_list(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw InvalidArgument("edge list: missing header line");
  int n = -1;
  int d = -1;
  std::uint64_t seed = 0;
  std::istringstream header(line.substr(2));
  std::string token;
  while (header >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw InvalidArgument("edge list: bad header token " + token);
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "n") n = std::stoi(value);
    else if (key == "d") d = std::stoi(value);
    else if (key == "seed") seed = std::stoull(value);
  }
  if (n <= 0 || d <= 0) throw InvalidArgument("edge list: header lacks n or d");
  std::vector<std::pair<int, int>> edges;
  int u = 0;
  int v = 0;
  while (in >> u >> v) {
    if (u >= v) throw InvalidArgument("edge list: expected u < v on every line");
    edges.emplace_back(u, v);
  }
  Graph g = Graph::from_edges(n, edges, seed, GraphMethod::explicit_edges);
  if (g.degree() != d) throw InvalidArgument("edge list: degree disagrees with header");
  return g;
}

}  // namespace gffperc
