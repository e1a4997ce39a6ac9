#include "ginet/netcore.hpp"

#include "ginet/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <deque>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace ginet {

int Graph::num_edges() const {
  return static_cast<int>(adj.cast<long>().sum() / 2);
}

std::vector<std::vector<int>> Graph::adjacency_list() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (adj(i, j) != 0) out[static_cast<std::size_t>(i)].push_back(j);
  return out;
}

void Graph::validate() const {
  if (adj.rows() != n || adj.cols() != n)
    throw ShapeError("graph: adjacency is " + std::to_string(adj.rows()) + "x" +
                     std::to_string(adj.cols()) + " for n=" + std::to_string(n));
  for (int i = 0; i < n; ++i) {
    if (adj(i, i) != 0) throw StateError("graph: nonzero diagonal at " + std::to_string(i));
    for (int j = 0; j < n; ++j) {
      if (adj(i, j) != 0 && adj(i, j) != 1)
        throw StateError("graph: entry not 0/1 at (" + std::to_string(i) + "," +
                         std::to_string(j) + ")");
      if (adj(i, j) != adj(j, i))
        throw StateError("graph: asymmetric at (" + std::to_string(i) + "," +
                         std::to_string(j) + ")");
    }
  }
}

Graph generate_er(int n, double p, std::uint64_t seed) {
  if (n < 1) throw ParameterError("generate_er: n must be >= 1");
  if (p < 0.0 || p > 1.0) throw ParameterError("generate_er: p must be in [0,1]");
  Rng rng(seed);
  Graph g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.bernoulli(p)) g.add_edge(i, j);
  return g;
}

Graph generate_ws(int n, int k, double p_rewire, std::uint64_t seed) {
  if (n < 3) throw ParameterError("generate_ws: n must be >= 3");
  if (k < 2 || k % 2 != 0) throw ParameterError("generate_ws: k must be even and >= 2");
  if (k >= n) throw ParameterError("generate_ws: k must be < n");
  if (p_rewire < 0.0 || p_rewire > 1.0)
    throw ParameterError("generate_ws: p_rewire must be in [0,1]");
  Rng rng(seed);
  Graph g(n);
  for (int i = 0; i < n; ++i)
    for (int off = 1; off <= k / 2; ++off) g.add_edge(i, (i + off) % n);
  // Visit the clockwise lattice edges in construction order and rewire the far
  // endpoint with probability p_rewire. Redraw on a self-loop or an existing
  // edge; when node i is already saturated no valid target exists, so the
  // original edge is kept. Edge count is preserved either way.
  for (int i = 0; i < n; ++i) {
    for (int off = 1; off <= k / 2; ++off) {
      const int far = (i + off) % n;
      if (!rng.bernoulli(p_rewire)) continue;
      if (g.degree(i) >= n - 1) continue;
      int target;
      do {
        target = static_cast<int>(rng.uniform_int(0, n - 1));
      } while (target == i || g.has_edge(i, target));
      g.adj(i, far) = g.adj(far, i) = 0;
      g.add_edge(i, target);
    }
  }
  return g;
}

Graph generate_ba(int n, int m0, int k, std::uint64_t seed) {
  if (m0 < 3 || m0 > n) throw ParameterError("generate_ba: need 3 <= m0 <= n");
  if (k < 1 || k > m0) throw ParameterError("generate_ba: need 1 <= k <= m0");
  Rng rng(seed);
  Graph g(n);
  // Degree-weighted sampling uses the classic repeated-nodes list: each node
  // appears once per unit of degree.
  std::vector<int> repeated;
  for (int i = 0; i < m0; ++i) {
    const int j = (i + 1) % m0;
    g.add_edge(i, j);
    repeated.push_back(i);
    repeated.push_back(j);
  }
  for (int v = m0; v < n; ++v) {
    std::set<int> targets;
    while (static_cast<int>(targets.size()) < k) {
      const auto idx = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(repeated.size()) - 1));
      targets.insert(repeated[idx]);
    }
    for (int t : targets) {
      g.add_edge(v, t);
      repeated.push_back(v);
      repeated.push_back(t);
    }
  }
  return g;
}

std::vector<int> NodePartition::reorder() const {
  std::vector<int> order = observed;
  order.insert(order.end(), hidden.begin(), hidden.end());
  return order;
}

void NodePartition::validate(int n_total) const {
  if (n() != n_total)
    throw ParameterError("partition: observed+hidden = " + std::to_string(n()) +
                         " but graph has " + std::to_string(n_total) + " nodes");
  std::vector<bool> seen(static_cast<std::size_t>(n_total), false);
  auto mark = [&](const std::vector<int>& ids, const char* which) {
    int prev = -1;
    for (int id : ids) {
      if (id < 0 || id >= n_total)
        throw ParameterError(std::string("partition: ") + which + " id out of range");
      if (id <= prev) throw ParameterError(std::string("partition: ") + which + " not ascending");
      if (seen[static_cast<std::size_t>(id)])
        throw ParameterError("partition: node listed twice");
      seen[static_cast<std::size_t>(id)] = true;
      prev = id;
    }
  };
  mark(observed, "observed");
  mark(hidden, "hidden");
}

NodePartition partition_nodes(int n, int n_hidden, std::uint64_t seed) {
  if (n_hidden < 0 || n_hidden >= n)
    throw ParameterError("partition_nodes: need 0 <= n_hidden < n");
  Rng rng(seed);
  std::vector<int> hidden = rng.sample_without_replacement(n, n_hidden);
  std::sort(hidden.begin(), hidden.end());
  NodePartition p;
  p.hidden = hidden;
  std::vector<bool> is_hidden(static_cast<std::size_t>(n), false);
  for (int h : hidden) is_hidden[static_cast<std::size_t>(h)] = true;
  for (int i = 0; i < n; ++i)
    if (!is_hidden[static_cast<std::size_t>(i)]) p.observed.push_back(i);
  return p;
}

BoolMatrix unobserved_mask(const NodePartition& p) {
  const int n = p.n();
  const int n_obs = p.n_observed();
  BoolMatrix mask = BoolMatrix::Constant(n, n, true);
  mask.topLeftCorner(n_obs, n_obs).setConstant(false);
  return mask;
}

IntMatrix reorder_adjacency(const Graph& g, const NodePartition& p) {
  p.validate(g.n);
  const std::vector<int> order = p.reorder();
  IntMatrix out(g.n, g.n);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      out(i, j) = g.adj(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  return out;
}

StructuralStats structural_stats(const Graph& g) {
  g.validate();
  StructuralStats s;
  const int n = g.n;
  const double edges = g.num_edges();
  s.average_degree = n > 0 ? 2.0 * edges / n : 0.0;
  s.density = n > 1 ? edges / (0.5 * n * (n - 1)) : 0.0;

  const auto nbrs = g.adjacency_list();

  // Average local clustering; nodes of degree < 2 contribute 0.
  double clustering_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto& ni = nbrs[static_cast<std::size_t>(i)];
    const int d = static_cast<int>(ni.size());
    if (d < 2) continue;
    int links = 0;
    for (std::size_t a = 0; a < ni.size(); ++a)
      for (std::size_t b = a + 1; b < ni.size(); ++b)
        if (g.has_edge(ni[a], ni[b])) ++links;
    clustering_sum += 2.0 * links / (static_cast<double>(d) * (d - 1));
  }
  s.average_clustering = n > 0 ? clustering_sum / n : 0.0;

  // Connected components via BFS; mean shortest path over the largest one.
  std::vector<int> comp(static_cast<std::size_t>(n), -1);
  int n_comp = 0;
  for (int start = 0; start < n; ++start) {
    if (comp[static_cast<std::size_t>(start)] != -1) continue;
    std::deque<int> queue{start};
    comp[static_cast<std::size_t>(start)] = n_comp;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v : nbrs[static_cast<std::size_t>(u)]) {
        if (comp[static_cast<std::size_t>(v)] == -1) {
          comp[static_cast<std::size_t>(v)] = n_comp;
          queue.push_back(v);
        }
      }
    }
    ++n_comp;
  }
  std::vector<int> comp_size(static_cast<std::size_t>(n_comp), 0);
  for (int c : comp) ++comp_size[static_cast<std::size_t>(c)];
  const int big = static_cast<int>(std::max_element(comp_size.begin(), comp_size.end()) -
                                   comp_size.begin());
  s.largest_component = comp_size[static_cast<std::size_t>(big)];

  double dist_sum = 0.0;
  long pair_count = 0;
  for (int start = 0; start < n; ++start) {
    if (comp[static_cast<std::size_t>(start)] != big) continue;
    std::vector<int> dist(static_cast<std::size_t>(n), -1);
    std::deque<int> queue{start};
    dist[static_cast<std::size_t>(start)] = 0;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v : nbrs[static_cast<std::size_t>(u)]) {
        if (dist[static_cast<std::size_t>(v)] == -1) {
          dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
          queue.push_back(v);
        }
      }
    }
    for (int other = start + 1; other < n; ++other) {
      if (comp[static_cast<std::size_t>(other)] != big) continue;
      dist_sum += dist[static_cast<std::size_t>(other)];
      ++pair_count;
    }
  }
  s.average_path_length = pair_count > 0 ? dist_sum / static_cast<double>(pair_count) : 0.0;
  return s;
}

Graph load_edge_list(const std::string& path, int expected_n) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty edge list: " + path);
  // Tolerate a UTF-8 BOM and trailing CR.
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "src,dst") throw ParseError("edge list must start with header 'src,dst': " + path);

  std::vector<std::pair<int, int>> edges;
  int max_id = -1;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string a, b, extra;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected 'src,dst'");
    if (std::getline(ss, extra, ','))
      throw ParseError(path + ":" + std::to_string(line_no) + ": too many fields");
    int src, dst;
    try {
      std::size_t pa = 0, pb = 0;
      src = std::stoi(a, &pa);
      dst = std::stoi(b, &pb);
      if (pa != a.size() || pb != b.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": non-integer node id");
    }
    if (src < 0 || dst < 0)
      throw ParseError(path + ":" + std::to_string(line_no) + ": negative node id");
    if (expected_n >= 0 && (src >= expected_n || dst >= expected_n))
      throw ParameterError(path + ":" + std::to_string(line_no) + ": node id " +
                           std::to_string(std::max(src, dst)) + " >= declared n=" +
                           std::to_string(expected_n));
    if (src == dst) throw ParseError(path + ":" + std::to_string(line_no) + ": self-loop");
    edges.emplace_back(src, dst);
    max_id = std::max(max_id, std::max(src, dst));
  }
  if (edges.empty()) throw ParseError("edge list has no edges: " + path);

  const int n = expected_n >= 0 ? expected_n : max_id + 1;
  Graph g(n);
  for (auto [src, dst] : edges) {
    if (g.has_edge(src, dst))
      throw ParseError(path + ": duplicate edge " + std::to_string(src) + "," +
                       std::to_string(dst));
    g.add_edge(src, dst);
  }
  // Ids must be contiguous: a silent gap usually means a mangled file, and
  // compacting would silently change node identities.
  for (int i = 0; i < n; ++i)
    if (g.degree(i) == 0 && expected_n < 0)
      throw ParseError(path + ": node id " + std::to_string(i) +
                       " never appears (ids must be contiguous)");
  return g;
}

void save_edge_list(const Graph& g, const std::string& path) {
  g.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write edge list: " + path);
  out << "src,dst\n";
  for (int i = 0; i < g.n; ++i)
    for (int j = i + 1; j < g.n; ++j)
      if (g.has_edge(i, j)) out << i << "," << j << "\n";
  if (!out) throw IoError("write failed: " + path);
}

NodePartition load_partition(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open partition: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError("partition " + path + ": " + e.what());
  }
  if (!j.contains("n") || !j.contains("hidden"))
    throw ParseError("partition " + path + ": needs keys 'n' and 'hidden'");
  const int n = j.at("n").get<int>();
  std::vector<int> hidden = j.at("hidden").get<std::vector<int>>();
  std::sort(hidden.begin(), hidden.end());
  NodePartition p;
  p.hidden = hidden;
  std::vector<bool> is_hidden(static_cast<std::size_t>(n), false);
  for (int h : hidden) {
    if (h < 0 || h >= n) throw ParseError("partition " + path + ": hidden id out of range");
    if (is_hidden[static_cast<std::size_t>(h)])
      throw ParseError("partition " + path + ": duplicate hidden id");
    is_hidden[static_cast<std::size_t>(h)] = true;
  }
  for (int i = 0; i < n; ++i)
    if (!is_hidden[static_cast<std::size_t>(i)]) p.observed.push_back(i);
  p.validate(n);
  return p;
}

void save_partition(const NodePartition& p, const std::string& path) {
  nlohmann::json j;
  j["n"] = p.n();
  j["hidden"] = p.hidden;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write partition: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace ginet
