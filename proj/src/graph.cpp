#include "netlqr/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <sstream>
#include <string>

#include "netlqr/errors.hpp"

namespace netlqr {

bool Graph::has_edge(int i, int j) const {
  if (i < 0 || i >= num_nodes) return false;
  const auto& a = adjacency[i];
  return std::binary_search(a.begin(), a.end(), j);
}

Graph build_graph(int num_nodes, const std::vector<std::pair<int, int>>& edges) {
  if (num_nodes < 1) throw InvalidArgument("graph needs at least one node");
  Graph g;
  g.num_nodes = num_nodes;
  for (auto [i, j] : edges) {
    if (i < 0 || j < 0 || i >= num_nodes || j >= num_nodes)
      throw InvalidArgument("edge endpoint out of range: (" + std::to_string(i + 1) + "," +
                            std::to_string(j + 1) + ")");
    if (i == j) throw InvalidArgument("self-loop at node " + std::to_string(i + 1));
    g.edges.emplace_back(std::min(i, j), std::max(i, j));
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  g.adjacency.assign(num_nodes, {});
  for (auto [i, j] : g.edges) {
    g.adjacency[i].push_back(j);
    g.adjacency[j].push_back(i);
  }
  for (auto& a : g.adjacency) std::sort(a.begin(), a.end());
  return g;
}

Graph build_mesh(int rows, int cols) {
  if (rows < 1 || cols < 1) throw InvalidArgument("mesh dimensions must be positive");
  std::vector<std::pair<int, int>> e;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      int n = r * cols + c;
      if (c + 1 < cols) e.emplace_back(n, n + 1);
      if (r + 1 < rows) e.emplace_back(n, n + cols);
    }
  return build_graph(rows * cols, e);
}

bool DistanceMatrix::connected() const {
  return std::none_of(d_.begin(), d_.end(), [](int v) { return v == kUnreachable; });
}

DistanceMatrix all_pairs_distances(const Graph& g) {
  DistanceMatrix dist(g.num_nodes);
  std::deque<int> q;
  for (int s = 0; s < g.num_nodes; ++s) {
    dist.at(s, s) = 0;
    q.assign(1, s);
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (int v : g.adjacency[u])
        if (dist(s, v) == kUnreachable) {
          dist.at(s, v) = dist(s, u) + 1;
          q.push_back(v);
        }
    }
  }
  return dist;
}

std::vector<int> neighborhood(const DistanceMatrix& dist, int i, int kappa) {
  if (i < 0 || i >= dist.size()) throw InvalidArgument("node out of range");
  if (kappa < 0) throw InvalidArgument("kappa must be nonnegative");
  std::vector<int> out;
  for (int j = 0; j < dist.size(); ++j)
    if (dist.reachable(i, j) && dist(i, j) <= kappa) out.push_back(j);
  return out;
}

int diameter(const DistanceMatrix& dist) {
  if (!dist.connected()) throw InvalidArgument("diameter of a disconnected graph");
  int d = 0;
  for (int i = 0; i < dist.size(); ++i)
    for (int j = 0; j < dist.size(); ++j) d = std::max(d, dist(i, j));
  return d;
}

std::vector<int> growth_profile(const DistanceMatrix& dist) {
  const int diam = diameter(dist);
  std::vector<int> p(diam + 1, 0);
  std::vector<int> count(diam + 1);
  for (int i = 0; i < dist.size(); ++i) {
    std::fill(count.begin(), count.end(), 0);
    for (int j = 0; j < dist.size(); ++j) ++count[dist(i, j)];
    for (int d = 0; d <= diam; ++d) p[d] = std::max(p[d], count[d]);
  }
  return p;
}

double edge_weight(const EdgeWeights& w, int i, int j) {
  auto it = w.find({std::min(i, j), std::max(i, j)});
  if (it == w.end())
    throw InvalidArgument("missing weight for edge (" + std::to_string(i + 1) + "," +
                          std::to_string(j + 1) + ")");
  return it->second;
}

namespace {

bool parse_int(const std::string& s, int& out) {
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

bool parse_real(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size() && std::isfinite(out);
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

EdgeList parse_edge_list(std::string_view text, int min_nodes) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  int max_id = 0;
  std::vector<std::pair<int, int>> edges;
  EdgeWeights weights;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    auto fail = [&](const std::string& why) {
      return ConfigError("edge list line " + std::to_string(lineno) + ": " + why);
    };
    if (tok.size() < 2 || tok.size() > 3) throw fail("expected 'i j [w]'");
    int i = 0, j = 0;
    double w = 1.0;
    if (!parse_int(tok[0], i) || !parse_int(tok[1], j)) throw fail("non-integer endpoint");
    if (tok.size() == 3 && !parse_real(tok[2], w)) throw fail("bad weight '" + tok[2] + "'");
    if (i < 1 || j < 1) throw fail("node ids start at 1");
    if (i == j) throw fail("self-loop");
    max_id = std::max({max_id, i, j});
    std::pair<int, int> key{std::min(i, j) - 1, std::max(i, j) - 1};
    auto [it, inserted] = weights.emplace(key, w);
    if (!inserted) {
      if (it->second != w) throw fail("duplicate edge with conflicting weight");
      continue;
    }
    edges.push_back(key);
  }
  int n = std::max(max_id, min_nodes);
  if (n < 1) throw ConfigError("edge list defines no nodes");
  return EdgeList{build_graph(n, edges), std::move(weights)};
}

}  // namespace netlqr
