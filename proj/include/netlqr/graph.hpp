#pragma once

#include <map>
#include <string_view>
#include <utility>
#include <vector>

namespace netlqr {

// Nodes are 0-based in the library API; files and the CLI use 1-based ids.
struct Graph {
  int num_nodes = 0;
  std::vector<std::pair<int, int>> edges;  // sorted, first < second
  std::vector<std::vector<int>> adjacency; // sorted neighbor lists

  bool has_edge(int i, int j) const;
  std::size_t num_edges() const { return edges.size(); }
};

Graph build_graph(int num_nodes, const std::vector<std::pair<int, int>>& edges);
Graph build_mesh(int rows, int cols);

inline constexpr int kUnreachable = -1;

class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(int n) : n_(n), d_(static_cast<std::size_t>(n) * n, kUnreachable) {}

  int size() const { return n_; }
  int operator()(int i, int j) const { return d_[static_cast<std::size_t>(i) * n_ + j]; }
  int& at(int i, int j) { return d_[static_cast<std::size_t>(i) * n_ + j]; }
  bool reachable(int i, int j) const { return (*this)(i, j) != kUnreachable; }
  bool connected() const;

 private:
  int n_ = 0;
  std::vector<int> d_;
};

DistanceMatrix all_pairs_distances(const Graph& g);

// {j : d(i,j) <= kappa}, ascending.
std::vector<int> neighborhood(const DistanceMatrix& dist, int i, int kappa);

// Entry d holds max_i |{j : d(i,j) = d}|, for d = 0..diameter.
std::vector<int> growth_profile(const DistanceMatrix& dist);

int diameter(const DistanceMatrix& dist);

using EdgeWeights = std::map<std::pair<int, int>, double>;

// Weight of edge {i,j} regardless of orientation; throws if absent.
double edge_weight(const EdgeWeights& w, int i, int j);

struct EdgeList {
  Graph graph;
  EdgeWeights weights;  // keyed by (min, max), 0-based
};

// Lines "i j [w]" with 1-based ids, '#' comments. The node count is the
// largest id seen, or min_nodes if that is larger.
EdgeList parse_edge_list(std::string_view text, int min_nodes = 0);

}  // namespace netlqr
