#include "camoe/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "camoe/errors.hpp"
#include "camoe/rng.hpp"

namespace camoe {

EuclideanGraph::EuclideanGraph(Coords coords, double radius, double density, std::uint64_t seed)
    : coords_(std::move(coords)), radius_(radius), density_(density), seed_(seed) {
  if (!(radius > 0.0) || !(density > 0.0))
    throw InvalidArgument("graph radius and density must be positive");
  if (!coords_.allFinite()) throw DataError("graph coordinates must be finite");
  const int n = size();
  side_ = std::sqrt(n * radius * radius / density);
  adjacency_.assign(static_cast<std::size_t>(n), {});
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (distance(i, j) <= radius) {
        adjacency_[static_cast<std::size_t>(i)].push_back(j);
        adjacency_[static_cast<std::size_t>(j)].push_back(i);
        ++edge_count_;
      }
    }
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());
}

bool EuclideanGraph::adjacent(int a, int b) const {
  const auto nbrs = neighbors(a);
  return std::binary_search(nbrs.begin(), nbrs.end(), b);
}

std::vector<std::pair<int, int>> EuclideanGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(edge_count_);
  for (int i = 0; i < size(); ++i)
    for (int j : neighbors(i))
      if (i < j) out.emplace_back(i, j);
  return out;
}

EuclideanGraph generate_graph(int n, double density, double radius, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("node count must be positive");
  if (!(density > 0.0)) throw InvalidArgument("density must be positive");
  if (!(radius > 0.0)) throw InvalidArgument("radius must be positive");
  const double side = std::sqrt(n * radius * radius / density);
  SplitMix64 rng(derive_seed(seed, 0x6e6f646573ull));
  EuclideanGraph::Coords coords(n, 2);
  for (int i = 0; i < n; ++i) {
    coords(i, 0) = uniform(rng, 0.0, side);
    coords(i, 1) = uniform(rng, 0.0, side);
  }
  return EuclideanGraph(std::move(coords), radius, density, seed);
}

nlohmann::json to_json(const EuclideanGraph& g) {
  nlohmann::json coords = nlohmann::json::array();
  for (int i = 0; i < g.size(); ++i) coords.push_back({g.coords()(i, 0), g.coords()(i, 1)});
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [i, j] : g.edges()) edges.push_back({i, j});
  return {{"n", g.size()},       {"rho", g.density()}, {"R", g.radius()},
          {"seed", g.seed()},    {"coords", coords},   {"edges", edges}};
}

EuclideanGraph graph_from_json(const nlohmann::json& j) {
  try {
    const int n = j.at("n").get<int>();
    const auto& jc = j.at("coords");
    if (static_cast<int>(jc.size()) != n) throw DataError("graph file: coords length != n");
    EuclideanGraph::Coords coords(n, 2);
    for (int i = 0; i < n; ++i) {
      coords(i, 0) = jc.at(i).at(0).get<double>();
      coords(i, 1) = jc.at(i).at(1).get<double>();
    }
    EuclideanGraph g(std::move(coords), j.at("R").get<double>(), j.at("rho").get<double>(),
                     j.at("seed").get<std::uint64_t>());
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j.at("edges")) {
      int a = e.at(0).get<int>();
      int b = e.at(1).get<int>();
      if (a > b) std::swap(a, b);
      edges.emplace_back(a, b);
    }
    std::sort(edges.begin(), edges.end());
    if (edges != g.edges()) throw DataError("graph file: edge list disagrees with the radius rule");
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("graph file: ") + e.what());
  }
}

PathOracle::PathOracle(const EuclideanGraph& g) {
  const int n = g.size();
  dist_ = Eigen::MatrixXd::Constant(n, n, kInfinity);
  next_ = Eigen::MatrixXi::Constant(n, n, kNoNode);

  using Entry = std::pair<double, int>;
  for (int src = 0; src < n; ++src) {
    auto row = dist_.row(src);
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    row(src) = 0.0;
    heap.emplace(0.0, src);
    while (!heap.empty()) {
      const auto [d, v] = heap.top();
      heap.pop();
      if (d > row(v)) continue;
      for (int u : g.neighbors(v)) {
        const double cand = d + g.distance(v, u);
        if (cand < row(u)) {
          row(u) = cand;
          heap.emplace(cand, u);
        }
      }
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) dist_(j, i) = dist_(i, j);

  // Lowest-id neighbor attaining the minimum wins ties.
  for (int from = 0; from < n; ++from) {
    for (int to = 0; to < n; ++to) {
      if (from == to || dist_(from, to) == kInfinity) continue;
      double best = kInfinity;
      for (int u : g.neighbors(from)) {
        const double via = g.distance(from, u) + dist_(u, to);
        if (via < best) {
          best = via;
          next_(from, to) = u;
        }
      }
    }
  }
}

double path_stretch(const PathOracle& paths, const EuclideanGraph& g, int origin, int destination) {
  if (origin == destination) throw InvalidArgument("path stretch undefined for O == D");
  if (!paths.connected(origin, destination))
    throw InvalidArgument("path stretch undefined for a disconnected pair");
  return paths.distance(origin, destination) / g.distance(origin, destination);
}

double optimal_q(const PathOracle& paths, const EuclideanGraph& g, int destination, int v, int u) {
  const double rest = paths.distance(u, destination);
  if (rest == kInfinity) return -kInfinity;
  return -(g.distance(v, u) + rest);
}

RoutingSample make_sample(const EuclideanGraph& g, int origin, int destination, int current) {
  if (origin == destination) throw InvalidArgument("routing sample requires O != D");
  return RoutingSample{origin, destination, current, g.neighbors(current)};
}

std::vector<std::pair<int, int>> connected_pairs(const PathOracle& paths) {
  std::vector<std::pair<int, int>> out;
  const int n = paths.size();
  for (int o = 0; o < n; ++o)
    for (int d = 0; d < n; ++d)
      if (o != d && paths.connected(o, d)) out.emplace_back(o, d);
  return out;
}

std::vector<int> shortest_path_nodes(const PathOracle& paths, int origin, int destination) {
  if (!paths.connected(origin, destination)) return {};
  std::vector<int> out{origin};
  int v = origin;
  while (v != destination) {
    v = paths.next_hop(v, destination);
    if (v == kNoNode || static_cast<int>(out.size()) > paths.size())
      throw InvariantViolation("next-hop table does not reach the destination");
    out.push_back(v);
  }
  return out;
}

}  // namespace camoe
