#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace camoe {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr int kNoNode = -1;

/// Nodes scattered in the square [0, L]^2 with an edge between every pair
/// at Euclidean distance <= R. Immutable once built.
class EuclideanGraph {
 public:
  using Coords = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

  EuclideanGraph() = default;

  /// Builds adjacency from the radius rule. `density` is stored as metadata
  /// and determines side() = sqrt(n R^2 / density).
  EuclideanGraph(Coords coords, double radius, double density, std::uint64_t seed = 0);

  int size() const noexcept { return static_cast<int>(coords_.rows()); }
  double radius() const noexcept { return radius_; }
  double density() const noexcept { return density_; }
  double side() const noexcept { return side_; }
  std::uint64_t seed() const noexcept { return seed_; }
  /// Graphs are identified by their generation seed.
  std::uint64_t id() const noexcept { return seed_; }

  const Coords& coords() const noexcept { return coords_; }
  Eigen::Vector2d position(int v) const { return coords_.row(v).transpose(); }
  double distance(int a, int b) const { return (coords_.row(a) - coords_.row(b)).norm(); }

  std::span<const int> neighbors(int v) const { return adjacency_[static_cast<std::size_t>(v)]; }
  int degree(int v) const { return static_cast<int>(adjacency_[static_cast<std::size_t>(v)].size()); }
  bool adjacent(int a, int b) const;
  std::size_t edge_count() const noexcept { return edge_count_; }
  /// Undirected edges as (i, j) with i < j, sorted.
  std::vector<std::pair<int, int>> edges() const;

 private:
  Coords coords_;
  double radius_ = 0.0;
  double density_ = 0.0;
  double side_ = 0.0;
  std::uint64_t seed_ = 0;
  std::vector<std::vector<int>> adjacency_;
  std::size_t edge_count_ = 0;
};

/// Uniform random placement of n nodes in the square of side sqrt(n R^2 / rho).
EuclideanGraph generate_graph(int n, double density, double radius, std::uint64_t seed);

nlohmann::json to_json(const EuclideanGraph& g);
/// Rejects files whose edge list disagrees with the radius rule.
EuclideanGraph graph_from_json(const nlohmann::json& j);

/// Exact all-pairs shortest paths under Euclidean edge lengths.
class PathOracle {
 public:
  PathOracle() = default;
  explicit PathOracle(const EuclideanGraph& g);

  int size() const noexcept { return static_cast<int>(dist_.rows()); }
  double distance(int from, int to) const { return dist_(from, to); }
  /// First hop of a shortest from->to path; kNoNode if from == to or unreachable.
  int next_hop(int from, int to) const { return next_(from, to); }
  bool connected(int a, int b) const { return dist_(a, b) < kInfinity; }
  const Eigen::MatrixXd& distances() const noexcept { return dist_; }

 private:
  Eigen::MatrixXd dist_;
  Eigen::MatrixXi next_;
};

inline PathOracle all_pairs_shortest_paths(const EuclideanGraph& g) { return PathOracle(g); }

/// zeta(O, D) = d_sp(O, D) / d_e(O, D).
double path_stretch(const PathOracle& paths, const EuclideanGraph& g, int origin, int destination);

/// Q*(v -> u | D) = -(d_e(v, u) + d_sp(u, D)); -infinity when u cannot reach D.
double optimal_q(const PathOracle& paths, const EuclideanGraph& g, int destination, int v, int u);

/// The unit of per-hop inference: a packet from `origin` to `destination`
/// sitting at `current`.
struct RoutingSample {
  int origin = kNoNode;
  int destination = kNoNode;
  int current = kNoNode;
  std::span<const int> neighbors;
};

RoutingSample make_sample(const EuclideanGraph& g, int origin, int destination, int current);

/// Connected ordered pairs (O, D) with O != D, in row-major order.
std::vector<std::pair<int, int>> connected_pairs(const PathOracle& paths);

/// Nodes of the shortest origin->destination path following next_hop, both
/// endpoints included. Empty when unreachable.
std::vector<int> shortest_path_nodes(const PathOracle& paths, int origin, int destination);

}  // namespace camoe
