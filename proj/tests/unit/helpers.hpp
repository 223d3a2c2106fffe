#pragma once

#include <vector>

#include "camoe/graph.hpp"
#include "camoe/mlp.hpp"
#include "oracles.hpp"

namespace camoe::test {

inline EuclideanGraph make_graph(std::vector<std::array<double, 2>> pts, double radius, double density = 1.0) {
  EuclideanGraph::Coords c(static_cast<Eigen::Index>(pts.size()), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) c.row(static_cast<Eigen::Index>(i)) << pts[i][0], pts[i][1];
  return EuclideanGraph(std::move(c), radius, density);
}

inline std::vector<oracle::Point> points(const EuclideanGraph& g) {
  std::vector<oracle::Point> out;
  for (int i = 0; i < g.size(); ++i) out.push_back({g.coords()(i, 0), g.coords()(i, 1)});
  return out;
}

inline std::vector<oracle::Edge> unit_edges(const EuclideanGraph& g) {
  std::vector<oracle::Edge> out;
  for (const auto& e : oracle::radius_edges(points(g), g.radius())) out.push_back({e.a, e.b, 1.0});
  return out;
}

inline oracle::Net to_oracle(const Network& m) {
  oracle::Net net;
  net.relu = m.activation() == Activation::Relu;
  net.classifier = m.mode() == HeadMode::Classifier;
  for (const auto& l : m.layers()) {
    oracle::Matrix w(static_cast<std::size_t>(l.weights.rows()), std::vector<double>(static_cast<std::size_t>(l.weights.cols())));
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) w[r][c] = l.weights(r, c);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(l.bias.data(), l.bias.data() + l.bias.size());
  }
  return net;
}

inline std::vector<double> flatten(const std::vector<Network::Layer>& layers) {
  std::vector<double> out;
  for (const auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) out.push_back(l.weights(r, c));
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) out.push_back(l.bias(r));
  }
  return out;
}

// True when some ReLU pre-activation of any column lies within `margin` of
// zero, where the loss is not differentiable and finite differences disagree.
inline bool near_kink(const Network& m, const Eigen::MatrixXd& xs, double margin = 1e-4) {
  if (m.activation() != Activation::Relu) return false;
  Eigen::MatrixXd a = xs;
  for (std::size_t k = 0; k + 1 < m.layers().size(); ++k) {
    const Eigen::MatrixXd z = (m.layers()[k].weights * a).colwise() + m.layers()[k].bias;
    if ((z.array().abs() < margin).any()) return true;
    a = z.cwiseMax(0.0);
  }
  return false;
}

}  // namespace camoe::test
