#pragma once

// Brute-force reference implementations for cross-checking the library.
// They share no algorithmic code with it and only accept small inputs.

#include <array>
#include <functional>
#include <vector>

namespace oracle {

using Point = std::array<double, 2>;
using Matrix = std::vector<std::vector<double>>;

struct Edge {
  int a;
  int b;
  double weight;  ///< length for paths, conductance for resistance
};

/// Radius-rule edges with Euclidean lengths, i < j.
std::vector<Edge> radius_edges(const std::vector<Point>& pts, double radius);

/// Bellman-Ford from every source; +inf for unreachable pairs.
Matrix apsp(int n, const std::vector<Edge>& edges);

/// Effective resistance from the inverse of each component's grounded
/// Laplacian (Gauss-Jordan with partial pivoting); +inf across components.
Matrix resistance(int n, const std::vector<Edge>& conductances);

/// Indicator d_p / d_sp <= zeta (1 + eps), zeta = d_sp / d_e. Throws on d_e = 0.
bool eta(double d_p, double d_sp, double d_e, double eps);

/// Plain nested-loop network: weights[k][out][in], biases[k][out].
struct Net {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
  bool relu = true;
  bool classifier = false;
};

double forward(const Net& net, const std::vector<double>& x);

/// Mean loss over samples: squared error or cross-entropy of the logistic output.
double loss(const Net& net, const std::vector<std::vector<double>>& xs, const std::vector<double>& ys);

/// Central differences of f around params with step h.
std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> params, double h = 1e-5);

/// Parameters flattened as weights row-major then bias, layer by layer.
std::vector<double> flatten(const Net& net);
Net unflatten(const Net& shape, const std::vector<double>& params);

}  // namespace oracle
