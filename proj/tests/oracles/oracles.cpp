#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace oracle {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::vector<Edge> radius_edges(const std::vector<Point>& pts, double radius) {
  std::vector<Edge> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double dx = pts[i][0] - pts[j][0];
      const double dy = pts[i][1] - pts[j][1];
      const double d = std::sqrt(dx * dx + dy * dy);
      if (d <= radius) out.push_back({static_cast<int>(i), static_cast<int>(j), d});
    }
  }
  return out;
}

Matrix apsp(int n, const std::vector<Edge>& edges) {
  if (n > 30) throw std::invalid_argument("oracle limited to n <= 30");
  Matrix dist(n, std::vector<double>(n, kInf));
  for (int s = 0; s < n; ++s) {
    auto& d = dist[s];
    d[s] = 0.0;
    for (int round = 0; round < n - 1; ++round) {
      bool changed = false;
      for (const auto& e : edges) {
        if (d[e.a] + e.weight < d[e.b]) d[e.b] = d[e.a] + e.weight, changed = true;
        if (d[e.b] + e.weight < d[e.a]) d[e.a] = d[e.b] + e.weight, changed = true;
      }
      if (!changed) break;
    }
  }
  return dist;
}

namespace {

Matrix invert(Matrix a) {
  const std::size_t m = a.size();
  Matrix inv(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < 1e-300) throw std::runtime_error("singular grounded Laplacian");
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const double p = a[col][col];
    for (std::size_t c = 0; c < m; ++c) a[col][c] /= p, inv[col][c] /= p;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col || a[r][col] == 0.0) continue;
      const double f = a[r][col];
      for (std::size_t c = 0; c < m; ++c) a[r][c] -= f * a[col][c], inv[r][c] -= f * inv[col][c];
    }
  }
  return inv;
}

}  // namespace

Matrix resistance(int n, const std::vector<Edge>& conductances) {
  if (n > 30) throw std::invalid_argument("oracle limited to n <= 30");
  // Components by repeated label propagation.
  std::vector<int> comp(n);
  for (int i = 0; i < n; ++i) comp[i] = i;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& e : conductances) {
      const int lo = std::min(comp[e.a], comp[e.b]);
      if (comp[e.a] != lo || comp[e.b] != lo) comp[e.a] = comp[e.b] = lo, changed = true;
    }
  }
  Matrix omega(n, std::vector<double>(n, kInf));
  for (int root = 0; root < n; ++root) {
    std::vector<int> members;
    for (int i = 0; i < n; ++i)
      if (comp[i] == root) members.push_back(i);
    if (members.empty()) continue;
    // Ground members[0]; the reduced Laplacian covers the rest.
    const std::size_t m = members.size() - 1;
    std::vector<int> index(n, -1);
    for (std::size_t k = 1; k < members.size(); ++k) index[members[k]] = static_cast<int>(k - 1);
    Matrix lap(m, std::vector<double>(m, 0.0));
    for (const auto& e : conductances) {
      if (comp[e.a] != root) continue;
      const int ia = index[e.a];
      const int ib = index[e.b];
      if (ia >= 0) lap[ia][ia] += e.weight;
      if (ib >= 0) lap[ib][ib] += e.weight;
      if (ia >= 0 && ib >= 0) lap[ia][ib] -= e.weight, lap[ib][ia] -= e.weight;
    }
    const Matrix inv = m > 0 ? invert(lap) : Matrix{};
    auto g = [&](int x, int y) { return index[x] < 0 || index[y] < 0 ? 0.0 : inv[index[x]][index[y]]; };
    for (int x : members)
      for (int y : members) omega[x][y] = x == y ? 0.0 : g(x, x) + g(y, y) - 2.0 * g(x, y);
  }
  return omega;
}

bool eta(double d_p, double d_sp, double d_e, double eps) {
  if (d_e == 0.0) throw std::invalid_argument("eta undefined for d_e = 0");
  const double zeta = d_sp / d_e;
  return d_p / d_sp <= zeta * (1.0 + eps);
}

double forward(const Net& net, const std::vector<double>& x) {
  std::vector<double> a = x;
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    std::vector<double> z(net.weights[k].size());
    for (std::size_t o = 0; o < z.size(); ++o) {
      double s = net.biases[k][o];
      for (std::size_t i = 0; i < a.size(); ++i) s += net.weights[k][o][i] * a[i];
      const bool last = k + 1 == net.weights.size();
      if (!last) s = net.relu ? (s > 0.0 ? s : 0.0) : std::tanh(s);
      z[o] = s;
    }
    a = std::move(z);
  }
  return net.classifier ? 1.0 / (1.0 + std::exp(-a[0])) : a[0];
}

double loss(const Net& net, const std::vector<std::vector<double>>& xs, const std::vector<double>& ys) {
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double out = forward(net, xs[i]);
    if (net.classifier)
      total += -(ys[i] * std::log(out) + (1.0 - ys[i]) * std::log(1.0 - out));
    else
      total += (out - ys[i]) * (out - ys[i]);
  }
  return total / static_cast<double>(xs.size());
}

std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> params, double h) {
  std::vector<double> grad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = f(params);
    params[i] = saved - h;
    const double down = f(params);
    params[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

std::vector<double> flatten(const Net& net) {
  std::vector<double> out;
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    for (const auto& row : net.weights[k]) out.insert(out.end(), row.begin(), row.end());
    out.insert(out.end(), net.biases[k].begin(), net.biases[k].end());
  }
  return out;
}

Net unflatten(const Net& shape, const std::vector<double>& params) {
  Net net = shape;
  std::size_t p = 0;
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    for (auto& row : net.weights[k])
      for (auto& w : row) w = params[p++];
    for (auto& b : net.biases[k]) b = params[p++];
  }
  return net;
}

}  // namespace oracle
