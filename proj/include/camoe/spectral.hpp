#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "camoe/graph.hpp"

namespace camoe {

/// Edge conductances used to assemble the Laplacian.
enum class Conductance {
  Unit,           ///< every edge is a 1-ohm resistor
  InverseLength,  ///< conductance R / d_e(i, j)
};

/// Connected-component label per node, read off the nonzero off-diagonal
/// pattern of a symmetric matrix. Labels are assigned in order of the lowest
/// member node.
template <typename Derived>
std::vector<int> component_labels(const Eigen::MatrixBase<Derived>& sym) {
  const Eigen::Index n = sym.rows();
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  std::vector<Eigen::Index> stack;
  int next = 0;
  for (Eigen::Index s = 0; s < n; ++s) {
    if (label[static_cast<std::size_t>(s)] != -1) continue;
    label[static_cast<std::size_t>(s)] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const Eigen::Index v = stack.back();
      stack.pop_back();
      for (Eigen::Index u = 0; u < n; ++u) {
        if (u != v && sym(v, u) != 0 && label[static_cast<std::size_t>(u)] == -1) {
          label[static_cast<std::size_t>(u)] = next;
          stack.push_back(u);
        }
      }
    }
    ++next;
  }
  return label;
}

/// Moore-Penrose pseudoinverse of a symmetric positive semidefinite matrix.
/// Eigenvalues at or below `cutoff` are treated as the null space.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> psd_pseudo_inverse(
    const Eigen::MatrixBase<Derived>& sym, typename Derived::Scalar cutoff) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym.eval());
  auto inv = eig.eigenvalues().unaryExpr([cutoff](Scalar lambda) {
    return lambda > cutoff ? Scalar(1) / lambda : Scalar(0);
  });
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

/// Effective resistance between every pair of nodes of the electrical network
/// whose weighted Laplacian is `laplacian`:
///   Omega(i, j) = L+_ii + L+_jj - 2 L+_ij
/// computed per connected component. Pairs in different components are +inf.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> effective_resistance(
    const Eigen::MatrixBase<Derived>& laplacian,
    typename Derived::Scalar cutoff = typename Derived::Scalar(1e-10)) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = laplacian.rows();
  Matrix omega = Matrix::Constant(n, n, std::numeric_limits<Scalar>::infinity());
  const std::vector<int> label = component_labels(laplacian);
  const int components = label.empty() ? 0 : *std::max_element(label.begin(), label.end()) + 1;
  for (int c = 0; c < components; ++c) {
    std::vector<Eigen::Index> members;
    for (Eigen::Index i = 0; i < n; ++i)
      if (label[static_cast<std::size_t>(i)] == c) members.push_back(i);
    const Matrix block = laplacian(members, members);
    const Matrix pinv = psd_pseudo_inverse(block, cutoff);
    const auto diag = pinv.diagonal();
    const Eigen::Index m = static_cast<Eigen::Index>(members.size());
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b < m; ++b) {
        Scalar r = a == b ? Scalar(0) : diag(a) + diag(b) - Scalar(2) * pinv(a, b);
        omega(members[a], members[b]) = r < Scalar(0) ? Scalar(0) : r;
      }
    }
  }
  // Exact symmetry regardless of rounding in the eigensolver.
  return ((omega + omega.transpose()) / Scalar(2)).eval();
}

Eigen::MatrixXd laplacian(const EuclideanGraph& g, Conductance conductance = Conductance::Unit);

/// Pairwise effective resistances of a graph. Immutable after construction.
class ResistanceOracle {
 public:
  ResistanceOracle() = default;
  ResistanceOracle(Eigen::MatrixXd omega, std::vector<int> component);

  int size() const noexcept { return static_cast<int>(omega_.rows()); }
  /// Constant-time lookup; +inf across components.
  double query(int i, int j) const { return omega_(i, j); }
  int component(int v) const { return component_[static_cast<std::size_t>(v)]; }
  const Eigen::MatrixXd& matrix() const noexcept { return omega_; }

 private:
  Eigen::MatrixXd omega_;
  std::vector<int> component_;
};

ResistanceOracle resistance_oracle(const EuclideanGraph& g,
                                   Conductance conductance = Conductance::Unit);

inline double resistance_query(const ResistanceOracle& oracle, int i, int j) {
  return oracle.query(i, j);
}

/// Content hash of a graph (coordinates, radius, density), used as cache key.
std::uint64_t graph_fingerprint(const EuclideanGraph& g);

/// JSON cache: {"key": fingerprint, "conductance": ..., "omega": [[...]],
/// "component": [...]}. Infinite entries are stored as null.
nlohmann::json resistance_to_json(const ResistanceOracle& oracle, std::uint64_t key,
                                  Conductance conductance);
/// nullopt when the key or conductance does not match.
std::optional<ResistanceOracle> resistance_from_json(const nlohmann::json& j, std::uint64_t key,
                                                     Conductance conductance);

std::string to_string(Conductance c);
Conductance conductance_from_string(const std::string& s);

}  // namespace camoe
