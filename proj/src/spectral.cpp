#include "camoe/spectral.hpp"

#include <bit>
#include <cstring>

#include "camoe/errors.hpp"

namespace camoe {

Eigen::MatrixXd laplacian(const EuclideanGraph& g, Conductance conductance) {
  const int n = g.size();
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, j] : g.edges()) {
    const double w = conductance == Conductance::Unit ? 1.0 : g.radius() / g.distance(i, j);
    lap(i, j) -= w;
    lap(j, i) -= w;
    lap(i, i) += w;
    lap(j, j) += w;
  }
  return lap;
}

ResistanceOracle::ResistanceOracle(Eigen::MatrixXd omega, std::vector<int> component)
    : omega_(std::move(omega)), component_(std::move(component)) {
  if (omega_.rows() != omega_.cols() ||
      static_cast<std::size_t>(omega_.rows()) != component_.size())
    throw InvalidArgument("resistance matrix and component labels disagree in size");
}

ResistanceOracle resistance_oracle(const EuclideanGraph& g, Conductance conductance) {
  const Eigen::MatrixXd lap = laplacian(g, conductance);
  return ResistanceOracle(effective_resistance(lap), component_labels(lap));
}

namespace {

std::uint64_t fnv1a(std::uint64_t h, double value) {
  const auto bits = std::bit_cast<std::uint64_t>(value);
  for (int k = 0; k < 8; ++k) {
    h ^= (bits >> (8 * k)) & 0xffu;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

std::uint64_t graph_fingerprint(const EuclideanGraph& g) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  h = fnv1a(h, g.radius());
  h = fnv1a(h, g.density());
  for (int i = 0; i < g.size(); ++i) {
    h = fnv1a(h, g.coords()(i, 0));
    h = fnv1a(h, g.coords()(i, 1));
  }
  return h;
}

std::string to_string(Conductance c) {
  return c == Conductance::Unit ? "unit" : "inverse-length";
}

Conductance conductance_from_string(const std::string& s) {
  if (s == "unit") return Conductance::Unit;
  if (s == "inverse-length") return Conductance::InverseLength;
  throw InvalidArgument("unknown conductance '" + s + "'");
}

nlohmann::json resistance_to_json(const ResistanceOracle& oracle, std::uint64_t key,
                                  Conductance conductance) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < oracle.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < oracle.size(); ++j) {
      const double r = oracle.query(i, j);
      row.push_back(r == kInfinity ? nlohmann::json(nullptr) : nlohmann::json(r));
    }
    rows.push_back(std::move(row));
  }
  std::vector<int> component(static_cast<std::size_t>(oracle.size()));
  for (int i = 0; i < oracle.size(); ++i) component[static_cast<std::size_t>(i)] = oracle.component(i);
  return {{"key", key}, {"conductance", to_string(conductance)}, {"omega", rows},
          {"component", component}};
}

std::optional<ResistanceOracle> resistance_from_json(const nlohmann::json& j, std::uint64_t key,
                                                     Conductance conductance) {
  try {
    if (j.at("key").get<std::uint64_t>() != key) return std::nullopt;
    if (j.at("conductance").get<std::string>() != to_string(conductance)) return std::nullopt;
    const auto& rows = j.at("omega");
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd omega(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < n; ++k) {
        const auto& cell = rows.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(k));
        omega(i, k) = cell.is_null() ? kInfinity : cell.get<double>();
      }
    return ResistanceOracle(std::move(omega), j.at("component").get<std::vector<int>>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("resistance cache: ") + e.what());
  }
}

}  // namespace camoe
