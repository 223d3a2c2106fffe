#include "camoe/experts.hpp"

#include <algorithm>
#include <cmath>

#include "camoe/errors.hpp"

namespace camoe {

std::string_view short_name(ExpertKind kind) {
  switch (kind) {
    case ExpertKind::GreedyTensile: return "GT";
    case ExpertKind::GreedyLax: return "GL";
    case ExpertKind::GreedySpectral: return "GS";
  }
  return "?";
}

ExpertKind expert_from_string(std::string_view s) {
  if (s == "GT" || s == "greedy-tensile") return ExpertKind::GreedyTensile;
  if (s == "GL" || s == "greedy-lax") return ExpertKind::GreedyLax;
  if (s == "GS" || s == "greedy-spectral") return ExpertKind::GreedySpectral;
  throw InvalidArgument("unknown expert '" + std::string(s) + "'");
}

double node_stretch(const EuclideanGraph& g, int origin, int destination, int x) {
  const double direct = g.distance(origin, destination);
  if (direct == 0.0) throw InvalidArgument("node stretch undefined when d(O, D) = 0");
  return (g.distance(origin, x) + g.distance(x, destination)) / direct;
}

Eigen::Vector4d features_local(const EuclideanGraph& g, int origin, int destination, int v, int u) {
  const double direct = g.distance(origin, destination);
  if (direct == 0.0) throw InvalidArgument("local features undefined when d(O, D) = 0");
  const double r = g.radius();
  return {g.distance(v, destination) / r, node_stretch(g, origin, destination, v),
          g.distance(u, destination) / r, node_stretch(g, origin, destination, u)};
}

Eigen::Vector2d features_spectral(const ResistanceOracle& res, int n, int destination, int v, int u) {
  const double scale = n > 1 ? static_cast<double>(n - 1) : 1.0;
  return {res.query(v, destination) / scale, res.query(u, destination) / scale};
}

bool SamplerSpec::matches(const EuclideanGraph& g, const PathOracle& paths, int origin,
                          int destination) const {
  if (origin == destination || !paths.connected(origin, destination)) return false;
  const double direct = g.distance(origin, destination);
  const double zeta = paths.distance(origin, destination) / direct;
  if (band == StretchBand::Any) return true;
  if (band == StretchBand::Low) return zeta <= low_stretch && (!distance_band || direct <= short_fraction * g.side());
  return zeta >= high_stretch && (!distance_band || direct >= long_fraction * g.side());
}

std::vector<int> sample_states(const EuclideanGraph& g, const PathOracle& paths, int origin,
                               int destination, SplitMix64& rng) {
  std::vector<int> states = shortest_path_nodes(paths, origin, destination);
  states.pop_back();  // D itself is terminal
  const std::size_t on_path = states.size();
  std::vector<int> others;
  for (int x = 0; x < g.size(); ++x) {
    if (x == destination || !paths.connected(x, destination)) continue;
    if (std::find(states.begin(), states.end(), x) == states.end()) others.push_back(x);
  }
  shuffle(std::span<int>(others), rng);
  const std::size_t extra = std::min(on_path, others.size());
  states.insert(states.end(), others.begin(), others.begin() + static_cast<std::ptrdiff_t>(extra));
  return states;
}

LabeledQSet build_expert_dataset(const EuclideanGraph& g, const PathOracle& paths, const ResistanceOracle& res,
                                 ExpertKind kind, const SamplerSpec& spec, std::uint64_t seed) {
  if (spec.low_stretch >= spec.high_stretch) throw InvalidArgument("sampler needs low < high stretch");
  std::vector<std::pair<int, int>> pairs;
  for (const auto& [o, d] : connected_pairs(paths))
    if (spec.matches(g, paths, o, d)) pairs.emplace_back(o, d);

  SplitMix64 rng(derive_seed(seed, 0x65787074ull + static_cast<std::uint64_t>(kind)));
  shuffle(std::span<std::pair<int, int>>(pairs), rng);
  if (spec.max_pairs >= 0 && pairs.size() > static_cast<std::size_t>(spec.max_pairs))
    pairs.resize(static_cast<std::size_t>(spec.max_pairs));

  const int dim = input_dim(kind);
  std::vector<Eigen::VectorXd> cols;
  std::vector<double> targets;
  std::vector<Provenance> prov;
  for (const auto& [o, d] : pairs) {
    const double zeta = paths.distance(o, d) / g.distance(o, d);
    if ((spec.band == StretchBand::Low && zeta > spec.low_stretch) ||
        (spec.band == StretchBand::High && zeta < spec.high_stretch))
      throw InvariantViolation("sampler emitted a pair outside its stretch band");
    for (int v : sample_states(g, paths, o, d, rng)) {
      for (int u : g.neighbors(v)) {
        Eigen::VectorXd f = kind == ExpertKind::GreedySpectral
                                ? Eigen::VectorXd(features_spectral(res, g.size(), d, v, u))
                                : Eigen::VectorXd(features_local(g, o, d, v, u));
        cols.push_back(std::move(f));
        targets.push_back(optimal_q(paths, g, d, v, u) / g.radius());
        prov.push_back({g.id(), o, d, v, u});
      }
    }
  }
  LabeledQSet set(dim);
  set.features.resize(dim, static_cast<Eigen::Index>(cols.size()));
  set.targets.resize(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    set.features.col(static_cast<Eigen::Index>(i)) = cols[i];
    set.targets(static_cast<Eigen::Index>(i)) = targets[i];
  }
  set.provenance = std::move(prov);
  return set;
}

void append(LabeledQSet& into, const LabeledQSet& more) {
  if (more.empty()) return;
  if (into.features.rows() != more.features.rows())
    throw InvalidArgument("cannot append datasets of different feature dimension");
  const Eigen::Index k = into.size();
  into.features.conservativeResize(Eigen::NoChange, k + more.size());
  into.features.rightCols(more.size()) = more.features;
  into.targets.conservativeResize(k + more.size());
  into.targets.tail(more.size()) = more.targets;
  into.provenance.insert(into.provenance.end(), more.provenance.begin(), more.provenance.end());
}

void write_dataset_csv(std::ostream& out, const LabeledQSet& set) {
  out << "graph_id,O,D,v,u";
  for (Eigen::Index f = 0; f < set.features.rows(); ++f) out << ",f" << (f + 1);
  out << ",target\n";
  const auto old = out.precision(17);
  for (Eigen::Index i = 0; i < set.size(); ++i) {
    const auto& p = set.provenance[static_cast<std::size_t>(i)];
    out << p.graph_id << ',' << p.origin << ',' << p.destination << ',' << p.current << ',' << p.neighbor;
    for (Eigen::Index f = 0; f < set.features.rows(); ++f) out << ',' << set.features(f, i);
    out << ',' << set.targets(i) << '\n';
  }
  out.precision(old);
}

Selection score_and_select(const Network& model, ExpertKind kind, const RoutingSample& sample,
                           const EuclideanGraph& g, const ResistanceOracle& res) {
  const auto m = static_cast<Eigen::Index>(sample.neighbors.size());
  if (m == 0) throw NoCandidateError("node has no neighbors");
  const int dim = input_dim(kind);
  Eigen::MatrixXd xs(dim, m);
  std::vector<Eigen::Index> feasible;
  for (Eigen::Index i = 0; i < m; ++i) {
    const int u = sample.neighbors[static_cast<std::size_t>(i)];
    if (kind == ExpertKind::GreedySpectral)
      xs.col(static_cast<Eigen::Index>(feasible.size())) =
          features_spectral(res, g.size(), sample.destination, sample.current, u);
    else
      xs.col(static_cast<Eigen::Index>(feasible.size())) =
          features_local(g, sample.origin, sample.destination, sample.current, u);
    if (xs.col(static_cast<Eigen::Index>(feasible.size())).allFinite()) feasible.push_back(i);
  }
  if (feasible.empty()) throw NoCandidateError("no neighbor has finite features");

  const Eigen::RowVectorXd out = model.forward_batch(xs.leftCols(static_cast<Eigen::Index>(feasible.size())));
  Selection sel;
  sel.scores.assign(static_cast<std::size_t>(m), -kInfinity);
  double best = -kInfinity;
  for (std::size_t k = 0; k < feasible.size(); ++k) {
    const auto i = feasible[k];
    sel.scores[static_cast<std::size_t>(i)] = out(static_cast<Eigen::Index>(k));
    if (sel.node == kNoNode || out(static_cast<Eigen::Index>(k)) > best) {
      best = out(static_cast<Eigen::Index>(k));
      sel.node = sample.neighbors[static_cast<std::size_t>(i)];
    }
  }
  return sel;
}

}  // namespace camoe
