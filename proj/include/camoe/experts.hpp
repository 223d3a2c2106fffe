#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "camoe/graph.hpp"
#include "camoe/mlp.hpp"
#include "camoe/rng.hpp"
#include "camoe/spectral.hpp"

namespace camoe {

enum class ExpertKind { GreedyTensile, GreedyLax, GreedySpectral };

inline constexpr std::array<ExpertKind, 3> kAllExperts{ExpertKind::GreedyTensile, ExpertKind::GreedyLax,
                                                       ExpertKind::GreedySpectral};

/// 4 local features for the two lower-tier experts, 2 resistance features
/// for Greedy-Spectral.
constexpr int input_dim(ExpertKind kind) { return kind == ExpertKind::GreedySpectral ? 2 : 4; }

/// "GT", "GL", "GS".
std::string_view short_name(ExpertKind kind);
ExpertKind expert_from_string(std::string_view s);

/// (d(O, x) + d(x, D)) / d(O, D) using Euclidean distances.
double node_stretch(const EuclideanGraph& g, int origin, int destination, int x);

/// <d(v, D) / R, ns(O, D, v), d(u, D) / R, ns(O, D, u)>.
Eigen::Vector4d features_local(const EuclideanGraph& g, int origin, int destination, int v, int u);

/// <Omega(v, D) / (n - 1), Omega(u, D) / (n - 1)>. Entries are +inf when
/// either node is outside D's component.
Eigen::Vector2d features_spectral(const ResistanceOracle& res, int n, int destination, int v, int u);

struct Provenance {
  std::uint64_t graph_id = 0;
  int origin = kNoNode;
  int destination = kNoNode;
  int current = kNoNode;
  int neighbor = kNoNode;
};

/// Regression rows: one column of `features` per row, target Q* / R.
struct LabeledQSet {
  Eigen::MatrixXd features;
  Eigen::VectorXd targets;
  std::vector<Provenance> provenance;

  explicit LabeledQSet(int dim = 0) : features(dim, 0), targets(0) {}
  Eigen::Index size() const noexcept { return targets.size(); }
  bool empty() const noexcept { return targets.size() == 0; }
};

enum class StretchBand { Low, High, Any };

/// Which (O, D) pairs feed an expert's fine-tuning set.
///  Low band:  zeta <= low_stretch  and d_e(O, D) <= short_fraction * L.
///  High band: zeta >= high_stretch and d_e(O, D) >= long_fraction * L.
///  Any: every connected pair.
struct SamplerSpec {
  StretchBand band = StretchBand::Low;
  double low_stretch = 1.1;
  double high_stretch = 1.3;
  double short_fraction = 1.0 / 3.0;
  double long_fraction = 0.5;
  int max_pairs = 40;
  bool distance_band = true;  ///< false drops the short/long distance condition

  static SamplerSpec for_kind(ExpertKind kind) {
    SamplerSpec s;
    s.band = kind == ExpertKind::GreedyTensile ? StretchBand::Low : StretchBand::High;
    return s;
  }

  bool matches(const EuclideanGraph& g, const PathOracle& paths, int origin, int destination) const;
};

/// Current node samples for an (O, D) pair: every node of the shortest path
/// except D, plus as many distinct uniformly drawn nodes of the same
/// component (never D, never already chosen).
std::vector<int> sample_states(const EuclideanGraph& g, const PathOracle& paths, int origin,
                               int destination, SplitMix64& rng);

/// Targeted training rows for `kind` from one graph. Empty when no pair
/// falls in the sampler's band; callers then skip fine-tuning.
LabeledQSet build_expert_dataset(const EuclideanGraph& g, const PathOracle& paths, const ResistanceOracle& res,
                                 ExpertKind kind, const SamplerSpec& spec, std::uint64_t seed);

/// Appends `more` to `into`. Both sets must have the same feature dimension.
void append(LabeledQSet& into, const LabeledQSet& more);

/// CSV with header graph_id,O,D,v,u,f1..fI,target.
void write_dataset_csv(std::ostream& out, const LabeledQSet& set);

struct Selection {
  int node = kNoNode;
  std::vector<double> scores;  // aligned with sample.neighbors; -inf if infeasible
};

/// Scores every neighbor with `model` and returns the argmax (lowest node id
/// on ties). Throws NoCandidateError when no neighbor has a finite feature vector.
Selection score_and_select(const Network& model, ExpertKind kind, const RoutingSample& sample,
                           const EuclideanGraph& g, const ResistanceOracle& res);

}  // namespace camoe
