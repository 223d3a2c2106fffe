#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "camoe/experts.hpp"
#include "camoe/graph.hpp"
#include "camoe/mlp.hpp"
#include "camoe/scenario.hpp"

namespace camoe {

inline constexpr int kContextDim = 6;

/// Local context of a routing state, shared by the router and the deferral
/// rule: <rho, degree(v), ns(O, D, v), d(O, D) / R, d(O, v) / R, d(v, D) / R>.
struct ContextFeatures {
  Eigen::Matrix<double, kContextDim, 1> values;
};

ContextFeatures context_features(const EuclideanGraph& g, int origin, int destination, int v);

struct DeferralConfig {
  double delta = 0.05;            ///< tolerable deviation used for labels
  double accept_threshold = 0.5;  ///< classifier output needed to accept
  bool candidate_features = false;  ///< append f_a(u_hat) to the context
  bool confidence_features = false;  ///< append the lower-tier expert's detour estimate and score margin

  int input_dim() const noexcept {
    return kContextDim + (candidate_features ? 2 : 0) + (confidence_features ? 2 : 0);
  }
};

/// Every learned component of the cascade.
struct ModelSet {
  Network tensile;
  Network lax;
  Network spectral;
  Network router;
  Network deferral;

  const Network& expert(ExpertKind kind) const;
  Network& expert(ExpertKind kind);

  /// Freshly initialized networks with the default [50 I, I] hidden shape;
  /// each component gets its own stream derived from `seed`.
  static ModelSet initial(std::uint64_t seed, const DeferralConfig& deferral = {},
                          Activation activation = Activation::Relu);
};

nlohmann::json to_json(const ModelSet& models);
ModelSet model_set_from_json(const nlohmann::json& j);

/// 0 (Greedy-Tensile) when Q* of h1's proposal >= Q* of h2's proposal, else 1.
int router_label(const Scenario& s, const RoutingSample& sample, const Network& h1, const Network& h2);

/// Top-1 choice between the lower-tier experts: output > 0.5 selects
/// Greedy-Lax, anything else Greedy-Tensile.
ExpertKind route_select(const Network& router, const ContextFeatures& ctx);

/// d_sp(O, v) + d_e(v, u) + d_sp(u, D) <= d_sp(O, D) (1 + delta).
bool deferral_label(const PathOracle& paths, const EuclideanGraph& g, int origin, int destination, int v,
                    int candidate, double delta);

enum class Deferral { Accept, Defer };

/// Input vector of the deferral classifier for a state and lower-tier candidate.
/// Throws InvalidArgument when cfg asks for confidence features.
Eigen::VectorXd deferral_input(const EuclideanGraph& g, const ContextFeatures& ctx, int destination,
                               int origin, int candidate, const DeferralConfig& cfg);
/// Same, from the lower-tier expert's full selection. Confidence features are
/// the predicted remaining length of the candidate minus its Euclidean lower
/// bound (d(v, u) + d(u, D)) / R, and the score margin over the runner-up
/// (0 with a single feasible neighbor).
Eigen::VectorXd deferral_input(const EuclideanGraph& g, const ContextFeatures& ctx, const RoutingSample& sample,
                               const Selection& lower, const DeferralConfig& cfg);

Deferral deferral_decide(const Network& model, const Eigen::Ref<const Eigen::VectorXd>& input,
                         const DeferralConfig& cfg);
Deferral deferral_decide(const Network& model, const ContextFeatures& ctx, const DeferralConfig& cfg);

/// A labeled (O, D, v) state.
struct StateRef {
  std::uint64_t graph_id = 0;
  int origin = kNoNode;
  int destination = kNoNode;
  int current = kNoNode;
};

/// Binary classification rows, one column of `inputs` per row.
struct ClassifierSet {
  Eigen::MatrixXd inputs;
  Eigen::VectorXd labels;
  std::vector<StateRef> states;

  Eigen::Index size() const noexcept { return labels.size(); }
  bool empty() const noexcept { return labels.size() == 0; }
};

void append(ClassifierSet& into, const ClassifierSet& more);

/// States for gating data: `pairs` random connected (O, D) pairs, each with
/// its sample_states() nodes.
std::vector<StateRef> sample_gating_states(const Scenario& s, int pairs, std::uint64_t seed);

ClassifierSet build_router_dataset(const Scenario& s, const std::vector<StateRef>& states, const Network& h1,
                                   const Network& h2);

/// Labels whether the lower-tier candidate (router-selected expert's argmax)
/// is acceptable under cfg.delta.
ClassifierSet build_deferral_dataset(const Scenario& s, const std::vector<StateRef>& states,
                                     const ModelSet& models, const DeferralConfig& cfg);

/// CSV with header graph_id,O,D,v,label.
void write_labels_csv(std::ostream& out, const ClassifierSet& set);

}  // namespace camoe
