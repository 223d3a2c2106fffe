#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "camoe/experts.hpp"
#include "camoe/gating.hpp"
#include "camoe/scenario.hpp"

namespace camoe {

enum class Policy {
  CaMoE,
  GreedyTensile,
  GreedyLax,
  GreedySpectral,
  MoeOpt,
  ShortestPath,  ///< follows the exact next-hop table; test plumbing
};

/// Ca-MoE, the three single experts, and MoE_OPT, in report order.
inline constexpr std::array<Policy, 5> kReportPolicies{Policy::CaMoE, Policy::GreedyTensile, Policy::GreedyLax,
                                                       Policy::GreedySpectral, Policy::MoeOpt};

std::string_view policy_name(Policy p);
Policy policy_from_string(std::string_view s);
std::optional<ExpertKind> single_expert(Policy p);

struct HopDecision {
  int node = kNoNode;
  ExpertKind attribution = ExpertKind::GreedyTensile;
  bool deferred = false;
};

/// One Ca-MoE forwarding decision: router -> lower-tier argmax -> deferral
/// rule -> optional escalation to Greedy-Spectral.
HopDecision next_hop_camoe(const ModelSet& models, const Scenario& s, const RoutingSample& sample,
                           const DeferralConfig& cfg);

/// MoE_OPT: every expert proposes; the proposal with the largest true Q*
/// is executed (ties: GT, then GL, then GS).
HopDecision next_hop_moe_opt(const ModelSet& models, const Scenario& s, const RoutingSample& sample);

struct RolloutResult {
  std::vector<int> path;
  double total_length = 0.0;
  bool success = false;
  std::vector<ExpertKind> per_hop_expert;  ///< empty for ShortestPath
  int deferred_count = 0;
};

inline int default_hop_limit(const EuclideanGraph& g) { return 2 * g.size(); }

/// Walks from origin until the destination is reached (success), a node
/// would be revisited, or hop_limit hops have been taken (both failures).
RolloutResult rollout(Policy policy, const ModelSet& models, const Scenario& s, int origin, int destination,
                      int hop_limit, const DeferralConfig& cfg = {});

/// {"O", "D", "path", "expert_per_hop", "deferred_count", "success"}.
nlohmann::json trace_json(const RolloutResult& r, int origin, int destination);

}  // namespace camoe
