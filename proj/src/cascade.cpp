#include "camoe/cascade.hpp"

#include <algorithm>

#include "camoe/errors.hpp"

namespace camoe {

std::string_view policy_name(Policy p) {
  switch (p) {
    case Policy::CaMoE: return "ca-moe";
    case Policy::GreedyTensile: return "greedy-tensile";
    case Policy::GreedyLax: return "greedy-lax";
    case Policy::GreedySpectral: return "greedy-spectral";
    case Policy::MoeOpt: return "moe-opt";
    case Policy::ShortestPath: return "shortest-oracle";
  }
  return "?";
}

Policy policy_from_string(std::string_view s) {
  for (Policy p : {Policy::CaMoE, Policy::GreedyTensile, Policy::GreedyLax, Policy::GreedySpectral, Policy::MoeOpt,
                   Policy::ShortestPath})
    if (policy_name(p) == s) return p;
  throw InvalidArgument("unknown policy '" + std::string(s) + "'");
}

std::optional<ExpertKind> single_expert(Policy p) {
  switch (p) {
    case Policy::GreedyTensile: return ExpertKind::GreedyTensile;
    case Policy::GreedyLax: return ExpertKind::GreedyLax;
    case Policy::GreedySpectral: return ExpertKind::GreedySpectral;
    default: return std::nullopt;
  }
}

HopDecision next_hop_camoe(const ModelSet& models, const Scenario& s, const RoutingSample& sample,
                           const DeferralConfig& cfg) {
  if (sample.neighbors.empty()) throw NoCandidateError("node has no neighbors");
  const auto ctx = context_features(s.graph, sample.origin, sample.destination, sample.current);
  const ExpertKind lower = route_select(models.router, ctx);
  const Selection sel = score_and_select(models.expert(lower), lower, sample, s.graph, s.resistance);
  const int candidate = sel.node;
  const auto input = deferral_input(s.graph, ctx, sample, sel, cfg);
  if (deferral_decide(models.deferral, input, cfg) == Deferral::Accept) return {candidate, lower, false};
  try {
    const int upper =
        score_and_select(models.spectral, ExpertKind::GreedySpectral, sample, s.graph, s.resistance).node;
    return {upper, ExpertKind::GreedySpectral, true};
  } catch (const NoCandidateError&) {
    return {candidate, lower, false};
  }
}

HopDecision next_hop_moe_opt(const ModelSet& models, const Scenario& s, const RoutingSample& sample) {
  HopDecision best;
  double best_q = -kInfinity;
  for (ExpertKind kind : kAllExperts) {
    int proposal = kNoNode;
    try {
      proposal = score_and_select(models.expert(kind), kind, sample, s.graph, s.resistance).node;
    } catch (const NoCandidateError&) {
      continue;
    }
    const double q = optimal_q(s.paths, s.graph, sample.destination, sample.current, proposal);
    if (best.node == kNoNode || q > best_q) {
      best = {proposal, kind, false};
      best_q = q;
    }
  }
  if (best.node == kNoNode) throw NoCandidateError("no expert produced a candidate");
  return best;
}

RolloutResult rollout(Policy policy, const ModelSet& models, const Scenario& s, int origin, int destination,
                      int hop_limit, const DeferralConfig& cfg) {
  if (origin == destination) throw InvalidArgument("rollout requires O != D");
  RolloutResult r;
  r.path.push_back(origin);
  if (!s.paths.connected(origin, destination)) return r;

  std::vector<char> visited(static_cast<std::size_t>(s.graph.size()), 0);
  visited[static_cast<std::size_t>(origin)] = 1;
  int v = origin;
  for (int hop = 0; hop < hop_limit; ++hop) {
    const auto sample = make_sample(s.graph, origin, destination, v);
    HopDecision d;
    switch (policy) {
      case Policy::CaMoE: d = next_hop_camoe(models, s, sample, cfg); break;
      case Policy::MoeOpt: d = next_hop_moe_opt(models, s, sample); break;
      case Policy::ShortestPath: d.node = s.paths.next_hop(v, destination); break;
      default: {
        const ExpertKind kind = *single_expert(policy);
        d = {score_and_select(models.expert(kind), kind, sample, s.graph, s.resistance).node, kind, false};
      }
    }
    if (visited[static_cast<std::size_t>(d.node)]) return r;
    visited[static_cast<std::size_t>(d.node)] = 1;
    r.total_length += s.graph.distance(v, d.node);
    r.path.push_back(d.node);
    if (policy != Policy::ShortestPath) r.per_hop_expert.push_back(d.attribution);
    if (d.deferred) ++r.deferred_count;
    v = d.node;
    if (v == destination) {
      r.success = true;
      return r;
    }
  }
  return r;
}

nlohmann::json trace_json(const RolloutResult& r, int origin, int destination) {
  std::vector<std::string> experts;
  for (auto k : r.per_hop_expert) experts.emplace_back(short_name(k));
  return {{"O", origin},          {"D", destination},
          {"path", r.path},       {"expert_per_hop", experts},
          {"deferred_count", r.deferred_count}, {"success", r.success}};
}

}  // namespace camoe
