#include "camoe/pipeline.hpp"

#include "camoe/cascade.hpp"
#include "camoe/errors.hpp"
#include "camoe/rng.hpp"

namespace camoe {

nlohmann::json to_json(const PretrainLog& log) {
  static constexpr std::array<const char*, 5> names{"GT", "GL", "GS", "router", "deferral"};
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto& c = log.components[k];
    j[names[k]] = {{"rows", c.rows}, {"loss_before", c.loss_before}, {"loss_after", c.loss_after}};
  }
  return j;
}

std::vector<Scenario> seed_scenarios(const PretrainConfig& cfg, double density, std::uint64_t stream) {
  std::vector<Scenario> out;
  out.reserve(static_cast<std::size_t>(cfg.seed_graphs));
  for (int i = 0; i < cfg.seed_graphs; ++i)
    out.emplace_back(generate_graph(cfg.n, density, cfg.radius, derive_seed(cfg.seed, stream + static_cast<std::uint64_t>(i))),
                     cfg.conductance);
  return out;
}

namespace {

Network fit(Network m, const Eigen::MatrixXd& xs, const Eigen::VectorXd& ys, TrainConfig tc, std::uint64_t seed,
            ComponentLog* log) {
  if (ys.size() == 0) return m;
  tc.seed = seed;
  if (log) {
    log->rows = static_cast<std::size_t>(ys.size());
    log->loss_before = m.loss(xs, ys);
  }
  m = train(std::move(m), xs, ys, tc);
  if (log) log->loss_after = m.loss(xs, ys);
  return m;
}

// States (O, D, v) visited by Ca-MoE rollouts of `pairs` sampled connected pairs.
std::vector<StateRef> rollout_states(const Scenario& s, const ModelSet& models, const DeferralConfig& cfg, int pairs,
                                     std::uint64_t seed) {
  auto all = connected_pairs(s.paths);
  SplitMix64 rng(seed);
  shuffle(std::span<std::pair<int, int>>(all), rng);
  all.resize(std::min(all.size(), static_cast<std::size_t>(std::max(pairs, 0))));
  std::vector<StateRef> out;
  for (const auto& [o, d] : all) {
    const auto r = rollout(Policy::CaMoE, models, s, o, d, default_hop_limit(s.graph), cfg);
    for (int v : r.path)
      if (v != d) out.push_back({s.graph.id(), o, d, v});
  }
  return out;
}

}  // namespace

ModelSet pretrain(const PretrainConfig& cfg, std::span<const Scenario> tensile_graphs,
                  std::span<const Scenario> sparse_graphs, PretrainLog* log) {
  ModelSet models = ModelSet::initial(cfg.seed, cfg.deferral, cfg.activation);
  auto component_log = [&](std::size_t k) { return log ? &log->components[k] : nullptr; };

  for (ExpertKind kind : kAllExperts) {
    const auto k = static_cast<std::size_t>(kind);
    const auto graphs = kind == ExpertKind::GreedyTensile ? tensile_graphs : sparse_graphs;
    LabeledQSet data(input_dim(kind));
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      const auto& s = graphs[i];
      append(data, build_expert_dataset(s.graph, s.paths, s.resistance, kind, cfg.samplers[k],
                                        derive_seed(cfg.seed, 100 * (k + 1) + i)));
    }
    models.expert(kind) = fit(std::move(models.expert(kind)), data.features, data.targets, cfg.expert_train,
                              derive_seed(cfg.seed, 0x707265ull + k), component_log(k));
  }

  std::vector<const Scenario*> pooled;
  for (const auto& s : tensile_graphs) pooled.push_back(&s);
  for (const auto& s : sparse_graphs) pooled.push_back(&s);

  ClassifierSet router_set;
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    const auto states = sample_gating_states(*pooled[i], cfg.gating_pairs, derive_seed(cfg.seed, 0x726f75ull + i));
    append(router_set, build_router_dataset(*pooled[i], states, models.tensile, models.lax));
  }
  models.router = fit(std::move(models.router), router_set.inputs, router_set.labels, cfg.gating_train,
                      derive_seed(cfg.seed, 0x726f7574ull), component_log(3));

  ClassifierSet deferral_set;
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    const auto states = sample_gating_states(*pooled[i], cfg.gating_pairs, derive_seed(cfg.seed, 0x646566ull + i));
    append(deferral_set, build_deferral_dataset(*pooled[i], states, models, cfg.deferral));
  }
  const Network fresh_deferral = models.deferral;
  models.deferral = fit(fresh_deferral, deferral_set.inputs, deferral_set.labels, cfg.gating_train,
                        derive_seed(cfg.seed, 0x64656672ull), component_log(4));
  for (int round = 0; round < cfg.deferral_rounds; ++round) {
    for (std::size_t i = 0; i < pooled.size(); ++i) {
      const auto seed = derive_seed(cfg.seed, 0x726f6c6c00ull + 1000 * static_cast<std::uint64_t>(round) + i);
      const auto states = rollout_states(*pooled[i], models, cfg.deferral, cfg.gating_pairs, seed);
      append(deferral_set, build_deferral_dataset(*pooled[i], states, models, cfg.deferral));
    }
    models.deferral = fit(fresh_deferral, deferral_set.inputs, deferral_set.labels, cfg.gating_train,
                          derive_seed(cfg.seed, 0x64656672ull), component_log(4));
  }
  return models;
}

}  // namespace camoe
