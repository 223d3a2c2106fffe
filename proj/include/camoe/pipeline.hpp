#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "camoe/experts.hpp"
#include "camoe/gating.hpp"
#include "camoe/mlp.hpp"
#include "camoe/scenario.hpp"

namespace camoe {

struct PretrainConfig {
  int seed_graphs = 10;           ///< per density
  int n = 50;                     ///< nodes per seed graph (N_train)
  double radius = 1000.0;
  double tensile_density = 5.0;   ///< rho_GT
  double sparse_density = 2.0;    ///< rho_GL/GS
  std::uint64_t seed = 1;
  Conductance conductance = Conductance::Unit;
  Activation activation = Activation::Relu;
  std::array<SamplerSpec, 3> samplers{SamplerSpec::for_kind(ExpertKind::GreedyTensile),
                                      SamplerSpec::for_kind(ExpertKind::GreedyLax),
                                      SamplerSpec::for_kind(ExpertKind::GreedySpectral)};
  TrainConfig expert_train{1e-3, 20000, 32, 0};
  TrainConfig gating_train{1e-3, 20000, 32, 0};
  int gating_pairs = 40;          ///< (O, D) pairs per seed graph for router/deferral data
  DeferralConfig deferral{};
  /// Extra deferral fits, each adding the states visited by Ca-MoE rollouts
  /// of the current models on the seed graphs.
  int deferral_rounds = 0;
};

struct ComponentLog {
  std::size_t rows = 0;
  double loss_before = 0.0;
  double loss_after = 0.0;
};

struct PretrainLog {
  std::array<ComponentLog, 5> components{};  ///< GT, GL, GS, router, deferral
};

nlohmann::json to_json(const PretrainLog& log);

/// Seed graphs at one density: seeds derive_seed(cfg.seed, stream + i).
std::vector<Scenario> seed_scenarios(const PretrainConfig& cfg, double density, std::uint64_t stream);

/// Trains GT on `tensile_graphs`, GL and GS on `sparse_graphs`, then the
/// router and the deferral rule on contexts pooled from both sets, starting
/// from ModelSet::initial(cfg.seed).
ModelSet pretrain(const PretrainConfig& cfg, std::span<const Scenario> tensile_graphs,
                  std::span<const Scenario> sparse_graphs, PretrainLog* log = nullptr);

}  // namespace camoe
