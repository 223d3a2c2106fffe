#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "camoe/experts.hpp"
#include "camoe/gating.hpp"
#include "camoe/mlp.hpp"
#include "camoe/scenario.hpp"

namespace camoe {

/// One ranking problem: the neighbors of `current` with their ground-truth
/// Q* and both feature encodings. Column k of `local` / `spectral` and
/// q_star[k] belong to neighbors[k].
struct EvalInstance {
  std::uint64_t graph_id = 0;
  int origin = kNoNode;
  int destination = kNoNode;
  int current = kNoNode;
  std::vector<int> neighbors;
  Eigen::MatrixXd local;
  Eigen::MatrixXd spectral;
  std::vector<double> q_star;
};

/// Fixed-capacity sliding window; the oldest instance is evicted first.
class EvalDataset {
 public:
  explicit EvalDataset(std::size_t capacity = 200);

  void push(EvalInstance instance);

  std::size_t size() const noexcept { return window_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  bool empty() const noexcept { return window_.empty(); }
  const EvalInstance& operator[](std::size_t i) const { return window_[i]; }
  auto begin() const { return window_.begin(); }
  auto end() const { return window_.end(); }

 private:
  std::size_t capacity_;
  std::deque<EvalInstance> window_;
};

struct MetaConfig {
  int phi = 10;                ///< nodes sampled per graph for the ED
  int pairs_per_node = 1;
  std::size_t ed_capacity = 200;
  TrainConfig finetune{};      ///< IterNum_FT = 1000
  std::array<SamplerSpec, 3> samplers{SamplerSpec::for_kind(ExpertKind::GreedyTensile),
                                      SamplerSpec::for_kind(ExpertKind::GreedyLax),
                                      SamplerSpec::for_kind(ExpertKind::GreedySpectral)};
  int router_iterations = 1000;
  int router_pairs = 20;
  bool online_deferral = false;
  int deferral_pairs = 20;
  DeferralConfig deferral{};

  const SamplerSpec& sampler(ExpertKind kind) const { return samplers[static_cast<std::size_t>(kind)]; }
};

/// Appends up to phi * pairs_per_node instances drawn from `s`; returns how many.
std::size_t update_ed(EvalDataset& ed, const Scenario& s, const MetaConfig& cfg, std::uint64_t seed);

/// NDCG of one ranking. Relevance of a neighbor is m - 1 - r where r is its
/// 0-based rank by descending Q*; gains are discounted by log2(position + 1).
/// Both orders break ties by ascending `ids`. Single-candidate rankings score 1.
double ndcg(std::span<const double> scores, std::span<const double> q_star, std::span<const int> ids);

/// Mean NDCG of `model` over the ED using the encoding of `kind`.
double ndcg_eval(const Network& model, ExpertKind kind, const EvalDataset& ed);

struct ExpertStep {
  bool skipped = true;
  bool committed = false;
  double ndcg_before = 0.0;     ///< incumbent on the step's ED snapshot
  double ndcg_candidate = 0.0;  ///< fine-tuned candidate, when not skipped
  double ndcg_after = 0.0;      ///< model kept after the step
  std::size_t rows = 0;         ///< fine-tuning rows
};

struct StepReport {
  int t = 0;
  std::uint64_t graph_id = 0;
  std::array<ExpertStep, 3> experts{};
  bool router_retrained = false;
  bool deferral_retrained = false;
  std::size_t ed_size = 0;
};

/// Models plus ED. `versions` counts changes to each component (experts in
/// ExpertKind order, then router, then deferral) so callers can cache work
/// that depends on unchanged models.
struct OnlineState {
  ModelSet models;
  EvalDataset ed;
  int t = 0;
  std::array<std::uint64_t, 5> versions{};
};

/// One arrival of the online pipeline: ED update, targeted fine-tuning with
/// the strict-improvement commit rule, router retraining.
StepReport online_step(OnlineState& state, const Scenario& s, const MetaConfig& cfg, std::uint64_t seed);

nlohmann::json to_json(const StepReport& r);
nlohmann::json to_json(const EvalDataset& ed);
EvalDataset eval_dataset_from_json(const nlohmann::json& j);
nlohmann::json to_json(const OnlineState& state);
OnlineState online_state_from_json(const nlohmann::json& j);

}  // namespace camoe
