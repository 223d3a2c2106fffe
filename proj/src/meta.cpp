#include "camoe/meta.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "camoe/errors.hpp"
#include "camoe/rng.hpp"

namespace camoe {

EvalDataset::EvalDataset(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw InvalidArgument("ED capacity must be positive");
}

void EvalDataset::push(EvalInstance instance) {
  if (instance.q_star.size() != instance.neighbors.size() ||
      instance.local.cols() != static_cast<Eigen::Index>(instance.neighbors.size()) ||
      instance.spectral.cols() != static_cast<Eigen::Index>(instance.neighbors.size()))
    throw InvariantViolation("ED instance columns do not align with its neighbor list");
  window_.push_back(std::move(instance));
  while (window_.size() > capacity_) window_.pop_front();
}

std::size_t update_ed(EvalDataset& ed, const Scenario& s, const MetaConfig& cfg, std::uint64_t seed) {
  if (cfg.phi < 1) throw InvalidArgument("phi must be at least 1");
  const auto& g = s.graph;
  std::vector<int> candidates;
  for (int v = 0; v < g.size(); ++v)
    if (g.degree(v) > 0) candidates.push_back(v);
  if (candidates.empty()) return 0;

  SplitMix64 rng(derive_seed(seed, 0x6564ull));
  std::size_t added = 0;
  for (int k = 0; k < cfg.phi; ++k) {
    const int v = candidates[uniform_index(rng, candidates.size())];
    std::vector<int> component;
    for (int x = 0; x < g.size(); ++x)
      if (s.paths.connected(v, x)) component.push_back(x);
    for (int p = 0; p < cfg.pairs_per_node; ++p) {
      int d = v;
      while (d == v) d = component[uniform_index(rng, component.size())];
      int o = d;
      while (o == d) o = component[uniform_index(rng, component.size())];

      EvalInstance inst;
      inst.graph_id = g.id();
      inst.origin = o;
      inst.destination = d;
      inst.current = v;
      const auto nbrs = g.neighbors(v);
      inst.neighbors.assign(nbrs.begin(), nbrs.end());
      const auto m = static_cast<Eigen::Index>(nbrs.size());
      inst.local.resize(input_dim(ExpertKind::GreedyTensile), m);
      inst.spectral.resize(input_dim(ExpertKind::GreedySpectral), m);
      for (Eigen::Index i = 0; i < m; ++i) {
        const int u = nbrs[static_cast<std::size_t>(i)];
        inst.local.col(i) = features_local(g, o, d, v, u);
        inst.spectral.col(i) = features_spectral(s.resistance, g.size(), d, v, u);
        inst.q_star.push_back(optimal_q(s.paths, g, d, v, u));
      }
      ed.push(std::move(inst));
      ++added;
    }
  }
  return added;
}

namespace {

std::vector<std::size_t> order_by(std::span<const double> key, std::span<const int> ids) {
  std::vector<std::size_t> idx(key.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (key[a] != key[b]) return key[a] > key[b];
    return ids[a] < ids[b];
  });
  return idx;
}

}  // namespace

double ndcg(std::span<const double> scores, std::span<const double> q_star, std::span<const int> ids) {
  const std::size_t m = scores.size();
  if (q_star.size() != m || ids.size() != m) throw InvalidArgument("ndcg inputs differ in length");
  if (m <= 1) return 1.0;
  const auto truth = order_by(q_star, ids);
  std::vector<double> rel(m);
  for (std::size_t r = 0; r < m; ++r) rel[truth[r]] = static_cast<double>(m - 1 - r);
  const auto predicted = order_by(scores, ids);
  double dcg = 0.0, ideal = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double discount = std::log2(static_cast<double>(i) + 2.0);
    dcg += rel[predicted[i]] / discount;
    ideal += static_cast<double>(m - 1 - i) / discount;
  }
  return dcg / ideal;
}

double ndcg_eval(const Network& model, ExpertKind kind, const EvalDataset& ed) {
  if (ed.empty()) throw InvalidArgument("ndcg_eval on an empty ED");
  double total = 0.0;
  for (const auto& inst : ed) {
    const auto& xs = kind == ExpertKind::GreedySpectral ? inst.spectral : inst.local;
    const Eigen::RowVectorXd out = model.forward_batch(xs);
    total += ndcg(std::span<const double>(out.data(), static_cast<std::size_t>(out.size())), inst.q_star,
                  inst.neighbors);
  }
  return total / static_cast<double>(ed.size());
}

StepReport online_step(OnlineState& state, const Scenario& s, const MetaConfig& cfg, std::uint64_t seed) {
  StepReport report;
  report.t = ++state.t;
  report.graph_id = s.graph.id();
  update_ed(state.ed, s, cfg, derive_seed(seed, 1));
  report.ed_size = state.ed.size();

  for (ExpertKind kind : kAllExperts) {
    const auto k = static_cast<std::size_t>(kind);
    auto& step = report.experts[k];
    Network& incumbent = state.models.expert(kind);
    if (!state.ed.empty()) step.ndcg_before = step.ndcg_after = ndcg_eval(incumbent, kind, state.ed);
    const LabeledQSet data = build_expert_dataset(s.graph, s.paths, s.resistance, kind, cfg.sampler(kind),
                                                  derive_seed(seed, 10 + k));
    step.rows = static_cast<std::size_t>(data.size());
    if (data.empty() || state.ed.empty()) continue;
    step.skipped = false;
    TrainConfig tc = cfg.finetune;
    tc.seed = derive_seed(seed, 20 + k);
    Network candidate = train(incumbent, data.features, data.targets, tc);
    step.ndcg_candidate = ndcg_eval(candidate, kind, state.ed);
    if (step.ndcg_candidate > step.ndcg_before) {
      incumbent = std::move(candidate);
      step.committed = true;
      step.ndcg_after = step.ndcg_candidate;
      ++state.versions[k];
    }
  }

  const auto states = sample_gating_states(s, cfg.router_pairs, derive_seed(seed, 30));
  if (!states.empty() && cfg.router_iterations > 0) {
    const auto set = build_router_dataset(s, states, state.models.tensile, state.models.lax);
    TrainConfig tc = cfg.finetune;
    tc.iterations = cfg.router_iterations;
    tc.seed = derive_seed(seed, 31);
    state.models.router = train(state.models.router, set.inputs, set.labels, tc);
    report.router_retrained = true;
    ++state.versions[3];
  }

  if (cfg.online_deferral) {
    const auto dstates = sample_gating_states(s, cfg.deferral_pairs, derive_seed(seed, 40));
    if (!dstates.empty()) {
      const auto set = build_deferral_dataset(s, dstates, state.models, cfg.deferral);
      TrainConfig tc = cfg.finetune;
      tc.seed = derive_seed(seed, 41);
      state.models.deferral = train(state.models.deferral, set.inputs, set.labels, tc);
      report.deferral_retrained = true;
      ++state.versions[4];
    }
  }
  return report;
}

nlohmann::json to_json(const StepReport& r) {
  nlohmann::json per = nlohmann::json::object();
  for (ExpertKind kind : kAllExperts) {
    const auto& e = r.experts[static_cast<std::size_t>(kind)];
    per[std::string(short_name(kind))] = {{"skipped", e.skipped},           {"committed", e.committed},
                                          {"ndcg_before", e.ndcg_before},   {"ndcg_after", e.ndcg_after},
                                          {"ndcg_candidate", e.ndcg_candidate}, {"rows", e.rows}};
  }
  return {{"t", r.t},
          {"graph_id", r.graph_id},
          {"per_expert", per},
          {"router_retrained", r.router_retrained},
          {"deferral_retrained", r.deferral_retrained},
          {"ed_size", r.ed_size}};
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const auto row = j.at(static_cast<std::size_t>(r)).get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != cols) throw DataError("ED file: ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

}  // namespace

nlohmann::json to_json(const EvalDataset& ed) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& inst : ed) {
    items.push_back({{"graph_id", inst.graph_id},
                     {"O", inst.origin},
                     {"D", inst.destination},
                     {"v", inst.current},
                     {"neighbors", inst.neighbors},
                     {"local", matrix_json(inst.local)},
                     {"spectral", matrix_json(inst.spectral)},
                     {"q_star", inst.q_star}});
  }
  return {{"capacity", ed.capacity()}, {"window", items}};
}

EvalDataset eval_dataset_from_json(const nlohmann::json& j) {
  try {
    EvalDataset ed(j.at("capacity").get<std::size_t>());
    for (const auto& item : j.at("window")) {
      EvalInstance inst;
      inst.graph_id = item.at("graph_id").get<std::uint64_t>();
      inst.origin = item.at("O").get<int>();
      inst.destination = item.at("D").get<int>();
      inst.current = item.at("v").get<int>();
      inst.neighbors = item.at("neighbors").get<std::vector<int>>();
      const auto m = static_cast<Eigen::Index>(inst.neighbors.size());
      inst.local = matrix_from_json(item.at("local"), m);
      inst.spectral = matrix_from_json(item.at("spectral"), m);
      inst.q_star = item.at("q_star").get<std::vector<double>>();
      ed.push(std::move(inst));
    }
    return ed;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("ED file: ") + e.what());
  } catch (const InvariantViolation& e) {
    throw DataError(std::string("ED file: ") + e.what());
  }
}

nlohmann::json to_json(const OnlineState& state) {
  return {{"format", "camoe-checkpoint"}, {"version", 1},         {"t", state.t},
          {"versions", state.versions},   {"models", to_json(state.models)}, {"ed", to_json(state.ed)}};
}

OnlineState online_state_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "camoe-checkpoint" || j.at("version").get<int>() != 1)
      throw DataError("checkpoint: unsupported format or version");
    return OnlineState{model_set_from_json(j.at("models")), eval_dataset_from_json(j.at("ed")), j.at("t").get<int>(),
                       j.at("versions").get<std::array<std::uint64_t, 5>>()};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
}

}  // namespace camoe
