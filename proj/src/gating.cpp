#include "camoe/gating.hpp"

#include <algorithm>

#include "camoe/errors.hpp"
#include "camoe/rng.hpp"

namespace camoe {

ContextFeatures context_features(const EuclideanGraph& g, int origin, int destination, int v) {
  const double r = g.radius();
  ContextFeatures ctx;
  ctx.values << g.density(), static_cast<double>(g.degree(v)), node_stretch(g, origin, destination, v),
      g.distance(origin, destination) / r, g.distance(origin, v) / r, g.distance(v, destination) / r;
  return ctx;
}

const Network& ModelSet::expert(ExpertKind kind) const {
  switch (kind) {
    case ExpertKind::GreedyTensile: return tensile;
    case ExpertKind::GreedyLax: return lax;
    case ExpertKind::GreedySpectral: return spectral;
  }
  throw InvalidArgument("unknown expert kind");
}

Network& ModelSet::expert(ExpertKind kind) {
  return const_cast<Network&>(static_cast<const ModelSet&>(*this).expert(kind));
}

ModelSet ModelSet::initial(std::uint64_t seed, const DeferralConfig& deferral, Activation activation) {
  auto make = [&](int dim, HeadMode mode, std::uint64_t stream) {
    return Network(dim, Network::default_hidden(dim), mode, derive_seed(seed, stream), activation);
  };
  return ModelSet{make(input_dim(ExpertKind::GreedyTensile), HeadMode::Regression, 1),
                  make(input_dim(ExpertKind::GreedyLax), HeadMode::Regression, 2),
                  make(input_dim(ExpertKind::GreedySpectral), HeadMode::Regression, 3),
                  make(kContextDim, HeadMode::Classifier, 4),
                  make(deferral.input_dim(), HeadMode::Classifier, 5)};
}

nlohmann::json to_json(const ModelSet& models) {
  return {{"format", "camoe-bundle"},
          {"version", 1},
          {"tensile", to_json(models.tensile)},
          {"lax", to_json(models.lax)},
          {"spectral", to_json(models.spectral)},
          {"router", to_json(models.router)},
          {"deferral", to_json(models.deferral)}};
}

ModelSet model_set_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "camoe-bundle" || j.at("version").get<int>() != 1)
      throw DataError("model bundle: unsupported format or version");
    ModelSet m{network_from_json(j.at("tensile")), network_from_json(j.at("lax")),
               network_from_json(j.at("spectral")), network_from_json(j.at("router")),
               network_from_json(j.at("deferral"))};
    for (auto kind : kAllExperts)
      if (m.expert(kind).input_dim() != input_dim(kind) || m.expert(kind).mode() != HeadMode::Regression)
        throw DataError("model bundle: expert has the wrong shape");
    if (m.router.input_dim() != kContextDim || m.router.mode() != HeadMode::Classifier)
      throw DataError("model bundle: router has the wrong shape");
    if (m.deferral.mode() != HeadMode::Classifier ||
        (m.deferral.input_dim() != kContextDim && m.deferral.input_dim() != kContextDim + 2))
      throw DataError("model bundle: deferral rule has the wrong shape");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model bundle: ") + e.what());
  }
}

int router_label(const Scenario& s, const RoutingSample& sample, const Network& h1, const Network& h2) {
  const int u1 = score_and_select(h1, ExpertKind::GreedyTensile, sample, s.graph, s.resistance).node;
  const int u2 = score_and_select(h2, ExpertKind::GreedyLax, sample, s.graph, s.resistance).node;
  if (u1 == u2) return 0;
  const double q1 = optimal_q(s.paths, s.graph, sample.destination, sample.current, u1);
  const double q2 = optimal_q(s.paths, s.graph, sample.destination, sample.current, u2);
  return q1 >= q2 ? 0 : 1;
}

ExpertKind route_select(const Network& router, const ContextFeatures& ctx) {
  return router.forward(ctx.values) > 0.5 ? ExpertKind::GreedyLax : ExpertKind::GreedyTensile;
}

bool deferral_label(const PathOracle& paths, const EuclideanGraph& g, int origin, int destination, int v,
                    int candidate, double delta) {
  if (delta < 0) throw InvalidArgument("deferral delta must be nonnegative");
  const double via = paths.distance(origin, v) + g.distance(v, candidate) + paths.distance(candidate, destination);
  const double bound = paths.distance(origin, destination) * (1.0 + delta);
  if (via == kInfinity || bound == kInfinity) return false;
  // Relative slack absorbs rounding when v and u lie on a shortest path and delta = 0.
  return via <= bound * (1.0 + 1e-12);
}

Eigen::VectorXd deferral_input(const EuclideanGraph& g, const ContextFeatures& ctx, int destination, int origin,
                               int candidate, const DeferralConfig& cfg) {
  if (cfg.confidence_features) throw InvalidArgument("confidence features need the expert's scores");
  Eigen::VectorXd x(cfg.input_dim());
  x.head<kContextDim>() = ctx.values;
  if (cfg.candidate_features) {
    x(kContextDim) = g.distance(candidate, destination) / g.radius();
    x(kContextDim + 1) = node_stretch(g, origin, destination, candidate);
  }
  return x;
}

Eigen::VectorXd deferral_input(const EuclideanGraph& g, const ContextFeatures& ctx, const RoutingSample& sample,
                               const Selection& lower, const DeferralConfig& cfg) {
  DeferralConfig base = cfg;
  base.confidence_features = false;
  const Eigen::VectorXd head =
      deferral_input(g, ctx, sample.destination, sample.origin, lower.node, base);
  if (!cfg.confidence_features) return head;
  Eigen::VectorXd x(cfg.input_dim());
  x.head(head.size()) = head;
  double best = -kInfinity, runner_up = -kInfinity;
  for (double q : lower.scores) {
    if (q > best) runner_up = best, best = q;
    else if (q > runner_up) runner_up = q;
  }
  const double bound = (g.distance(sample.current, lower.node) + g.distance(lower.node, sample.destination)) / g.radius();
  x(head.size()) = -best - bound;
  x(head.size() + 1) = runner_up == -kInfinity ? 0.0 : best - runner_up;
  return x;
}

Deferral deferral_decide(const Network& model, const Eigen::Ref<const Eigen::VectorXd>& input,
                         const DeferralConfig& cfg) {
  return model.forward(input) >= cfg.accept_threshold ? Deferral::Accept : Deferral::Defer;
}

Deferral deferral_decide(const Network& model, const ContextFeatures& ctx, const DeferralConfig& cfg) {
  return deferral_decide(model, Eigen::VectorXd(ctx.values), cfg);
}

void append(ClassifierSet& into, const ClassifierSet& more) {
  if (more.empty()) return;
  if (into.empty()) {
    into = more;
    return;
  }
  if (into.inputs.rows() != more.inputs.rows())
    throw InvalidArgument("cannot append classifier sets of different input dimension");
  const Eigen::Index k = into.size();
  into.inputs.conservativeResize(Eigen::NoChange, k + more.size());
  into.inputs.rightCols(more.size()) = more.inputs;
  into.labels.conservativeResize(k + more.size());
  into.labels.tail(more.size()) = more.labels;
  into.states.insert(into.states.end(), more.states.begin(), more.states.end());
}

std::vector<StateRef> sample_gating_states(const Scenario& s, int pairs, std::uint64_t seed) {
  auto all = connected_pairs(s.paths);
  std::vector<StateRef> out;
  if (all.empty()) return out;
  SplitMix64 rng(derive_seed(seed, 0x67617465ull));
  shuffle(std::span<std::pair<int, int>>(all), rng);
  const std::size_t take = std::min(all.size(), static_cast<std::size_t>(std::max(pairs, 0)));
  for (std::size_t k = 0; k < take; ++k) {
    const auto [o, d] = all[k];
    for (int v : sample_states(s.graph, s.paths, o, d, rng)) out.push_back({s.graph.id(), o, d, v});
  }
  return out;
}

namespace {

ClassifierSet make_set(int dim, std::size_t rows) {
  ClassifierSet set;
  set.inputs.resize(dim, static_cast<Eigen::Index>(rows));
  set.labels.resize(static_cast<Eigen::Index>(rows));
  return set;
}

}  // namespace

ClassifierSet build_router_dataset(const Scenario& s, const std::vector<StateRef>& states, const Network& h1,
                                   const Network& h2) {
  ClassifierSet set = make_set(kContextDim, states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& st = states[i];
    const auto col = static_cast<Eigen::Index>(i);
    set.inputs.col(col) = context_features(s.graph, st.origin, st.destination, st.current).values;
    set.labels(col) = router_label(s, make_sample(s.graph, st.origin, st.destination, st.current), h1, h2);
  }
  set.states = states;
  return set;
}

ClassifierSet build_deferral_dataset(const Scenario& s, const std::vector<StateRef>& states,
                                     const ModelSet& models, const DeferralConfig& cfg) {
  ClassifierSet set = make_set(cfg.input_dim(), states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& st = states[i];
    const auto col = static_cast<Eigen::Index>(i);
    const auto ctx = context_features(s.graph, st.origin, st.destination, st.current);
    const auto sample = make_sample(s.graph, st.origin, st.destination, st.current);
    const ExpertKind lower = route_select(models.router, ctx);
    const Selection sel = score_and_select(models.expert(lower), lower, sample, s.graph, s.resistance);
    const int candidate = sel.node;
    set.inputs.col(col) = deferral_input(s.graph, ctx, sample, sel, cfg);
    set.labels(col) =
        deferral_label(s.paths, s.graph, st.origin, st.destination, st.current, candidate, cfg.delta) ? 1.0 : 0.0;
  }
  set.states = states;
  return set;
}

void write_labels_csv(std::ostream& out, const ClassifierSet& set) {
  out << "graph_id,O,D,v,label\n";
  for (Eigen::Index i = 0; i < set.size(); ++i) {
    const auto& st = set.states[static_cast<std::size_t>(i)];
    out << st.graph_id << ',' << st.origin << ',' << st.destination << ',' << st.current << ','
        << static_cast<int>(set.labels(i)) << '\n';
  }
}

}  // namespace camoe
