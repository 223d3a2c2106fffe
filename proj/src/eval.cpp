#include "camoe/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "camoe/errors.hpp"
#include "camoe/rng.hpp"

namespace camoe {

bool near_shortest(double d_p, double d_sp, double d_e, double epsilon) {
  if (!(d_e > 0.0)) throw InvalidArgument("near_shortest needs a positive Euclidean distance");
  const double zeta = d_sp / d_e;
  return d_p / d_sp <= zeta * (1.0 + epsilon);
}

namespace {

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
/// independent; the first exception is rethrown.
template <typename Body>
void parallel_for(std::size_t count, int threads, Body&& body) {
  const auto workers = static_cast<std::size_t>(std::clamp(threads, 1, 64));
  if (workers == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10f", x);
  return buf;
}

}  // namespace

AccuracyReport apnsp_accuracy(Policy policy, const ModelSet& models, const Scenario& s, const EvalOptions& opts) {
  if (opts.epsilon < 0) throw InvalidArgument("epsilon must be nonnegative");
  AccuracyReport rep;
  rep.graph_id = s.graph.id();
  rep.policy = policy;
  const auto pairs = connected_pairs(s.paths);
  rep.pairs = pairs.size();
  rep.records.resize(pairs.size());
  if (opts.keep_traces) rep.traces.resize(pairs.size());
  const int hop_limit = opts.hop_limit(s.graph);

  parallel_for(pairs.size(), opts.threads, [&](std::size_t i) {
    const auto [o, d] = pairs[i];
    auto& rec = rep.records[i];
    rec.origin = o;
    rec.destination = d;
    rec.d_sp = s.paths.distance(o, d);
    rec.zeta = rec.d_sp / s.graph.distance(o, d);
    RolloutResult r = rollout(policy, models, s, o, d, hop_limit, opts.deferral);
    rec.d_p = r.total_length;
    rec.success = r.success;
    rec.eta = r.success && near_shortest(r.total_length, rec.d_sp, s.graph.distance(o, d), opts.epsilon) ? 1 : 0;
    if (opts.keep_traces) rep.traces[i] = std::move(r);
  });

  std::size_t hits = 0;
  for (const auto& rec : rep.records) hits += static_cast<std::size_t>(rec.eta);
  rep.accuracy = rep.pairs == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(rep.pairs);
  return rep;
}

UtilizationReport expert_utilization(std::span<const RolloutResult> traces) {
  if (traces.empty()) throw InvalidArgument("expert utilization needs at least one trace");
  std::array<std::size_t, 3> counts{};
  std::size_t deferred = 0;
  for (const auto& t : traces) {
    for (auto k : t.per_hop_expert) ++counts[static_cast<std::size_t>(k)];
    deferred += static_cast<std::size_t>(t.deferred_count);
  }
  UtilizationReport u;
  u.hops = counts[0] + counts[1] + counts[2];
  if (u.hops == 0) return u;
  for (std::size_t k = 0; k < 3; ++k) u.fraction[k] = static_cast<double>(counts[k]) / static_cast<double>(u.hops);
  u.deferral_rate = static_cast<double>(deferred) / static_cast<double>(u.hops);
  return u;
}

std::string to_string(SuiteKind kind) {
  switch (kind) {
    case SuiteKind::Sparse: return "sparse";
    case SuiteKind::Dense: return "dense";
    case SuiteKind::Mixed: return "mixed";
  }
  return "?";
}

SuiteKind suite_kind_from_string(const std::string& s) {
  if (s == "sparse") return SuiteKind::Sparse;
  if (s == "dense") return SuiteKind::Dense;
  if (s == "mixed") return SuiteKind::Mixed;
  throw InvalidArgument("unknown suite '" + s + "'");
}

double ReportBundle::accuracy(int t, Policy policy) const {
  for (const auto& r : per_graph)
    if (r.t == t && r.policy == policy) return r.accuracy;
  throw InvalidArgument("no per-graph row for that step and policy");
}

double ReportBundle::cumulative_accuracy(int t, Policy policy) const {
  for (const auto& r : cumulative)
    if (r.t == t && r.policy == policy) return r.accuracy;
  throw InvalidArgument("no cumulative row for that step and policy");
}

namespace {

double suite_density(const SuiteConfig& cfg, int index) {
  switch (cfg.kind) {
    case SuiteKind::Sparse: return cfg.sparse_density;
    case SuiteKind::Dense: return cfg.dense_density;
    case SuiteKind::Mixed: return index % 2 == 0 ? cfg.sparse_density : cfg.dense_density;
  }
  return cfg.sparse_density;
}

}  // namespace

std::vector<std::uint64_t> select_suite_graphs(const SuiteConfig& cfg, const ModelSet& screening,
                                               int* candidates_screened) {
  std::vector<std::uint64_t> seeds;
  int tried = 0;
  EvalOptions opts = cfg.eval;
  opts.keep_traces = false;
  while (static_cast<int>(seeds.size()) < cfg.graphs && tried < cfg.max_candidates) {
    const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(tried));
    const double rho = suite_density(cfg, static_cast<int>(seeds.size()));
    ++tried;
    if (cfg.kind == SuiteKind::Mixed) {
      seeds.push_back(seed);
      continue;
    }
    const Scenario s(generate_graph(cfg.n, rho, cfg.radius, seed), cfg.conductance);
    const auto rep = apnsp_accuracy(Policy::GreedyTensile, screening, s, opts);
    if (rep.pairs == 0) continue;
    if (cfg.kind == SuiteKind::Sparse ? rep.accuracy < cfg.sparse_screen_max : rep.accuracy > cfg.dense_screen_min)
      seeds.push_back(seed);
  }
  if (candidates_screened) *candidates_screened = tried;
  return seeds;
}

namespace {

/// Model versions a policy's rollouts depend on.
std::array<std::uint64_t, 5> relevant_versions(Policy p, const std::array<std::uint64_t, 5>& v) {
  std::array<std::uint64_t, 5> out{};
  out.fill(~0ull);
  switch (p) {
    case Policy::GreedyTensile: out[0] = v[0]; break;
    case Policy::GreedyLax: out[1] = v[1]; break;
    case Policy::GreedySpectral: out[2] = v[2]; break;
    case Policy::MoeOpt: out[0] = v[0], out[1] = v[1], out[2] = v[2]; break;
    default: out = v;
  }
  return out;
}

}  // namespace

ReportBundle experiment_suite(const SuiteConfig& cfg, const ModelSet& pretrained) {
  ReportBundle bundle;
  bundle.kind = cfg.kind;
  bundle.random_init = cfg.random_init;
  bundle.graph_seeds = select_suite_graphs(cfg, pretrained, &bundle.candidates_screened);

  OnlineState state{pretrained, EvalDataset(cfg.meta.ed_capacity), 0, {}};
  if (cfg.random_init) {
    const ModelSet fresh =
        ModelSet::initial(derive_seed(cfg.seed, 0x72616e64ull), cfg.meta.deferral, pretrained.tensile.activation());
    state.models.tensile = fresh.tensile;
    state.models.lax = fresh.lax;
    state.models.spectral = fresh.spectral;
  }

  std::vector<Scenario> seen;
  // (graph index, policy) -> (versions, accuracy)
  std::map<std::pair<std::size_t, Policy>, std::pair<std::array<std::uint64_t, 5>, double>> cache;
  auto evaluate = [&](std::size_t gi, Policy p, bool traces) -> AccuracyReport {
    EvalOptions opts = cfg.eval;
    opts.keep_traces = traces;
    auto rep = apnsp_accuracy(p, state.models, seen[gi], opts);
    cache[{gi, p}] = {relevant_versions(p, state.versions), rep.accuracy};
    return rep;
  };

  for (std::size_t gi = 0; gi < bundle.graph_seeds.size(); ++gi) {
    const double rho = suite_density(cfg, static_cast<int>(gi));
    seen.emplace_back(generate_graph(cfg.n, rho, cfg.radius, bundle.graph_seeds[gi]), cfg.conductance);
    const Scenario& s = seen.back();
    bundle.steps.push_back(online_step(state, s, cfg.meta, derive_seed(cfg.seed, 0x73746570ull + gi)));
    const int t = state.t;

    for (Policy p : cfg.policies) {
      const bool traces = p == Policy::CaMoE;
      const auto rep = evaluate(gi, p, traces);
      bundle.per_graph.push_back({t, s.graph.id(), rho, p, rep.pairs, rep.accuracy});
      if (traces && !rep.traces.empty())
        bundle.utilization.push_back({t, s.graph.id(), rho, expert_utilization(rep.traces)});
    }
    for (Policy p : cfg.policies) {
      double total = 0.0;
      for (std::size_t gj = 0; gj <= gi; ++gj) {
        const auto it = cache.find({gj, p});
        if (it != cache.end() && it->second.first == relevant_versions(p, state.versions))
          total += it->second.second;
        else
          total += evaluate(gj, p, false).accuracy;
      }
      bundle.cumulative.push_back({t, p, total / static_cast<double>(gi + 1)});
    }
  }
  return bundle;
}

void write_per_graph_csv(std::ostream& out, const ReportBundle& b) {
  out << "t,graph_id,rho,policy,pairs,accuracy\n";
  for (const auto& r : b.per_graph)
    out << r.t << ',' << r.graph_id << ',' << fmt(r.density) << ',' << policy_name(r.policy) << ',' << r.pairs << ','
        << fmt(r.accuracy) << '\n';
}

void write_cumulative_csv(std::ostream& out, const ReportBundle& b) {
  out << "t,policy,cumulative_accuracy\n";
  for (const auto& r : b.cumulative) out << r.t << ',' << policy_name(r.policy) << ',' << fmt(r.accuracy) << '\n';
}

void write_utilization_csv(std::ostream& out, const ReportBundle& b) {
  out << "t,graph_id,rho,GT,GL,GS,deferral_rate,hops\n";
  for (const auto& r : b.utilization)
    out << r.t << ',' << r.graph_id << ',' << fmt(r.density) << ',' << fmt(r.util.fraction[0]) << ','
        << fmt(r.util.fraction[1]) << ',' << fmt(r.util.fraction[2]) << ',' << fmt(r.util.deferral_rate) << ','
        << r.util.hops << '\n';
}

nlohmann::json to_json(const ReportBundle& b) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& r : b.per_graph)
    per.push_back({{"t", r.t}, {"graph_id", r.graph_id}, {"rho", r.density}, {"policy", policy_name(r.policy)},
                   {"pairs", r.pairs}, {"accuracy", r.accuracy}});
  nlohmann::json cum = nlohmann::json::array();
  for (const auto& r : b.cumulative)
    cum.push_back({{"t", r.t}, {"policy", policy_name(r.policy)}, {"accuracy", r.accuracy}});
  nlohmann::json util = nlohmann::json::array();
  for (const auto& r : b.utilization)
    util.push_back({{"t", r.t},
                    {"graph_id", r.graph_id},
                    {"rho", r.density},
                    {"GT", r.util.fraction[0]},
                    {"GL", r.util.fraction[1]},
                    {"GS", r.util.fraction[2]},
                    {"deferral_rate", r.util.deferral_rate},
                    {"hops", r.util.hops}});
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : b.steps) steps.push_back(to_json(s));
  return {{"suite", to_string(b.kind)},
          {"random_init", b.random_init},
          {"graph_seeds", b.graph_seeds},
          {"candidates_screened", b.candidates_screened},
          {"per_graph", per},
          {"cumulative", cum},
          {"utilization", util},
          {"steps", steps}};
}

void write_report_bundle(const std::filesystem::path& dir, const ReportBundle& b) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "plot");
  auto open = [](const fs::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw DataError("cannot write " + p.string());
    return f;
  };
  {
    auto f = open(dir / "per_graph.csv");
    write_per_graph_csv(f, b);
  }
  {
    auto f = open(dir / "cumulative.csv");
    write_cumulative_csv(f, b);
  }
  {
    auto f = open(dir / "utilization.csv");
    write_utilization_csv(f, b);
  }
  {
    auto f = open(dir / "bundle.json");
    f << to_json(b).dump(2) << '\n';
  }
  {
    auto f = open(dir / "steps.jsonl");
    for (const auto& s : b.steps) f << to_json(s).dump() << '\n';
  }
  std::map<std::string, std::vector<std::pair<int, double>>> series;
  for (const auto& r : b.per_graph) series["accuracy_" + std::string(policy_name(r.policy))].emplace_back(r.t, r.accuracy);
  for (const auto& r : b.cumulative)
    series["cumulative_" + std::string(policy_name(r.policy))].emplace_back(r.t, r.accuracy);
  for (const auto& r : b.utilization) {
    series["utilization_GT"].emplace_back(r.t, r.util.fraction[0]);
    series["utilization_GL"].emplace_back(r.t, r.util.fraction[1]);
    series["utilization_GS"].emplace_back(r.t, r.util.fraction[2]);
  }
  for (const auto& [name, points] : series) {
    auto f = open(dir / "plot" / (name + ".dat"));
    for (const auto& [x, y] : points) f << x << ' ' << fmt(y) << '\n';
  }
}

}  // namespace camoe
