#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "camoe/config.hpp"
#include "camoe/errors.hpp"
#include "camoe/eval.hpp"
#include "camoe/pipeline.hpp"

namespace fs = std::filesystem;
using namespace camoe;

namespace {

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

// A manifest lists graph files relative to its own directory.
std::vector<EuclideanGraph> load_graphs(const fs::path& manifest_path) {
  const auto manifest = read_json(manifest_path);
  if (!manifest.contains("files")) throw DataError(manifest_path.string() + ": missing 'files'");
  std::vector<EuclideanGraph> graphs;
  for (const auto& f : manifest.at("files")) {
    try {
      graphs.push_back(graph_from_json(read_json(manifest_path.parent_path() / f.get<std::string>())));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(f.dump() + ": " + e.what());
    }
  }
  return graphs;
}

std::vector<Scenario> scenarios(std::vector<EuclideanGraph> graphs, Conductance c) {
  std::vector<Scenario> out;
  out.reserve(graphs.size());
  for (auto& g : graphs) out.emplace_back(std::move(g), c);
  return out;
}

ModelSet load_models(const fs::path& path) {
  try {
    return model_set_from_json(read_json(path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string dump_line(const nlohmann::json& j) { return j.dump() + '\n'; }

struct Common {
  std::string config_file;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out;
};

RunConfig resolve(const Common& c, const CLI::App& app) {
  RunConfig cfg;
  if (!c.config_file.empty()) apply_config_file(cfg, c.config_file);
  if (const char* env = std::getenv("CAMOE_SEED")) cfg.set("seed", env);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InvalidArgument("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (app.count("--seed")) cfg.seed = c.seed;
  if (app.count("--threads")) cfg.threads = c.threads;
  if (app.count("--out")) cfg.out = c.out;
  return cfg;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_file, "key=value config file")->check(CLI::ExistingFile);
  sub->add_option("--set", c.overrides, "override one config key (key=value), repeatable");
  sub->add_option("--seed", c.seed, "top-level seed");
  sub->add_option("--threads", c.threads, "worker threads for rollouts")->check(CLI::PositiveNumber);
  sub->add_option("--out", c.out, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cascaded mixture-of-experts routing for near-shortest paths"};
  app.require_subcommand(1);
  const std::vector<std::string> args(argv, argv + argc);

  Common common;

  auto* gen = app.add_subcommand("generate", "write seeded random Euclidean graphs and a manifest");
  add_common(gen, common);
  int count = 1;
  int gen_n = 50;
  double gen_rho = 2.0;
  std::string regenerate;
  gen->add_option("--count", count, "number of graphs")->check(CLI::NonNegativeNumber);
  gen->add_option("--n", gen_n, "nodes per graph")->check(CLI::PositiveNumber);
  gen->add_option("--rho", gen_rho, "density (nodes per R^2)")->check(CLI::PositiveNumber);
  gen->add_option("--from-manifest", regenerate, "regenerate the graphs listed in a manifest");

  auto* pre = app.add_subcommand("pretrain", "train experts, router and deferral rule on seed graphs");
  add_common(pre, common);
  std::string tensile_manifest;
  std::string sparse_manifest;
  int iterations = -1;
  pre->add_option("--tensile-graphs", tensile_manifest, "manifest of dense seed graphs (default: generated)");
  pre->add_option("--sparse-graphs", sparse_manifest, "manifest of sparse seed graphs (default: generated)");
  pre->add_option("--iterations", iterations, "training iterations per component")->check(CLI::NonNegativeNumber);

  auto* online = app.add_subcommand("run-online", "stream graphs through the online update loop");
  add_common(online, common);
  std::string models_path;
  std::string graphs_manifest;
  std::string resume_path;
  bool random_init = false;
  online->add_option("--models", models_path, "pretrained model bundle");
  online->add_option("--graphs", graphs_manifest, "manifest of the graph stream")->required();
  online->add_option("--resume", resume_path, "checkpoint to continue from");
  online->add_flag("--random-init", random_init, "start from freshly initialized experts");

  auto* evaluate = app.add_subcommand("evaluate", "accuracy and utilization of routing policies");
  add_common(evaluate, common);
  std::vector<std::string> policies;
  bool traces = false;
  evaluate->add_option("--models", models_path, "model bundle")->required();
  evaluate->add_option("--graphs", graphs_manifest, "manifest of graphs to evaluate")->required();
  evaluate->add_option("--policy", policies, "policy name, repeatable (default: all report policies)");
  evaluate->add_flag("--traces", traces, "write rollout traces");

  auto* report = app.add_subcommand("report", "run an experiment suite and write its report bundle");
  add_common(report, common);
  std::string suite = "sparse";
  report->add_option("--suite", suite, "sparse, dense or mixed");
  report->add_option("--models", models_path, "pretrained model bundle (default: pretrain first)");
  report->add_flag("--random-init", random_init, "start the stream from freshly initialized experts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const RunConfig cfg = resolve(common, *sub);
    const fs::path out = cfg.out;
    write_run_lock(out, cfg, sub->get_name(), args);

    if (sub == gen) {
      nlohmann::json manifest{{"format", "camoe-manifest"}, {"n", gen_n}, {"rho", gen_rho}, {"R", cfg.radius}};
      std::vector<std::uint64_t> seeds;
      if (!regenerate.empty()) {
        const auto m = read_json(regenerate);
        seeds = m.at("seeds").get<std::vector<std::uint64_t>>();
        gen_n = m.at("n").get<int>();
        gen_rho = m.at("rho").get<double>();
        manifest["n"] = gen_n;
        manifest["rho"] = gen_rho;
        manifest["R"] = m.at("R");
      } else {
        for (int i = 0; i < count; ++i) seeds.push_back(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
      }
      nlohmann::json files = nlohmann::json::array();
      for (std::size_t i = 0; i < seeds.size(); ++i) {
        const std::string name = "graph_" + std::to_string(i) + ".json";
        const auto g = generate_graph(gen_n, gen_rho, manifest["R"].get<double>(), seeds[i]);
        write_text(out / name, to_json(g).dump() + '\n');
        files.push_back(name);
      }
      manifest["seeds"] = seeds;
      manifest["files"] = files;
      write_text(out / "manifest.json", manifest.dump(2) + '\n');
      return 0;
    }

    if (sub == pre) {
      PretrainConfig pc = cfg.pretrain();
      if (iterations >= 0) pc.expert_train.iterations = pc.gating_train.iterations = iterations;
      const auto tensile = tensile_manifest.empty() ? seed_scenarios(pc, pc.tensile_density, 1000)
                                                    : scenarios(load_graphs(tensile_manifest), pc.conductance);
      const auto sparse = sparse_manifest.empty() ? seed_scenarios(pc, pc.sparse_density, 2000)
                                                  : scenarios(load_graphs(sparse_manifest), pc.conductance);
      if (tensile.empty() || sparse.empty()) throw DataError("pretraining needs at least one graph per density");
      PretrainLog log;
      const ModelSet models = pretrain(pc, tensile, sparse, &log);
      write_text(out / "models.json", to_json(models).dump() + '\n');
      write_text(out / "pretrain_log.json", to_json(log).dump(2) + '\n');
      return 0;
    }

    if (sub == online) {
      const MetaConfig meta = cfg.meta();
      OnlineState state{ModelSet::initial(cfg.seed, meta.deferral, cfg.activation), EvalDataset(meta.ed_capacity)};
      if (!resume_path.empty()) {
        try {
          state = online_state_from_json(read_json(resume_path));
        } catch (const nlohmann::json::exception& e) {
          throw DataError(resume_path + ": " + e.what());
        }
      } else if (!models_path.empty()) {
        state.models = load_models(models_path);
      } else if (!random_init) {
        throw InvalidArgument("run-online needs --models, --resume or --random-init");
      }
      if (random_init && resume_path.empty()) {
        const ModelSet fresh = ModelSet::initial(derive_seed(cfg.seed, 0x72616e64ull), meta.deferral, cfg.activation);
        state.models.tensile = fresh.tensile;
        state.models.lax = fresh.lax;
        state.models.spectral = fresh.spectral;
      }
      const auto stream = scenarios(load_graphs(graphs_manifest), cfg.conductance);
      std::ofstream steps(out / "steps.jsonl", resume_path.empty() ? std::ios::trunc : std::ios::app);
      if (!steps) throw DataError("cannot write steps.jsonl");
      for (std::size_t i = static_cast<std::size_t>(state.t); i < stream.size(); ++i) {
        const StepReport r = online_step(state, stream[i], meta, derive_seed(cfg.seed, 0x6f6e6c69ull + i));
        steps << dump_line(to_json(r));
        write_text(out / "checkpoint.json", to_json(state).dump() + '\n');
      }
      write_text(out / "models.json", to_json(state.models).dump() + '\n');
      return 0;
    }

    if (sub == evaluate) {
      const ModelSet models = load_models(models_path);
      std::vector<Policy> selected;
      for (const auto& p : policies) selected.push_back(policy_from_string(p));
      if (selected.empty()) selected.assign(kReportPolicies.begin(), kReportPolicies.end());
      EvalOptions opts = cfg.eval();
      opts.keep_traces = true;
      const auto graphs = scenarios(load_graphs(graphs_manifest), cfg.conductance);

      std::string per_graph = "graph_id,rho,policy,pairs,accuracy\n";
      std::string util = "graph_id,rho,policy,GT,GL,GS,deferral_rate,hops\n";
      std::string trace_lines;
      nlohmann::json summary = nlohmann::json::array();
      char buf[256];
      for (const auto& s : graphs) {
        for (Policy p : selected) {
          const AccuracyReport r = apnsp_accuracy(p, models, s, opts);
          std::snprintf(buf, sizeof buf, "%llu,%.10f,%s,%zu,%.10f\n", static_cast<unsigned long long>(r.graph_id),
                        s.graph.density(), std::string(policy_name(p)).c_str(), r.pairs, r.accuracy);
          per_graph += buf;
          nlohmann::json row{{"graph_id", r.graph_id}, {"policy", policy_name(p)}, {"pairs", r.pairs},
                             {"accuracy", r.accuracy}};
          if (!r.traces.empty() && p != Policy::ShortestPath) {
            const UtilizationReport u = expert_utilization(r.traces);
            std::snprintf(buf, sizeof buf, "%llu,%.10f,%s,%.10f,%.10f,%.10f,%.10f,%zu\n",
                          static_cast<unsigned long long>(r.graph_id), s.graph.density(),
                          std::string(policy_name(p)).c_str(), u.fraction[0], u.fraction[1], u.fraction[2],
                          u.deferral_rate, u.hops);
            util += buf;
            row["utilization"] = {{"GT", u.fraction[0]}, {"GL", u.fraction[1]}, {"GS", u.fraction[2]},
                                  {"deferral_rate", u.deferral_rate}};
          }
          summary.push_back(row);
          if (traces) {
            for (std::size_t k = 0; k < r.traces.size(); ++k) {
              auto j = trace_json(r.traces[k], r.records[k].origin, r.records[k].destination);
              j["graph_id"] = r.graph_id;
              j["policy"] = policy_name(p);
              trace_lines += dump_line(j);
            }
          }
        }
      }
      write_text(out / "per_graph.csv", per_graph);
      write_text(out / "utilization.csv", util);
      write_text(out / "report.json", summary.dump(2) + '\n');
      if (traces) write_text(out / "traces.jsonl", trace_lines);
      return 0;
    }

    if (sub == report) {
      const ModelSet models = [&] {
        if (!models_path.empty()) return load_models(models_path);
        const PretrainConfig pc = cfg.pretrain();
        return pretrain(pc, seed_scenarios(pc, pc.tensile_density, 1000), seed_scenarios(pc, pc.sparse_density, 2000));
      }();
      const ReportBundle b = experiment_suite(cfg.suite(suite_kind_from_string(suite), random_init), models);
      write_report_bundle(out, b);
      return 0;
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
