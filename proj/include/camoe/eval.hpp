#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "camoe/cascade.hpp"
#include "camoe/meta.hpp"
#include "camoe/scenario.hpp"

namespace camoe {

/// Near-shortest indicator: d_p / d_sp <= zeta (1 + eps) with zeta = d_sp / d_e.
bool near_shortest(double d_p, double d_sp, double d_e, double epsilon);

struct PairRecord {
  int origin = kNoNode;
  int destination = kNoNode;
  double d_p = 0.0;
  double d_sp = 0.0;
  double zeta = 0.0;
  bool success = false;
  int eta = 0;
};

struct AccuracyReport {
  std::uint64_t graph_id = 0;
  Policy policy = Policy::CaMoE;
  std::size_t pairs = 0;
  double accuracy = 0.0;
  std::vector<PairRecord> records;
  std::vector<RolloutResult> traces;  ///< filled when EvalOptions::keep_traces
};

struct EvalOptions {
  double epsilon = 0.05;
  double hop_limit_factor = 2.0;  ///< hop limit = factor * n
  DeferralConfig deferral{};
  bool keep_traces = false;
  int threads = 1;

  int hop_limit(const EuclideanGraph& g) const {
    return static_cast<int>(hop_limit_factor * g.size());
  }
};

/// Rolls out every connected ordered pair (O != D) of `s` under `policy`.
/// Failed rollouts score eta = 0. A graph without connected pairs reports
/// accuracy 0 over 0 pairs.
AccuracyReport apnsp_accuracy(Policy policy, const ModelSet& models, const Scenario& s, const EvalOptions& opts);

struct UtilizationReport {
  std::array<double, 3> fraction{};  ///< GT, GL, GS shares of all executed hops
  double deferral_rate = 0.0;
  std::size_t hops = 0;

  double lower_tier_fraction() const { return fraction[0] + fraction[1]; }
};

/// Throws InvalidArgument on an empty trace list. Traces without hops
/// contribute nothing; if no hop was executed all fractions are 0.
UtilizationReport expert_utilization(std::span<const RolloutResult> traces);

enum class SuiteKind {
  Sparse,  ///< rho = 2 graphs on which the starting Greedy-Tensile scores below sparse_screen_max
  Dense,   ///< rho = 5 graphs on which the starting Greedy-Tensile scores above dense_screen_min
  Mixed,   ///< alternating rho = 2 and rho = 5, unscreened
};

std::string to_string(SuiteKind kind);
SuiteKind suite_kind_from_string(const std::string& s);

struct SuiteConfig {
  SuiteKind kind = SuiteKind::Sparse;
  int graphs = 20;
  int n = 50;
  double radius = 1000.0;
  double sparse_density = 2.0;
  double dense_density = 5.0;
  std::uint64_t seed = 1;
  double sparse_screen_max = 0.80;
  double dense_screen_min = 0.90;
  int max_candidates = 500;
  bool random_init = false;  ///< start the stream from freshly initialized experts
  std::vector<Policy> policies{kReportPolicies.begin(), kReportPolicies.end()};
  Conductance conductance = Conductance::Unit;
  MetaConfig meta{};
  EvalOptions eval{};
};

struct SuiteRow {
  int t = 0;
  std::uint64_t graph_id = 0;
  double density = 0.0;
  Policy policy = Policy::CaMoE;
  std::size_t pairs = 0;
  double accuracy = 0.0;
};

struct CumulativeRow {
  int t = 0;
  Policy policy = Policy::CaMoE;
  double accuracy = 0.0;  ///< mean over G_1..G_t with the models held at time t
};

struct UtilizationRow {
  int t = 0;
  std::uint64_t graph_id = 0;
  double density = 0.0;
  UtilizationReport util;
};

struct ReportBundle {
  SuiteKind kind = SuiteKind::Sparse;
  bool random_init = false;
  std::vector<std::uint64_t> graph_seeds;
  int candidates_screened = 0;
  std::vector<SuiteRow> per_graph;
  std::vector<CumulativeRow> cumulative;
  std::vector<UtilizationRow> utilization;
  std::vector<StepReport> steps;

  /// Accuracy of `policy` on graph t (1-based) from the per-graph table.
  double accuracy(int t, Policy policy) const;
  double cumulative_accuracy(int t, Policy policy) const;
};

/// Seeds of the graphs a suite streams, screened with `screening` models.
std::vector<std::uint64_t> select_suite_graphs(const SuiteConfig& cfg, const ModelSet& screening,
                                               int* candidates_screened = nullptr);

/// Streams the suite's graphs through online_step starting from `pretrained`
/// (or from fresh experts when cfg.random_init), evaluating every policy on
/// each new graph and cumulatively over all graphs seen so far.
ReportBundle experiment_suite(const SuiteConfig& cfg, const ModelSet& pretrained);

/// CSV: t,graph_id,rho,policy,pairs,accuracy.
void write_per_graph_csv(std::ostream& out, const ReportBundle& b);
/// CSV: t,policy,cumulative_accuracy.
void write_cumulative_csv(std::ostream& out, const ReportBundle& b);
/// CSV: t,graph_id,rho,GT,GL,GS,deferral_rate,hops.
void write_utilization_csv(std::ostream& out, const ReportBundle& b);
nlohmann::json to_json(const ReportBundle& b);

/// Writes per_graph.csv, cumulative.csv, utilization.csv, bundle.json,
/// steps.jsonl and plot/ series files (one "x y" file per curve).
void write_report_bundle(const std::filesystem::path& dir, const ReportBundle& b);

}  // namespace camoe
