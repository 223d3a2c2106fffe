#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "camoe/eval.hpp"
#include "camoe/meta.hpp"
#include "camoe/pipeline.hpp"

namespace camoe {

inline constexpr const char* kVersion = "0.1.0";

/// Every tunable of a run, with the reference simulation settings as defaults.
struct RunConfig {
  std::uint64_t seed = 1;
  int n_train = 50;
  int seed_graphs = 10;
  double rho_gt = 5.0;
  double rho_sparse = 2.0;
  double radius = 1000.0;
  int hidden_layers = 2;  ///< fixed at [50 I, I]; recorded for provenance
  double epsilon = 0.05;
  int phi = 10;
  int iter_ft = 1000;
  int iter_pretrain = 20000;
  int iter_router = 1000;
  double learning_rate = 1e-3;
  int minibatch = 32;
  Optimizer optimizer = Optimizer::Adam;
  Activation activation = Activation::Relu;
  Conductance conductance = Conductance::Unit;
  double delta = 0.05;
  double accept_threshold = 0.8;
  bool deferral_candidate_features = true;
  bool deferral_confidence_features = false;
  bool online_deferral = false;
  std::size_t ed_capacity = 200;
  double hop_limit_factor = 2.0;
  int gating_pairs = 40;
  int deferral_rounds = 1;
  int router_pairs = 20;
  int max_pairs = 40;
  bool pretrain_distance_band = false;
  double low_stretch = 1.1;
  double high_stretch = 1.3;
  double short_fraction = 1.0;
  double long_fraction = 0.5;
  int suite_graphs = 20;
  int suite_n = 50;
  double sparse_screen_max = 0.80;
  double dense_screen_min = 0.90;
  int threads = 1;
  std::string out = "out";

  /// Sets one field from its textual key; throws InvalidArgument on an
  /// unknown key or a malformed value.
  void set(const std::string& key, const std::string& value);
  /// Every key with its current value, in a fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const;

  DeferralConfig deferral() const;
  PretrainConfig pretrain() const;
  MetaConfig meta() const;
  EvalOptions eval() const;
  SuiteConfig suite(SuiteKind kind, bool random_init) const;
};

/// Applies a flat key=value file: blank lines and lines starting with '#'
/// are ignored, surrounding whitespace is trimmed.
void apply_config(RunConfig& cfg, std::istream& in);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// Resolved configuration plus command line and version, written as
/// run.lock next to a command's outputs.
nlohmann::json run_lock(const RunConfig& cfg, const std::string& command, const std::vector<std::string>& argv);
void write_run_lock(const std::filesystem::path& dir, const RunConfig& cfg, const std::string& command,
                    const std::vector<std::string>& argv);

}  // namespace camoe
