#include "camoe/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>

#include "camoe/errors.hpp"

namespace camoe {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw InvalidArgument("bad value '" + value + "' for " + key);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw InvalidArgument("bad value '" + value + "' for " + key + " (expected true or false)");
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Field {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

template <typename T>
Field number_field(T RunConfig::*member) {
  return {[member](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>) return format_double(c.*member);
            else return std::to_string(c.*member);
          },
          [member](RunConfig& c, const std::string& k, const std::string& v) { c.*member = parse_number<T>(k, v); }};
}

Field bool_field(bool RunConfig::*member) {
  return {[member](const RunConfig& c) { return std::string(c.*member ? "true" : "false"); },
          [member](RunConfig& c, const std::string& k, const std::string& v) { c.*member = parse_bool(k, v); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table{
      {"seed", number_field(&RunConfig::seed)},
      {"n_train", number_field(&RunConfig::n_train)},
      {"seed_graphs", number_field(&RunConfig::seed_graphs)},
      {"rho_gt", number_field(&RunConfig::rho_gt)},
      {"rho_sparse", number_field(&RunConfig::rho_sparse)},
      {"radius", number_field(&RunConfig::radius)},
      {"hidden_layers", {[](const RunConfig& c) { return std::to_string(c.hidden_layers); },
                         [](RunConfig& c, const std::string& k, const std::string& v) {
                           if (parse_number<int>(k, v) != 2) throw InvalidArgument("hidden_layers is fixed at 2");
                           c.hidden_layers = 2;
                         }}},
      {"epsilon", number_field(&RunConfig::epsilon)},
      {"phi", number_field(&RunConfig::phi)},
      {"iter_ft", number_field(&RunConfig::iter_ft)},
      {"iter_pretrain", number_field(&RunConfig::iter_pretrain)},
      {"iter_router", number_field(&RunConfig::iter_router)},
      {"learning_rate", number_field(&RunConfig::learning_rate)},
      {"minibatch", number_field(&RunConfig::minibatch)},
      {"optimizer", {[](const RunConfig& c) { return to_string(c.optimizer); },
                     [](RunConfig& c, const std::string&, const std::string& v) {
                       c.optimizer = optimizer_from_string(v);
                     }}},
      {"activation", {[](const RunConfig& c) { return to_string(c.activation); },
                      [](RunConfig& c, const std::string&, const std::string& v) {
                        c.activation = activation_from_string(v);
                      }}},
      {"conductance", {[](const RunConfig& c) { return to_string(c.conductance); },
                       [](RunConfig& c, const std::string&, const std::string& v) {
                         c.conductance = conductance_from_string(v);
                       }}},
      {"delta", number_field(&RunConfig::delta)},
      {"accept_threshold", number_field(&RunConfig::accept_threshold)},
      {"deferral_candidate_features", bool_field(&RunConfig::deferral_candidate_features)},
      {"deferral_confidence_features", bool_field(&RunConfig::deferral_confidence_features)},
      {"online_deferral", bool_field(&RunConfig::online_deferral)},
      {"ed_capacity", number_field(&RunConfig::ed_capacity)},
      {"hop_limit_factor", number_field(&RunConfig::hop_limit_factor)},
      {"gating_pairs", number_field(&RunConfig::gating_pairs)},
      {"deferral_rounds", number_field(&RunConfig::deferral_rounds)},
      {"router_pairs", number_field(&RunConfig::router_pairs)},
      {"max_pairs", number_field(&RunConfig::max_pairs)},
      {"pretrain_distance_band", bool_field(&RunConfig::pretrain_distance_band)},
      {"low_stretch", number_field(&RunConfig::low_stretch)},
      {"high_stretch", number_field(&RunConfig::high_stretch)},
      {"short_fraction", number_field(&RunConfig::short_fraction)},
      {"long_fraction", number_field(&RunConfig::long_fraction)},
      {"suite_graphs", number_field(&RunConfig::suite_graphs)},
      {"suite_n", number_field(&RunConfig::suite_n)},
      {"sparse_screen_max", number_field(&RunConfig::sparse_screen_max)},
      {"dense_screen_min", number_field(&RunConfig::dense_screen_min)},
      {"threads", number_field(&RunConfig::threads)},
      {"out", {[](const RunConfig& c) { return c.out; },
               [](RunConfig& c, const std::string&, const std::string& v) { c.out = v; }}},
  };
  return table;
}

std::array<SamplerSpec, 3> samplers(const RunConfig& c) {
  std::array<SamplerSpec, 3> out;
  for (ExpertKind kind : kAllExperts) {
    auto s = SamplerSpec::for_kind(kind);
    s.low_stretch = c.low_stretch;
    s.high_stretch = c.high_stretch;
    s.short_fraction = c.short_fraction;
    s.long_fraction = c.long_fraction;
    s.max_pairs = c.max_pairs;
    out[static_cast<std::size_t>(kind)] = s;
  }
  return out;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const auto& [name, field] : fields()) {
    if (name == key) {
      field.set(*this, key, value);
      return;
    }
  }
  throw InvalidArgument("unknown config key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [name, field] : fields()) out.emplace_back(name, field.get(*this));
  return out;
}

DeferralConfig RunConfig::deferral() const {
  if (delta < 0.0) throw InvalidArgument("delta must be nonnegative");
  return {delta, accept_threshold, deferral_candidate_features, deferral_confidence_features};
}

PretrainConfig RunConfig::pretrain() const {
  PretrainConfig p;
  p.seed_graphs = seed_graphs;
  p.n = n_train;
  p.radius = radius;
  p.tensile_density = rho_gt;
  p.sparse_density = rho_sparse;
  p.seed = seed;
  p.conductance = conductance;
  p.activation = activation;
  p.samplers = samplers(*this);
  for (auto& sp : p.samplers) sp.distance_band = pretrain_distance_band;
  p.expert_train = {learning_rate, iter_pretrain, minibatch, 0, optimizer};
  p.gating_train = p.expert_train;
  p.gating_pairs = gating_pairs;
  p.deferral_rounds = deferral_rounds;
  p.deferral = deferral();
  return p;
}

MetaConfig RunConfig::meta() const {
  MetaConfig m;
  m.phi = phi;
  m.ed_capacity = ed_capacity;
  m.finetune = {learning_rate, iter_ft, minibatch, 0, optimizer};
  m.samplers = samplers(*this);
  m.router_iterations = iter_router;
  m.router_pairs = router_pairs;
  m.online_deferral = online_deferral;
  m.deferral_pairs = router_pairs;
  m.deferral = deferral();
  return m;
}

EvalOptions RunConfig::eval() const {
  EvalOptions e;
  e.epsilon = epsilon;
  e.hop_limit_factor = hop_limit_factor;
  e.deferral = deferral();
  e.threads = threads;
  return e;
}

SuiteConfig RunConfig::suite(SuiteKind kind, bool random_init) const {
  SuiteConfig s;
  s.kind = kind;
  s.graphs = suite_graphs;
  s.n = suite_n;
  s.radius = radius;
  s.sparse_density = rho_sparse;
  s.dense_density = rho_gt;
  s.seed = seed;
  s.sparse_screen_max = sparse_screen_max;
  s.dense_screen_min = dense_screen_min;
  s.random_init = random_init;
  s.conductance = conductance;
  s.meta = meta();
  s.eval = eval();
  return s;
}

void apply_config(RunConfig& cfg, std::istream& in) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key=value");
    cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read config " + path.string());
  apply_config(cfg, in);
}

nlohmann::json run_lock(const RunConfig& cfg, const std::string& command, const std::vector<std::string>& argv) {
  nlohmann::json config = nlohmann::json::object();
  for (const auto& [k, v] : cfg.entries()) config[k] = v;
  return {{"format", "camoe-run-lock"}, {"version", kVersion}, {"command", command}, {"argv", argv},
          {"config", config}};
}

void write_run_lock(const std::filesystem::path& dir, const RunConfig& cfg, const std::string& command,
                    const std::vector<std::string>& argv) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "run.lock");
  if (!out) throw DataError("cannot write " + (dir / "run.lock").string());
  out << run_lock(cfg, command, argv).dump(2) << '\n';
}

}  // namespace camoe
