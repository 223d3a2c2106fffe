#include "camoe/mlp.hpp"

namespace camoe {

std::string to_string(HeadMode mode) {
  return mode == HeadMode::Regression ? "regression" : "classifier";
}

std::string to_string(Activation activation) {
  return activation == Activation::Relu ? "relu" : "tanh";
}

std::string to_string(Optimizer optimizer) { return optimizer == Optimizer::Sgd ? "sgd" : "adam"; }

HeadMode head_mode_from_string(const std::string& s) {
  if (s == "regression") return HeadMode::Regression;
  if (s == "classifier") return HeadMode::Classifier;
  throw InvalidArgument("unknown head mode '" + s + "'");
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  throw InvalidArgument("unknown activation '" + s + "'");
}

Optimizer optimizer_from_string(const std::string& s) {
  if (s == "sgd") return Optimizer::Sgd;
  if (s == "adam") return Optimizer::Adam;
  throw InvalidArgument("unknown optimizer '" + s + "'");
}

nlohmann::json to_json(const Network& m) {
  std::vector<int> dims{m.input_dim()};
  dims.insert(dims.end(), m.hidden().begin(), m.hidden().end());
  dims.push_back(1);
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : m.layers()) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(layer.weights.cols()));
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) row[static_cast<std::size_t>(c)] = layer.weights(r, c);
      rows.push_back(row);
    }
    layers.push_back({{"weights", rows},
                      {"bias", std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size())}});
  }
  nlohmann::json norm = nullptr;
  if (m.normalized()) {
    const auto& sh = m.input_shift();
    const auto& sc = m.input_scale();
    norm = {{"shift", std::vector<double>(sh.data(), sh.data() + sh.size())},
            {"scale", std::vector<double>(sc.data(), sc.data() + sc.size())}};
  }
  return {{"format", "camoe-mlp"},
          {"version", 2},
          {"mode", to_string(m.mode())},
          {"activation", to_string(m.activation())},
          {"dims", dims},
          {"init_seed", m.init_seed()},
          {"normalization", norm},
          {"layers", layers}};
}

Network network_from_json(const nlohmann::json& j) {
  try {
    const int version = j.at("version").get<int>();
    if (j.at("format").get<std::string>() != "camoe-mlp" || (version != 1 && version != 2))
      throw DataError("model file: unsupported format or version");
    const auto dims = j.at("dims").get<std::vector<int>>();
    if (dims.size() < 2 || dims.back() != 1) throw DataError("model file: bad dims");
    const std::vector<int> hidden(dims.begin() + 1, dims.end() - 1);
    Network m(dims.front(), hidden, head_mode_from_string(j.at("mode").get<std::string>()),
              j.at("init_seed").get<std::uint64_t>(),
              activation_from_string(j.at("activation").get<std::string>()));
    const auto& layers = j.at("layers");
    if (layers.size() != m.layers().size()) throw DataError("model file: layer count disagrees with dims");
    for (std::size_t k = 0; k < layers.size(); ++k) {
      auto& layer = m.layers()[k];
      const auto& rows = layers[k].at("weights");
      if (static_cast<Eigen::Index>(rows.size()) != layer.weights.rows())
        throw DataError("model file: weight shape disagrees with dims");
      for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
        const auto row = rows[static_cast<std::size_t>(r)].get<std::vector<double>>();
        if (static_cast<Eigen::Index>(row.size()) != layer.weights.cols())
          throw DataError("model file: weight shape disagrees with dims");
        for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = row[static_cast<std::size_t>(c)];
      }
      const auto bias = layers[k].at("bias").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(bias.size()) != layer.bias.size())
        throw DataError("model file: bias shape disagrees with dims");
      for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = bias[static_cast<std::size_t>(r)];
    }
    if (version == 2 && !j.at("normalization").is_null()) {
      const auto shift = j["normalization"].at("shift").get<std::vector<double>>();
      const auto scale = j["normalization"].at("scale").get<std::vector<double>>();
      if (shift.size() != scale.size()) throw DataError("model file: normalization shape mismatch");
      m.set_normalization(Eigen::Map<const Eigen::VectorXd>(shift.data(), static_cast<Eigen::Index>(shift.size())),
                          Eigen::Map<const Eigen::VectorXd>(scale.data(), static_cast<Eigen::Index>(scale.size())));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
}

}  // namespace camoe
