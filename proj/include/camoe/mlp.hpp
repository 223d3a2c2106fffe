#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "camoe/errors.hpp"
#include "camoe/rng.hpp"

namespace camoe {

enum class HeadMode { Regression, Classifier };
enum class Activation { Relu, Tanh };
enum class Optimizer { Sgd, Adam };

struct TrainConfig {
  double learning_rate = 1e-3;
  int iterations = 1000;
  int minibatch_size = 32;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::Sgd;
};

/// Fully connected network with a scalar head: linear for regression,
/// logistic for binary classification. Value type; copy to fork.
template <typename Scalar>
class Mlp {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

  struct Layer {
    Matrix weights;  // out x in
    Vector bias;
  };

  Mlp() = default;

  /// He-style uniform initialization: U(-sqrt(6 / fan_in), sqrt(6 / fan_in)),
  /// zero biases.
  Mlp(int input_dim, std::vector<int> hidden, HeadMode mode, std::uint64_t init_seed,
      Activation activation = Activation::Relu)
      : input_dim_(input_dim), hidden_(std::move(hidden)), mode_(mode),
        activation_(activation), init_seed_(init_seed) {
    if (input_dim < 1) throw InvalidArgument("network input dimension must be positive");
    input_shift_ = Vector::Zero(input_dim);
    input_scale_ = Vector::Ones(input_dim);
    SplitMix64 rng(derive_seed(init_seed, 0x696e6974ull));
    int fan_in = input_dim;
    for (std::size_t k = 0; k <= hidden_.size(); ++k) {
      const int fan_out = k < hidden_.size() ? hidden_[k] : 1;
      if (fan_out < 1) throw InvalidArgument("hidden layer widths must be positive");
      const double limit = std::sqrt(6.0 / fan_in);
      Layer layer{Matrix(fan_out, fan_in), Vector::Zero(fan_out)};
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
          layer.weights(r, c) = static_cast<Scalar>(uniform(rng, -limit, limit));
      layers_.push_back(std::move(layer));
      fan_in = fan_out;
    }
  }

  /// Hidden widths [50 I, I].
  static std::vector<int> default_hidden(int input_dim) { return {50 * input_dim, input_dim}; }

  int input_dim() const noexcept { return input_dim_; }
  const std::vector<int>& hidden() const noexcept { return hidden_; }
  HeadMode mode() const noexcept { return mode_; }
  Activation activation() const noexcept { return activation_; }
  std::uint64_t init_seed() const noexcept { return init_seed_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  std::vector<Layer>& layers() noexcept { return layers_; }

  /// Per-feature standardization applied before the first layer:
  /// x' = (x - shift) .* scale. Identity until fitted.
  bool normalized() const noexcept { return normalized_; }
  const Vector& input_shift() const noexcept { return input_shift_; }
  const Vector& input_scale() const noexcept { return input_scale_; }

  void set_normalization(const Vector& shift, const Vector& scale) {
    if (shift.size() != input_dim_ || scale.size() != input_dim_)
      throw InvalidArgument("normalization has the wrong dimension");
    if (!shift.allFinite() || !scale.allFinite() || (scale.array() <= Scalar(0)).any())
      throw InvalidArgument("normalization needs finite shifts and positive scales");
    input_shift_ = shift;
    input_scale_ = scale;
    normalized_ = true;
  }

  /// Shift = column mean, scale = 1 / population standard deviation (1 for
  /// constant features).
  void fit_normalization(const Eigen::Ref<const Matrix>& xs) {
    check_input(xs);
    const Vector mean = xs.rowwise().mean();
    Vector scale(input_dim_);
    for (Eigen::Index f = 0; f < input_dim_; ++f) {
      const Scalar sd = std::sqrt((xs.row(f).array() - mean(f)).square().mean());
      scale(f) = sd > Scalar(1e-12) ? Scalar(1) / sd : Scalar(1);
    }
    set_normalization(mean, scale);
  }

  std::size_t parameter_count() const noexcept {
    std::size_t total = 0;
    for (const auto& l : layers_) total += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    return total;
  }

  void set_zero() {
    for (auto& l : layers_) {
      l.weights.setZero();
      l.bias.setZero();
    }
  }

  /// Head output for each column of `xs` (input_dim x batch).
  RowVector forward_batch(const Eigen::Ref<const Matrix>& xs) const {
    check_input(xs);
    Matrix a = standardize(xs);
    for (std::size_t k = 0; k + 1 < layers_.size(); ++k)
      a = activate((layers_[k].weights * a).colwise() + layers_[k].bias);
    RowVector z = (layers_.back().weights * a).colwise() + layers_.back().bias;
    if (mode_ == HeadMode::Classifier) return z.unaryExpr([](Scalar t) { return logistic(t); });
    return z;
  }

  Scalar forward(const Eigen::Ref<const Vector>& x) const { return forward_batch(x)(0); }

  /// Mean squared error (regression) or mean binary cross-entropy (classifier).
  Scalar loss(const Eigen::Ref<const Matrix>& xs, const Eigen::Ref<const Vector>& ys) const {
    const RowVector z = logits(xs);
    Scalar total = 0;
    for (Eigen::Index i = 0; i < z.size(); ++i) total += pointwise_loss(z(i), ys(i));
    return total / static_cast<Scalar>(z.size());
  }

  /// Gradient of loss(xs, ys) with respect to every parameter, shaped like layers().
  std::vector<Layer> gradient(const Eigen::Ref<const Matrix>& xs,
                              const Eigen::Ref<const Vector>& ys) const {
    check_input(xs);
    const std::size_t depth = layers_.size();
    std::vector<Matrix> pre(depth);
    std::vector<Matrix> post(depth + 1);
    post[0] = standardize(xs);
    for (std::size_t k = 0; k < depth; ++k) {
      pre[k] = (layers_[k].weights * post[k]).colwise() + layers_[k].bias;
      post[k + 1] = k + 1 < depth ? activate(pre[k]) : pre[k];
    }
    const auto batch = static_cast<Scalar>(xs.cols());
    Matrix delta(1, xs.cols());
    for (Eigen::Index i = 0; i < xs.cols(); ++i) {
      const Scalar z = pre[depth - 1](0, i);
      delta(0, i) = (mode_ == HeadMode::Regression ? Scalar(2) * (z - ys(i)) : logistic(z) - ys(i)) / batch;
    }
    std::vector<Layer> grads(depth);
    for (std::size_t k = depth; k-- > 0;) {
      grads[k].weights = delta * post[k].transpose();
      grads[k].bias = delta.rowwise().sum();
      if (k > 0) delta = (layers_[k].weights.transpose() * delta).cwiseProduct(activate_derivative(pre[k - 1]));
    }
    return grads;
  }

  friend bool operator==(const Mlp& a, const Mlp& b) {
    if (a.input_dim_ != b.input_dim_ || a.hidden_ != b.hidden_ || a.mode_ != b.mode_ ||
        a.activation_ != b.activation_ || a.layers_.size() != b.layers_.size() ||
        a.normalized_ != b.normalized_ || a.input_shift_ != b.input_shift_ || a.input_scale_ != b.input_scale_)
      return false;
    for (std::size_t k = 0; k < a.layers_.size(); ++k)
      if (a.layers_[k].weights != b.layers_[k].weights || a.layers_[k].bias != b.layers_[k].bias)
        return false;
    return true;
  }

  static Scalar logistic(Scalar z) {
    return z >= 0 ? Scalar(1) / (Scalar(1) + std::exp(-z)) : std::exp(z) / (Scalar(1) + std::exp(z));
  }

 private:
  RowVector logits(const Eigen::Ref<const Matrix>& xs) const {
    check_input(xs);
    Matrix a = standardize(xs);
    for (std::size_t k = 0; k + 1 < layers_.size(); ++k)
      a = activate((layers_[k].weights * a).colwise() + layers_[k].bias);
    return (layers_.back().weights * a).colwise() + layers_.back().bias;
  }

  Scalar pointwise_loss(Scalar z, Scalar y) const {
    if (mode_ == HeadMode::Regression) return (z - y) * (z - y);
    // softplus(z) - y z, stable for large |z|.
    const Scalar softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    return softplus - y * z;
  }

  void check_input(const Eigen::Ref<const Matrix>& xs) const {
    if (layers_.empty()) throw InvalidArgument("network has no layers");
    if (xs.rows() != input_dim_)
      throw InvalidArgument("input has " + std::to_string(xs.rows()) + " features, network expects " +
                            std::to_string(input_dim_));
  }

  Matrix standardize(const Eigen::Ref<const Matrix>& xs) const {
    if (!normalized_) return xs;
    return ((xs.colwise() - input_shift_).array().colwise() * input_scale_.array()).matrix();
  }

  Matrix activate(const Matrix& z) const {
    if (activation_ == Activation::Relu) return z.cwiseMax(Scalar(0));
    return z.array().tanh().matrix();
  }

  Matrix activate_derivative(const Matrix& z) const {
    if (activation_ == Activation::Relu)
      return z.unaryExpr([](Scalar t) { return t > 0 ? Scalar(1) : Scalar(0); });
    return (Scalar(1) - z.array().tanh().square()).matrix();
  }

  int input_dim_ = 0;
  std::vector<int> hidden_;
  HeadMode mode_ = HeadMode::Regression;
  Activation activation_ = Activation::Relu;
  std::uint64_t init_seed_ = 0;
  std::vector<Layer> layers_;
  bool normalized_ = false;
  Vector input_shift_;
  Vector input_scale_;
};

using Network = Mlp<double>;

namespace detail {

template <typename Scalar>
void check_training_data(const Mlp<Scalar>& m, const Eigen::Ref<const typename Mlp<Scalar>::Matrix>& xs,
                         const Eigen::Ref<const typename Mlp<Scalar>::Vector>& ys) {
  if (xs.cols() < 1 || xs.cols() != ys.size())
    throw InvalidArgument("training set needs matching, nonempty inputs and targets");
  if (xs.rows() != m.input_dim()) throw InvalidArgument("training inputs have the wrong dimension");
  if (!xs.allFinite() || !ys.allFinite()) throw DataError("training data contains NaN or Inf");
}

}  // namespace detail

/// Minibatch training. Minibatches walk a fresh seeded permutation of the
/// samples each epoch; a set no larger than one minibatch is trained full-batch.
/// A model without input normalization gets one fitted to `xs` first, unless
/// no iterations are requested.
/// `observer(iteration, model)` runs before each update when provided.
template <typename Scalar, typename Observer>
Mlp<Scalar> train(Mlp<Scalar> m, const Eigen::Ref<const typename Mlp<Scalar>::Matrix>& xs,
                  const Eigen::Ref<const typename Mlp<Scalar>::Vector>& ys, const TrainConfig& cfg,
                  Observer&& observer) {
  using Model = Mlp<Scalar>;
  using Matrix = typename Model::Matrix;
  using Vector = typename Model::Vector;
  detail::check_training_data(m, xs, ys);
  if (cfg.iterations < 0 || cfg.minibatch_size < 1 || !(cfg.learning_rate > 0))
    throw InvalidArgument("invalid training configuration");
  if (cfg.iterations > 0 && !m.normalized()) m.fit_normalization(xs);

  const auto count = static_cast<std::size_t>(xs.cols());
  const auto batch = std::min(count, static_cast<std::size_t>(cfg.minibatch_size));
  std::vector<Eigen::Index> order(count);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  SplitMix64 rng(derive_seed(cfg.seed, 0x747261696eull));
  std::size_t cursor = count;

  // Adam moments, allocated lazily.
  std::vector<typename Model::Layer> m1, m2;
  const Scalar beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

  Matrix bx(xs.rows(), static_cast<Eigen::Index>(batch));
  Vector by(static_cast<Eigen::Index>(batch));
  const auto lr = static_cast<Scalar>(cfg.learning_rate);
  for (int it = 0; it < cfg.iterations; ++it) {
    observer(it, static_cast<const Model&>(m));
    for (std::size_t b = 0; b < batch; ++b) {
      if (cursor == count) {
        if (batch < count) shuffle(std::span<Eigen::Index>(order), rng);
        cursor = 0;
      }
      bx.col(static_cast<Eigen::Index>(b)) = xs.col(order[cursor]);
      by(static_cast<Eigen::Index>(b)) = ys(order[cursor]);
      ++cursor;
    }
    const auto grads = m.gradient(bx, by);
    auto& layers = m.layers();
    if (cfg.optimizer == Optimizer::Sgd) {
      for (std::size_t k = 0; k < layers.size(); ++k) {
        layers[k].weights -= lr * grads[k].weights;
        layers[k].bias -= lr * grads[k].bias;
      }
      continue;
    }
    if (m1.empty()) {
      for (const auto& g : grads) {
        m1.push_back({Matrix::Zero(g.weights.rows(), g.weights.cols()), Vector::Zero(g.bias.size())});
      }
      m2 = m1;
    }
    const Scalar c1 = Scalar(1) - std::pow(beta1, Scalar(it + 1));
    const Scalar c2 = Scalar(1) - std::pow(beta2, Scalar(it + 1));
    auto adam = [&](auto& param, auto& mom1, auto& mom2, const auto& grad) {
      mom1 = beta1 * mom1 + (Scalar(1) - beta1) * grad;
      mom2 = beta2 * mom2 + (Scalar(1) - beta2) * grad.cwiseProduct(grad);
      param.array() -= lr * (mom1.array() / c1) / ((mom2.array() / c2).sqrt() + adam_eps);
    };
    for (std::size_t k = 0; k < layers.size(); ++k) {
      adam(layers[k].weights, m1[k].weights, m2[k].weights, grads[k].weights);
      adam(layers[k].bias, m1[k].bias, m2[k].bias, grads[k].bias);
    }
  }
  return m;
}

template <typename Scalar>
Mlp<Scalar> train(Mlp<Scalar> m, const Eigen::Ref<const typename Mlp<Scalar>::Matrix>& xs,
                  const Eigen::Ref<const typename Mlp<Scalar>::Vector>& ys, const TrainConfig& cfg) {
  return train(std::move(m), xs, ys, cfg, [](int, const Mlp<Scalar>&) {});
}

/// Largest relative discrepancy between the analytic gradient of the
/// single-sample loss and central finite differences (step 1e-5). The
/// denominator is max(|analytic|, |numeric|, 1e-5).
template <typename Scalar>
Scalar gradient_check(const Mlp<Scalar>& m, const Eigen::Ref<const typename Mlp<Scalar>::Vector>& x,
                      Scalar y) {
  using Model = Mlp<Scalar>;
  const typename Model::Vector target = Model::Vector::Constant(1, y);
  const auto analytic = m.gradient(x, target);
  const Scalar h = Scalar(1e-5);
  Model probe = m;
  Scalar worst = 0;
  auto visit = [&](Scalar& param, Scalar grad) {
    const Scalar saved = param;
    param = saved + h;
    const Scalar up = probe.loss(x, target);
    param = saved - h;
    const Scalar down = probe.loss(x, target);
    param = saved;
    const Scalar numeric = (up - down) / (Scalar(2) * h);
    const Scalar denom = std::max({std::abs(grad), std::abs(numeric), Scalar(1e-5)});
    worst = std::max(worst, std::abs(grad - numeric) / denom);
  };
  for (std::size_t k = 0; k < probe.layers().size(); ++k) {
    auto& layer = probe.layers()[k];
    for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
      for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) visit(layer.weights(r, c), analytic[k].weights(r, c));
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) visit(layer.bias(r), analytic[k].bias(r));
  }
  return worst;
}

std::string to_string(HeadMode mode);
std::string to_string(Activation activation);
std::string to_string(Optimizer optimizer);
HeadMode head_mode_from_string(const std::string& s);
Activation activation_from_string(const std::string& s);
Optimizer optimizer_from_string(const std::string& s);

/// Versioned model file:
/// {"format": "camoe-mlp", "version": 2, "mode", "activation", "dims": [I, h..., 1],
///  "init_seed", "normalization": null | {"shift": [...], "scale": [...]},
///  "layers": [{"weights": [[row]...], "bias": [...]}...]}.
/// Version 1 files (no normalization) are still read.
/// Doubles are written in shortest round-trip form, so a reload is bit-exact.
nlohmann::json to_json(const Network& m);
Network network_from_json(const nlohmann::json& j);

}  // namespace camoe
