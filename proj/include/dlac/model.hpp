#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dlac/rng.hpp"
#include "dlac/tensor.hpp"

namespace dlac {

// Cell-stacked classifier: stem conv -> cells -> global average pool -> fully
// connected head. 'N' cells keep resolution and channel count, 'R' cells halve
// the resolution and double the channels.
struct ModelConfig {
  int image_size = 64;
  int in_channels = 3;
  int stem_channels = 8;
  std::string cells = "NRNRN";
  int num_classes = 2;
  std::uint64_t seed = 0;
  std::vector<std::string> class_names;  // optional; carried into checkpoints for reports

  void validate() const;
  int feature_channels() const;  // channels after the last cell
  int feature_size() const;      // spatial side after the last cell
};

template <typename T>
struct ForwardOut {
  TensorT<T> logits;        // [num_classes]
  TensorT<T> feature_maps;  // last cell output [K x u x v], kept for Grad-CAM
};

struct BatchForwardOut {
  int batch = 0, num_classes = 0;
  int channels = 0, rows = 0, cols = 0;
  std::vector<float> logits;        // [B x d] row-major
  std::vector<float> feature_maps;  // [B x K x u x v]
};

struct Prediction {
  int class_index;
  float probability;
};

template <typename T>
class ModelT {
 public:
  // Deterministic He-style initialization from config.seed; biases zero.
  static ModelT build(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  const std::vector<std::pair<std::string, TensorT<T>>>& params() const { return params_; }
  TensorT<T> param(const std::string& name) const;
  std::vector<TensorT<T>> param_tensors() const;
  std::size_t param_count() const;

  // Builds the per-sample computation graph. image must be [in_channels x S x S].
  ForwardOut<T> forward(const TensorT<T>& image) const;

 private:
  ModelConfig config_;
  std::vector<std::pair<std::string, TensorT<T>>> params_;
};

using Model = ModelT<float>;

// Per-sample forward over a batch; samples never interact.
BatchForwardOut forward_batch(const Model& model, const std::vector<Tensor>& images);

// Softmax ranking, descending probability, ties broken by ascending class
// index. 1 <= k <= num_classes.
std::vector<Prediction> predict_topk(const Model& model, const Tensor& image, int k);

// Full descending ranking of a raw probability vector (same tie rule).
std::vector<int> rank_classes(const std::vector<float>& probs);

// ---- implementation ---------------------------------------------------------

template <typename T>
TensorT<T> ModelT<T>::param(const std::string& name) const {
  for (const auto& [n, t] : params_)
    if (n == name) return t;
  throw std::invalid_argument("no parameter named '" + name + "'");
}

template <typename T>
std::vector<TensorT<T>> ModelT<T>::param_tensors() const {
  std::vector<TensorT<T>> out;
  out.reserve(params_.size());
  for (const auto& [n, t] : params_) out.push_back(t);
  return out;
}

template <typename T>
std::size_t ModelT<T>::param_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : params_) n += t.numel();
  return n;
}

template <typename T>
ModelT<T> ModelT<T>::build(const ModelConfig& config) {
  config.validate();
  ModelT<T> m;
  m.config_ = config;
  Rng rng(mix64(config.seed, 0x696e6974ull));  // init stream

  auto he_conv = [&rng](const std::string& name, int co, int ci, int kh, int kw) {
    std::vector<T> w(static_cast<std::size_t>(co) * ci * kh * kw);
    const double stddev = std::sqrt(2.0 / (static_cast<double>(ci) * kh * kw));
    for (auto& x : w) x = static_cast<T>(rng.normal() * stddev);
    return std::make_pair(name, TensorT<T>::from_data({co, ci, kh, kw}, std::move(w), true));
  };

  m.params_.push_back(he_conv("stem.w", config.stem_channels, config.in_channels, 3, 3));
  m.params_.emplace_back("stem.b", TensorT<T>::zeros({config.stem_channels}, true));

  int ch = config.stem_channels;
  for (std::size_t i = 0; i < config.cells.size(); ++i) {
    const std::string base = "cell" + std::to_string(i);
    if (config.cells[i] == 'N') {
      m.params_.push_back(he_conv(base + ".w", ch, ch, 3, 3));
      m.params_.emplace_back(base + ".b", TensorT<T>::zeros({ch}, true));
    } else {
      m.params_.push_back(he_conv(base + ".w", 2 * ch, ch, 3, 3));
      m.params_.emplace_back(base + ".b", TensorT<T>::zeros({2 * ch}, true));
      ch *= 2;
    }
  }

  {
    std::vector<T> w(static_cast<std::size_t>(config.num_classes) * ch);
    const double stddev = std::sqrt(2.0 / static_cast<double>(ch));
    for (auto& x : w) x = static_cast<T>(rng.normal() * stddev);
    m.params_.emplace_back("fc.w",
                           TensorT<T>::from_data({config.num_classes, ch}, std::move(w), true));
  }
  m.params_.emplace_back("fc.b", TensorT<T>::zeros({config.num_classes, 1}, true));
  return m;
}

template <typename T>
ForwardOut<T> ModelT<T>::forward(const TensorT<T>& image) const {
  const auto& s = image.shape();
  if (s.size() != 3 || s[0] != config_.in_channels || s[1] != config_.image_size ||
      s[2] != config_.image_size)
    throw std::invalid_argument("forward: expected input [" + std::to_string(config_.in_channels) +
                                "x" + std::to_string(config_.image_size) + "x" +
                                std::to_string(config_.image_size) + "], got " + shape_str(s));

  std::size_t p = 0;
  auto next = [&]() { return params_[p++].second; };

  TensorT<T> w = next();
  TensorT<T> b = next();
  TensorT<T> x = relu(add_channel_bias(conv2d(image, w, 1, 1), b));
  for (char c : config_.cells) {
    w = next();
    b = next();
    if (c == 'N') {
      x = add(x, relu(add_channel_bias(conv2d(x, w, 1, 1), b)));
    } else {
      x = relu(add_channel_bias(conv2d(x, w, 2, 1), b));
    }
  }
  TensorT<T> feature_maps = x;

  const int K = feature_maps.shape()[0];
  TensorT<T> feat = reshape(global_avg_pool(x), {K, 1});
  TensorT<T> fc_w = next();
  TensorT<T> fc_b = next();
  TensorT<T> logits = reshape(add(matmul(fc_w, feat), fc_b), {config_.num_classes});
  return {logits, feature_maps};
}

}  // namespace dlac
