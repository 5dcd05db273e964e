#include "dlac/model.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace dlac {

void ModelConfig::validate() const {
  if (image_size < 1) throw std::invalid_argument("model: image_size must be positive");
  if (in_channels < 1) throw std::invalid_argument("model: in_channels must be positive");
  if (stem_channels < 1) throw std::invalid_argument("model: stem_channels must be positive");
  if (num_classes < 2) throw std::invalid_argument("model: num_classes must be >= 2");
  for (char c : cells)
    if (c != 'N' && c != 'R')
      throw std::invalid_argument(std::string("model: cells may only contain N and R, got '") + c +
                                  "'");
  if (!class_names.empty() && static_cast<int>(class_names.size()) != num_classes)
    throw std::invalid_argument("model: class_names size does not match num_classes");
  const int side = feature_size();
  if (side < 4)
    throw std::invalid_argument("model: cell stack collapses " + std::to_string(image_size) +
                                "px input to " + std::to_string(side) + "x" + std::to_string(side) +
                                " feature maps; at least 4x4 is required");
}

int ModelConfig::feature_channels() const {
  int ch = stem_channels;
  for (char c : cells)
    if (c == 'R') ch *= 2;
  return ch;
}

int ModelConfig::feature_size() const {
  int side = image_size;
  for (char c : cells) {
    // 3x3 / stride 2 / pad 1 halves (rounding up)
    if (c == 'R') side = (side + 1) / 2;
  }
  return side;
}

BatchForwardOut forward_batch(const Model& model, const std::vector<Tensor>& images) {
  BatchForwardOut out;
  out.batch = static_cast<int>(images.size());
  out.num_classes = model.config().num_classes;
  out.channels = model.config().feature_channels();
  out.rows = out.cols = model.config().feature_size();
  out.logits.reserve(static_cast<std::size_t>(out.batch) * out.num_classes);
  out.feature_maps.reserve(static_cast<std::size_t>(out.batch) * out.channels * out.rows * out.cols);
  for (const auto& img : images) {
    auto fwd = model.forward(img);
    const auto& l = fwd.logits.value();
    out.logits.insert(out.logits.end(), l.begin(), l.end());
    const auto& f = fwd.feature_maps.value();
    out.feature_maps.insert(out.feature_maps.end(), f.begin(), f.end());
  }
  return out;
}

std::vector<int> rank_classes(const std::vector<float>& probs) {
  std::vector<int> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (probs[static_cast<std::size_t>(a)] != probs[static_cast<std::size_t>(b)])
      return probs[static_cast<std::size_t>(a)] > probs[static_cast<std::size_t>(b)];
    return a < b;
  });
  return order;
}

std::vector<Prediction> predict_topk(const Model& model, const Tensor& image, int k) {
  const int d = model.config().num_classes;
  if (k < 1 || k > d)
    throw std::invalid_argument("predict_topk: k=" + std::to_string(k) + " out of range [1, " +
                                std::to_string(d) + "]");
  auto fwd = model.forward(image);
  auto probs = softmax(fwd.logits.value());
  auto order = rank_classes(probs);
  std::vector<Prediction> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    out.push_back({order[static_cast<std::size_t>(i)],
                   probs[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]});
  return out;
}

}  // namespace dlac
