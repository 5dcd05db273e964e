#include "dlac/gradcam.hpp"

#include <algorithm>
#include <cmath>

namespace dlac {

ChannelWeights compute_alpha(const std::vector<float>& grad_maps, int channels, int rows, int cols) {
  return {pooled_channel_weights(grad_maps, channels, rows, cols)};
}

std::vector<float> gradcam_preact(const std::vector<float>& feature_maps,
                                  const ChannelWeights& weights, int channels, int rows, int cols) {
  if (static_cast<int>(weights.alpha.size()) != channels)
    throw std::invalid_argument("gradcam: " + std::to_string(weights.alpha.size()) +
                                " channel weights for " + std::to_string(channels) +
                                " feature maps");
  if (feature_maps.size() != static_cast<std::size_t>(channels) * rows * cols)
    throw std::invalid_argument("gradcam: feature map buffer does not match dimensions");
  const std::size_t plane = static_cast<std::size_t>(rows) * cols;
  std::vector<float> pre(plane, 0.0f);
  for (int k = 0; k < channels; ++k) {
    const float a = weights.alpha[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < plane; ++i) pre[i] += a * feature_maps[k * plane + i];
  }
  return pre;
}

Heatmap gradcam_map(const std::vector<float>& feature_maps, const ChannelWeights& weights,
                    int channels, int rows, int cols) {
  Heatmap hm;
  hm.rows = rows;
  hm.cols = cols;
  hm.values = gradcam_preact(feature_maps, weights, channels, rows, cols);
  for (auto& v : hm.values) v = v > 0.0f ? v : 0.0f;
  hm.peak = hm.values.empty() ? 0.0f : *std::max_element(hm.values.begin(), hm.values.end());
  return hm;
}

Heatmap explain(const Model& model, const Tensor& image, int class_index) {
  const int d = model.config().num_classes;
  if (class_index < 0 || class_index >= d)
    throw std::invalid_argument("explain: class " + std::to_string(class_index) +
                                " out of range [0, " + std::to_string(d) + ")");
  auto fwd = model.forward(image);
  auto target = select(fwd.logits, class_index);
  auto gm = target.backward_collect();

  const int K = fwd.feature_maps.shape()[0];
  const int u = fwd.feature_maps.shape()[1];
  const int v = fwd.feature_maps.shape()[2];

  auto it = gm.find(fwd.feature_maps.raw());
  std::vector<float> grads =
      it != gm.end() ? it->second : std::vector<float>(fwd.feature_maps.numel(), 0.0f);

  Heatmap hm = gradcam_map(fwd.feature_maps.value(), compute_alpha(grads, K, u, v), K, u, v);
  hm.class_index = class_index;
  return hm;
}

Heatmap upsample_bilinear(const Heatmap& map, int target_size) {
  if (map.rows < 1 || map.cols < 1) throw std::invalid_argument("upsample: empty heatmap");
  if (target_size < map.rows || target_size < map.cols)
    throw std::invalid_argument("upsample: target " + std::to_string(target_size) +
                                " smaller than source " + std::to_string(map.rows) + "x" +
                                std::to_string(map.cols) + " (downsampling unsupported)");
  Heatmap out;
  out.rows = out.cols = target_size;
  out.class_index = map.class_index;
  out.values.resize(static_cast<std::size_t>(target_size) * target_size);

  const int S = target_size;
  for (int oy = 0; oy < S; ++oy) {
    // corner-aligned source coordinate
    const double sy = map.rows == 1 ? 0.0
                                    : static_cast<double>(oy) * (map.rows - 1) / (S - 1);
    const int y0 = std::min(static_cast<int>(sy), map.rows - 1);
    const int y1 = std::min(y0 + 1, map.rows - 1);
    const double fy = sy - y0;
    for (int ox = 0; ox < S; ++ox) {
      const double sx = map.cols == 1 ? 0.0
                                      : static_cast<double>(ox) * (map.cols - 1) / (S - 1);
      const int x0 = std::min(static_cast<int>(sx), map.cols - 1);
      const int x1 = std::min(x0 + 1, map.cols - 1);
      const double fx = sx - x0;
      const double v00 = map.values[static_cast<std::size_t>(y0) * map.cols + x0];
      const double v01 = map.values[static_cast<std::size_t>(y0) * map.cols + x1];
      const double v10 = map.values[static_cast<std::size_t>(y1) * map.cols + x0];
      const double v11 = map.values[static_cast<std::size_t>(y1) * map.cols + x1];
      const double v = (1 - fy) * ((1 - fx) * v00 + fx * v01) + fy * ((1 - fx) * v10 + fx * v11);
      out.values[static_cast<std::size_t>(oy) * S + ox] = static_cast<float>(v);
    }
  }
  out.peak = *std::max_element(out.values.begin(), out.values.end());
  return out;
}

Heatmap normalize_by_max(const Heatmap& map) {
  Heatmap out = map;
  if (out.peak > 0.0f)
    for (auto& v : out.values) v /= map.peak;
  return out;
}

ImageSample render_overlay(const ImageSample& image, const Heatmap& normalized_map) {
  if (image.width != normalized_map.cols || image.height != normalized_map.rows)
    throw std::invalid_argument("overlay: image " + std::to_string(image.width) + "x" +
                                std::to_string(image.height) + " does not match map " +
                                std::to_string(normalized_map.cols) + "x" +
                                std::to_string(normalized_map.rows));
  ImageSample out = image;
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      const double m = normalized_map.values[static_cast<std::size_t>(y) * normalized_map.cols + x];
      const std::uint8_t* src = image.pixel(x, y);
      std::uint8_t* dst = out.pixel(x, y);
      const double keep = 1.0 - 0.5 * m;
      dst[0] = static_cast<std::uint8_t>(std::floor(keep * src[0] + 0.5 * m * 255.0 + 0.5));
      dst[1] = static_cast<std::uint8_t>(std::floor(keep * src[1] + 0.5));
      dst[2] = static_cast<std::uint8_t>(std::floor(keep * src[2] + 0.5));
    }
  return out;
}

std::vector<std::uint8_t> heatmap_to_pgm(const Heatmap& map) {
  std::vector<std::uint8_t> gray(map.values.size(), 0);
  const float peak = map.peak;
  if (peak > 0.0f)
    for (std::size_t i = 0; i < map.values.size(); ++i)
      gray[i] = static_cast<std::uint8_t>(std::floor(map.values[i] / peak * 255.0f + 0.5f));
  return encode_pgm(map.cols, map.rows, gray);
}

double quadrant_mass(const Heatmap& map, const std::string& quadrant) {
  int row_lo = 0, row_hi = map.rows, col_lo = 0, col_hi = map.cols;
  const int rm = map.rows / 2, cm = map.cols / 2;
  if (quadrant == "TL") {
    row_hi = rm;
    col_hi = cm;
  } else if (quadrant == "TR") {
    row_hi = rm;
    col_lo = cm;
  } else if (quadrant == "BL") {
    row_lo = rm;
    col_hi = cm;
  } else if (quadrant == "BR") {
    row_lo = rm;
    col_lo = cm;
  } else {
    throw std::invalid_argument("quadrant must be TL|TR|BL|BR, got '" + quadrant + "'");
  }
  double total = 0.0, inside = 0.0;
  for (int y = 0; y < map.rows; ++y)
    for (int x = 0; x < map.cols; ++x) {
      const double v = map.values[static_cast<std::size_t>(y) * map.cols + x];
      total += v;
      if (y >= row_lo && y < row_hi && x >= col_lo && x < col_hi) inside += v;
    }
  return total > 0.0 ? inside / total : 0.0;
}

}  // namespace dlac
