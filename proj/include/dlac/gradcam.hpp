#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dlac/image.hpp"
#include "dlac/model.hpp"

namespace dlac {

// Class-conditional localization map at feature-map resolution. Values are
// non-negative; `peak` records the maximum before any normalization.
struct Heatmap {
  int rows = 0;
  int cols = 0;
  std::vector<float> values;
  int class_index = -1;
  float peak = 0.0f;
};

struct ChannelWeights {
  std::vector<float> alpha;  // one weight per feature map channel
};

// Spatial mean of each channel's gradient map: alpha_k = (1/Z) sum_ij g[k,i,j]
// with Z = rows * cols. Templated so the finite-difference oracle can run the
// same code path in double.
template <typename T>
std::vector<T> pooled_channel_weights(const std::vector<T>& grad_maps, int channels, int rows,
                                      int cols) {
  if (channels < 1 || rows < 1 || cols < 1)
    throw std::invalid_argument("pooled_channel_weights: empty gradient maps");
  if (grad_maps.size() != static_cast<std::size_t>(channels) * rows * cols)
    throw std::invalid_argument("pooled_channel_weights: buffer does not match dimensions");
  const std::size_t plane = static_cast<std::size_t>(rows) * cols;
  const T inv = T(1) / static_cast<T>(plane);
  std::vector<T> alpha(static_cast<std::size_t>(channels));
  for (int k = 0; k < channels; ++k) {
    T s = 0;
    for (std::size_t i = 0; i < plane; ++i) s += grad_maps[k * plane + i];
    alpha[static_cast<std::size_t>(k)] = s * inv;
  }
  return alpha;
}

ChannelWeights compute_alpha(const std::vector<float>& grad_maps, int channels, int rows, int cols);

// Weighted channel sum before the ReLU; exposed so linearity can be checked.
std::vector<float> gradcam_preact(const std::vector<float>& feature_maps,
                                  const ChannelWeights& weights, int channels, int rows, int cols);

// ReLU(sum_k alpha_k * A^k).
Heatmap gradcam_map(const std::vector<float>& feature_maps, const ChannelWeights& weights,
                    int channels, int rows, int cols);

// Forward capturing the final cell maps, backward from the single logit of
// `class_index`, pool, combine. Builds a private graph per call.
Heatmap explain(const Model& model, const Tensor& image, int class_index);

// Bilinear, corner-aligned; target must not be smaller than the source.
Heatmap upsample_bilinear(const Heatmap& map, int target_size);

// Divides by the peak; an all-zero map stays zero.
Heatmap normalize_by_max(const Heatmap& map);

// out = (1 - m/2) * pixel + (m/2) * red, rounded half up. Map values must
// already be in [0, 1] and match the image dimensions.
ImageSample render_overlay(const ImageSample& image, const Heatmap& normalized_map);

// PGM bytes with values scaled to 0..255 by the map maximum.
std::vector<std::uint8_t> heatmap_to_pgm(const Heatmap& map);

// Fraction of total heatmap mass inside a quadrant ("TL","TR","BL","BR").
// Returns 0 for an all-zero map.
double quadrant_mass(const Heatmap& map, const std::string& quadrant);

}  // namespace dlac
