#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dlac {

// Decoded 8-bit RGB image. bytes are row-major, 3 bytes per pixel.
struct ImageSample {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  std::uint8_t* pixel(int x, int y) { return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x); }
  const std::uint8_t* pixel(int x, int y) const {
    return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
};

// Binary PPM (P6) with maxval 255. P5 PGM is accepted too (gray replicated to
// all three channels), since heatmaps are written as PGM.
ImageSample decode_ppm(const std::vector<std::uint8_t>& bytes);

// Canonical header form: "P6\n<w> <h>\n255\n" + payload.
std::vector<std::uint8_t> encode_ppm(const ImageSample& img);

// Grayscale P5, canonical header, maxval 255.
std::vector<std::uint8_t> encode_pgm(int width, int height, const std::vector<std::uint8_t>& gray);

ImageSample load_image(const std::string& path);
void save_image(const std::string& path, const ImageSample& img);

}  // namespace dlac
