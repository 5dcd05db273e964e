#include "dlac/image.hpp"

#include <cctype>
#include <stdexcept>
#include <string>

#include "dlac/io.hpp"

namespace dlac {

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    std::uint8_t c = bytes[pos];
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(c)) {
      ++pos;
    } else {
      break;
    }
  }
  std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') ++pos;
  if (start == pos) throw std::invalid_argument("ppm: truncated header");
  return std::string(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                     bytes.begin() + static_cast<std::ptrdiff_t>(pos));
}

int parse_dim(const std::string& tok, const char* what) {
  for (char c : tok)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw std::invalid_argument(std::string("ppm: bad ") + what + " '" + tok + "'");
  long v = std::stol(tok);
  if (v < 1 || v > 1 << 20) throw std::invalid_argument(std::string("ppm: bad ") + what + " " + tok);
  return static_cast<int>(v);
}

}  // namespace

ImageSample decode_ppm(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 2) throw std::invalid_argument("ppm: file too short");
  std::size_t pos = 0;
  std::string magic = next_token(bytes, pos);
  if (magic != "P6" && magic != "P5")
    throw std::invalid_argument("ppm: bad magic '" + magic + "' (want P6 or P5)");
  const bool gray = magic == "P5";
  int w = parse_dim(next_token(bytes, pos), "width");
  int h = parse_dim(next_token(bytes, pos), "height");
  std::string maxval = next_token(bytes, pos);
  if (maxval != "255") throw std::invalid_argument("ppm: unsupported maxval " + maxval + " (want 255)");
  // Exactly one whitespace byte separates the header from the payload.
  if (pos >= bytes.size() || !std::isspace(bytes[pos]))
    throw std::invalid_argument("ppm: missing header terminator");
  ++pos;

  const std::size_t npix = static_cast<std::size_t>(w) * h;
  const std::size_t need = npix * (gray ? 1 : 3);
  if (bytes.size() - pos < need)
    throw std::invalid_argument("ppm: truncated payload, need " + std::to_string(need) +
                                " bytes, have " + std::to_string(bytes.size() - pos));

  ImageSample img;
  img.width = w;
  img.height = h;
  img.rgb.resize(npix * 3);
  if (gray) {
    for (std::size_t i = 0; i < npix; ++i) {
      std::uint8_t v = bytes[pos + i];
      img.rgb[3 * i] = img.rgb[3 * i + 1] = img.rgb[3 * i + 2] = v;
    }
  } else {
    std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
              bytes.begin() + static_cast<std::ptrdiff_t>(pos + need), img.rgb.begin());
  }
  return img;
}

std::vector<std::uint8_t> encode_ppm(const ImageSample& img) {
  if (img.width < 1 || img.height < 1)
    throw std::invalid_argument("ppm: degenerate image " + std::to_string(img.width) + "x" +
                                std::to_string(img.height));
  if (img.rgb.size() != static_cast<std::size_t>(img.width) * img.height * 3)
    throw std::invalid_argument("ppm: pixel buffer does not match dimensions");
  std::string header =
      "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.rgb.begin(), img.rgb.end());
  return out;
}

std::vector<std::uint8_t> encode_pgm(int width, int height, const std::vector<std::uint8_t>& gray) {
  if (width < 1 || height < 1)
    throw std::invalid_argument("pgm: degenerate image " + std::to_string(width) + "x" +
                                std::to_string(height));
  if (gray.size() != static_cast<std::size_t>(width) * height)
    throw std::invalid_argument("pgm: pixel buffer does not match dimensions");
  std::string header = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), gray.begin(), gray.end());
  return out;
}

ImageSample load_image(const std::string& path) {
  try {
    return decode_ppm(read_binary_file(path));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void save_image(const std::string& path, const ImageSample& img) {
  auto bytes = encode_ppm(img);
  write_binary_file(path, bytes.data(), bytes.size());
}

}  // namespace dlac
