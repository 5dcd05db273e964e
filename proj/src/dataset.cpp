#include "dlac/dataset.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "dlac/io.hpp"

namespace dlac {

const char* to_string(Split s) { return s == Split::kTrain ? "train" : "test"; }

const char* to_string(View v) {
  switch (v) {
    case View::kIndoor: return "indoor";
    case View::kOutdoor: return "outdoor";
    default: return "unknown";
  }
}

const char* to_string(Source s) {
  switch (s) {
    case Source::kSelf: return "self";
    case Source::kWeb: return "web";
    default: return "synthetic";
  }
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "test") return Split::kTest;
  throw std::invalid_argument("unknown split '" + s + "' (want train|test)");
}

View parse_view(const std::string& s) {
  if (s == "indoor") return View::kIndoor;
  if (s == "outdoor") return View::kOutdoor;
  if (s == "unknown") return View::kUnknown;
  throw std::invalid_argument("unknown view '" + s + "' (want indoor|outdoor|unknown)");
}

Source parse_source(const std::string& s) {
  if (s == "self") return Source::kSelf;
  if (s == "web") return Source::kWeb;
  if (s == "synthetic") return Source::kSynthetic;
  throw std::invalid_argument("unknown source '" + s + "' (want self|web|synthetic)");
}

std::vector<int> Dataset::indices_of(Split split) const {
  std::vector<int> idx;
  for (std::size_t i = 0; i < items.size(); ++i)
    if (items[i].split == split) idx.push_back(static_cast<int>(i));
  return idx;
}

std::vector<int> Dataset::class_counts(Split split) const {
  std::vector<int> counts(class_names.size(), 0);
  for (const auto& it : items)
    if (it.split == split) counts[static_cast<std::size_t>(it.label)]++;
  return counts;
}

std::string Dataset::resolve(const DatasetItem& item) const {
  return path_join(root_dir, item.path);
}

Dataset load_manifest(const std::string& path, const ManifestOptions& opts) {
  if (!file_exists(path)) throw std::invalid_argument("manifest not found: " + path);
  auto bytes = read_binary_file(path);
  auto lines = split_lines(std::string(bytes.begin(), bytes.end()));
  if (lines.empty()) throw std::invalid_argument("manifest is empty: " + path);
  if (lines[0] != "path,label,split,view,source")
    throw std::invalid_argument("manifest header must be 'path,label,split,view,source', got '" +
                                lines[0] + "'");

  struct Row {
    std::string p, label;
    Split split;
    View view;
    Source source;
  };
  std::vector<Row> rows;
  std::set<std::string> seen_paths;
  std::set<std::string> labels;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto f = split_csv_line(lines[i]);
    if (f.size() != 5)
      throw std::invalid_argument("manifest line " + std::to_string(i + 1) + ": expected 5 fields, got " +
                                  std::to_string(f.size()));
    if (f[0].empty()) throw std::invalid_argument("manifest line " + std::to_string(i + 1) + ": empty path");
    if (f[1].empty()) throw std::invalid_argument("manifest line " + std::to_string(i + 1) + ": empty label");
    if (!seen_paths.insert(f[0]).second)
      throw std::invalid_argument("manifest: duplicate path '" + f[0] + "'");
    Row r{f[0], f[1], parse_split(f[2]), parse_view(f[3]), parse_source(f[4])};
    labels.insert(r.label);
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw std::invalid_argument("manifest has no data rows: " + path);

  Dataset ds;
  ds.root_dir = path_dir(path);
  ds.class_names.assign(labels.begin(), labels.end());  // std::set is already sorted
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < ds.class_names.size(); ++i)
    index[ds.class_names[i]] = static_cast<int>(i);

  for (auto& r : rows) {
    DatasetItem item;
    item.path = r.p;
    item.label = index[r.label];
    item.split = r.split;
    item.view = r.view;
    item.source = r.source;
    if (opts.verify_files) {
      std::string full = path_join(ds.root_dir, item.path);
      if (!file_exists(full))
        throw std::invalid_argument("manifest references missing file: " + full);
    }
    ds.items.push_back(std::move(item));
  }
  return ds;
}

namespace {

// Midpoint nearest-neighbor index: source index for output position o when
// mapping src samples onto dst slots.
inline int nn_index(int o, int src, int dst) {
  return static_cast<int>((static_cast<long long>(2 * o + 1) * src) / (2 * dst));
}

ImageSample resize_nn(const ImageSample& img, int x0, int y0, int cw, int ch, int out_w, int out_h) {
  ImageSample out;
  out.width = out_w;
  out.height = out_h;
  out.rgb.resize(static_cast<std::size_t>(out_w) * out_h * 3);
  for (int oy = 0; oy < out_h; ++oy) {
    const int sy = y0 + nn_index(oy, ch, out_h);
    for (int ox = 0; ox < out_w; ++ox) {
      const int sx = x0 + nn_index(ox, cw, out_w);
      const std::uint8_t* src = img.pixel(sx, sy);
      std::uint8_t* dst = out.pixel(ox, oy);
      dst[0] = src[0];
      dst[1] = src[1];
      dst[2] = src[2];
    }
  }
  return out;
}

}  // namespace

ImageSample crop_resize(const ImageSample& img, int image_size) {
  if (img.width < 1 || img.height < 1)
    throw std::invalid_argument("preprocess: degenerate image " + std::to_string(img.width) + "x" +
                                std::to_string(img.height));
  if (image_size < 1) throw std::invalid_argument("preprocess: image_size must be positive");
  const int crop = std::min(img.width, img.height);
  const int x0 = (img.width - crop) / 2;
  const int y0 = (img.height - crop) / 2;
  return resize_nn(img, x0, y0, crop, crop, image_size, image_size);
}

Tensor preprocess(const ImageSample& img, int image_size) {
  ImageSample sq = crop_resize(img, image_size);
  const int S = image_size;
  std::vector<float> data(static_cast<std::size_t>(3) * S * S);
  const std::size_t plane = static_cast<std::size_t>(S) * S;
  for (int y = 0; y < S; ++y)
    for (int x = 0; x < S; ++x) {
      const std::uint8_t* p = sq.pixel(x, y);
      const std::size_t i = static_cast<std::size_t>(y) * S + x;
      data[0 * plane + i] = static_cast<float>(p[0]) / 255.0f - 0.5f;
      data[1 * plane + i] = static_cast<float>(p[1]) / 255.0f - 0.5f;
      data[2 * plane + i] = static_cast<float>(p[2]) / 255.0f - 0.5f;
    }
  return Tensor::from_data({3, S, S}, std::move(data));
}

ImageSample hflip(const ImageSample& img) {
  ImageSample out = img;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const std::uint8_t* src = img.pixel(img.width - 1 - x, y);
      std::uint8_t* dst = out.pixel(x, y);
      dst[0] = src[0];
      dst[1] = src[1];
      dst[2] = src[2];
    }
  return out;
}

ImageSample augment(const ImageSample& img, Rng& rng) {
  ImageSample work = rng.uniform() < 0.5 ? hflip(img) : img;
  const double area = rng.uniform(0.9, 1.0);
  const double side = std::sqrt(area);
  int cw = std::max(1, static_cast<int>(std::lround(img.width * side)));
  int ch = std::max(1, static_cast<int>(std::lround(img.height * side)));
  cw = std::min(cw, img.width);
  ch = std::min(ch, img.height);
  const int x0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(img.width - cw + 1)));
  const int y0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(img.height - ch + 1)));
  return resize_nn(work, x0, y0, cw, ch, img.width, img.height);
}

}  // namespace dlac
