#pragma once

#include <string>
#include <vector>

#include "dlac/image.hpp"
#include "dlac/rng.hpp"
#include "dlac/tensor.hpp"

namespace dlac {

enum class Split { kTrain, kTest };
enum class View { kIndoor, kOutdoor, kUnknown };
enum class Source { kSelf, kWeb, kSynthetic };

const char* to_string(Split s);
const char* to_string(View v);
const char* to_string(Source s);
Split parse_split(const std::string& s);
View parse_view(const std::string& s);
Source parse_source(const std::string& s);

struct DatasetItem {
  std::string path;  // as written in the manifest
  int label = 0;     // index into class_names
  Split split = Split::kTrain;
  View view = View::kUnknown;
  Source source = Source::kWeb;
};

struct Dataset {
  std::string root_dir;  // directory relative paths resolve against
  std::vector<std::string> class_names;  // lexicographic; defines label indices
  std::vector<DatasetItem> items;

  int num_classes() const { return static_cast<int>(class_names.size()); }
  std::vector<int> indices_of(Split split) const;
  // items per class within one split
  std::vector<int> class_counts(Split split) const;
  std::string resolve(const DatasetItem& item) const;
};

struct ManifestOptions {
  // Structural loads (schema-shape checks on manifests whose images are not
  // actually present) can skip the existence/decodability check.
  bool verify_files = true;
};

// CSV with header `path,label,split,view,source`. Class indices follow the
// lexicographic order of the label names, independent of row order.
Dataset load_manifest(const std::string& path, const ManifestOptions& opts = {});

// Center square crop, nearest-neighbor resize to size x size, values scaled
// to [0,1] then shifted by -0.5. Output is a [3 x size x size] leaf tensor.
Tensor preprocess(const ImageSample& img, int image_size);

// The crop+resize part of preprocess, kept in bytes (what overlays render on).
ImageSample crop_resize(const ImageSample& img, int image_size);

// Horizontal flip with p = 0.5, then a crop of 90..100% area resized back to
// the original dimensions. Pure function of (img, rng state).
ImageSample augment(const ImageSample& img, Rng& rng);

ImageSample hflip(const ImageSample& img);

}  // namespace dlac
