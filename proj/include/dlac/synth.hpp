#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dlac {

// Synthetic style corpus: each class is a distinct glyph drawn over pixel
// noise, so a small classifier can learn it from scratch. In fixed-quadrant
// mode the glyph sits inside one quadrant per image and a sidecar CSV records
// which, providing localization ground truth for heatmap checks.
struct SynthSpec {
  int num_classes = 4;
  int samples_per_class = 10;
  int image_size = 64;
  bool fixed_quadrant = false;
  // Classes come as size-variant pairs of the same glyph shape (three shape
  // families), giving a corpus with designed visual families.
  bool family_pairs = false;
  std::uint64_t seed = 0;
};

struct SynthResult {
  std::string manifest_path;
  std::string ground_truth_path;  // empty unless fixed_quadrant
  std::vector<std::string> class_names;
};

int max_synthetic_classes();
int max_family_classes();

SynthResult generate_synthetic(const SynthSpec& spec, const std::string& out_dir);

// Sidecar `path,glyph_quadrant` with quadrant in {TL,TR,BL,BR}.
std::map<std::string, std::string> load_ground_truth(const std::string& path);

}  // namespace dlac
