#include "dlac/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <stdexcept>

#include "dlac/image.hpp"
#include "dlac/io.hpp"
#include "dlac/rng.hpp"

namespace dlac {

namespace {

enum class Glyph { kRing, kPlus, kHStripes, kChecker, kSaltire, kDots, kVStripes, kSquare, kDiag, kDisc };

struct GlyphDef {
  Glyph glyph;
  const char* name;
};

// Order defines the class -> glyph assignment for the distinct-shape corpus.
constexpr GlyphDef kCatalog[] = {
    {Glyph::kRing, "ring"},     {Glyph::kPlus, "plus"},       {Glyph::kHStripes, "hstripes"},
    {Glyph::kChecker, "checker"}, {Glyph::kSaltire, "saltire"}, {Glyph::kDots, "dots"},
    {Glyph::kVStripes, "vstripes"}, {Glyph::kSquare, "square"}, {Glyph::kDiag, "diag"},
    {Glyph::kDisc, "disc"},
};

// Shape families for the paired corpus; each contributes a large and a small
// variant, in that order.
constexpr GlyphDef kFamilies[] = {
    {Glyph::kRing, "ring"},
    {Glyph::kPlus, "plus"},
    {Glyph::kHStripes, "hstripes"},
};

// Is (dx, dy) inked for a glyph with half-extent r? Coordinates are relative
// to the glyph center; callers only probe |dx|,|dy| <= r.
bool inked(Glyph g, double dx, double dy, double r) {
  const double t = std::max(1.5, 0.22 * r);
  const double rr = std::hypot(dx, dy);
  switch (g) {
    case Glyph::kRing:
      return std::abs(rr - 0.72 * r) <= t;
    case Glyph::kPlus:
      return std::abs(dx) <= t || std::abs(dy) <= t;
    case Glyph::kHStripes: {
      const int p = std::max(4, static_cast<int>(std::lround(0.55 * r)));
      return static_cast<int>(std::floor(dy + r)) % p < (p + 1) / 2;
    }
    case Glyph::kChecker: {
      const int c = std::max(3, static_cast<int>(std::lround(0.6 * r)));
      const int ix = static_cast<int>(std::floor(dx + r)) / c;
      const int iy = static_cast<int>(std::floor(dy + r)) / c;
      return (ix + iy) % 2 == 0;
    }
    case Glyph::kSaltire:
      return std::abs(std::abs(dx) - std::abs(dy)) <= t;
    case Glyph::kDots: {
      const int c = std::max(5, static_cast<int>(std::lround(0.7 * r)));
      const double mx = std::fmod(dx + r, c) - c / 2.0;
      const double my = std::fmod(dy + r, c) - c / 2.0;
      return mx * mx + my * my <= (0.32 * c) * (0.32 * c);
    }
    case Glyph::kVStripes: {
      const int p = std::max(4, static_cast<int>(std::lround(0.55 * r)));
      return static_cast<int>(std::floor(dx + r)) % p < (p + 1) / 2;
    }
    case Glyph::kSquare:
      return std::abs(std::max(std::abs(dx), std::abs(dy)) - 0.72 * r) <= t;
    case Glyph::kDiag: {
      const int p = std::max(4, static_cast<int>(std::lround(0.55 * r)));
      return static_cast<int>(std::floor(dx + dy + 2 * r)) % p < (p + 1) / 2;
    }
    case Glyph::kDisc:
      return rr <= 0.75 * r;
  }
  return false;
}

struct ClassSpec {
  Glyph glyph;
  std::string name;
  double size_scale;  // glyph half-extent as a fraction of the quadrant size
};

std::vector<ClassSpec> class_specs(const SynthSpec& spec) {
  std::vector<ClassSpec> out;
  if (spec.family_pairs) {
    const int max_classes = max_family_classes();
    if (spec.num_classes > max_classes)
      throw std::invalid_argument("synthetic corpus: " + std::to_string(spec.num_classes) +
                                  " classes requested but only " + std::to_string(max_classes) +
                                  " family-pair signatures exist");
    for (int c = 0; c < spec.num_classes; ++c) {
      const GlyphDef& fam = kFamilies[c / 2];
      const bool large = c % 2 == 0;
      char id[16];
      std::snprintf(id, sizeof(id), "c%02d_", c);
      out.push_back({fam.glyph, id + std::string(fam.name) + (large ? "_lg" : "_sm"),
                     large ? 0.82 : 0.5});
    }
  } else {
    const int max_classes = max_synthetic_classes();
    if (spec.num_classes > max_classes)
      throw std::invalid_argument("synthetic corpus: " + std::to_string(spec.num_classes) +
                                  " classes requested but only " + std::to_string(max_classes) +
                                  " glyph signatures exist");
    for (int c = 0; c < spec.num_classes; ++c) {
      char id[16];
      std::snprintf(id, sizeof(id), "c%02d_", c);
      out.push_back({kCatalog[c].glyph, id + std::string(kCatalog[c].name), 0.78});
    }
  }
  return out;
}

std::uint8_t clamp_byte(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }

ImageSample render(const ClassSpec& cls, const SynthSpec& spec, Rng& rng, int* quadrant_out) {
  const int S = spec.image_size;
  ImageSample img;
  img.width = img.height = S;
  img.rgb.resize(static_cast<std::size_t>(S) * S * 3);

  // noise background
  for (int y = 0; y < S; ++y)
    for (int x = 0; x < S; ++x) {
      const int base = 25 + static_cast<int>(rng.below(86));
      std::uint8_t* p = img.pixel(x, y);
      p[0] = clamp_byte(base + static_cast<int>(rng.below(21)) - 10);
      p[1] = clamp_byte(base + static_cast<int>(rng.below(21)) - 10);
      p[2] = clamp_byte(base + static_cast<int>(rng.below(21)) - 10);
    }

  const int q = S / 2;
  const double r = cls.size_scale * (q / 2.0 - 1.0);
  int cx, cy, quadrant = -1;
  if (spec.fixed_quadrant) {
    quadrant = static_cast<int>(rng.below(4));  // 0 TL, 1 TR, 2 BL, 3 BR
    const int qx = (quadrant % 2) * q;
    const int qy = (quadrant / 2) * q;
    // jitter keeps the whole glyph inside its quadrant
    const int slack = std::max(0, static_cast<int>(q / 2.0 - r - 1.0));
    const int jx = slack > 0 ? static_cast<int>(rng.below(2 * slack + 1)) - slack : 0;
    const int jy = slack > 0 ? static_cast<int>(rng.below(2 * slack + 1)) - slack : 0;
    cx = qx + q / 2 + jx;
    cy = qy + q / 2 + jy;
  } else {
    const int lo = static_cast<int>(std::ceil(r)) + 1;
    const int hi = S - lo;
    cx = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::max(1, hi - lo + 1))));
    cy = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::max(1, hi - lo + 1))));
  }
  if (quadrant_out) *quadrant_out = quadrant;

  const int bound = static_cast<int>(std::ceil(r));
  for (int dy = -bound; dy <= bound; ++dy) {
    const int y = cy + dy;
    if (y < 0 || y >= S) continue;
    for (int dx = -bound; dx <= bound; ++dx) {
      const int x = cx + dx;
      if (x < 0 || x >= S) continue;
      if (!inked(cls.glyph, dx, dy, r)) continue;
      const int base = 175 + static_cast<int>(rng.below(61));
      std::uint8_t* p = img.pixel(x, y);
      p[0] = clamp_byte(base + static_cast<int>(rng.below(31)) - 15);
      p[1] = clamp_byte(base + static_cast<int>(rng.below(31)) - 15);
      p[2] = clamp_byte(base + static_cast<int>(rng.below(31)) - 15);
    }
  }
  return img;
}

const char* kQuadrantNames[4] = {"TL", "TR", "BL", "BR"};

}  // namespace

int max_synthetic_classes() { return static_cast<int>(std::size(kCatalog)); }
int max_family_classes() { return 2 * static_cast<int>(std::size(kFamilies)); }

SynthResult generate_synthetic(const SynthSpec& spec, const std::string& out_dir) {
  if (spec.num_classes < 2) throw std::invalid_argument("synthetic corpus: need at least 2 classes");
  if (spec.samples_per_class < 1)
    throw std::invalid_argument("synthetic corpus: need at least 1 sample per class");
  if (spec.image_size < 16)
    throw std::invalid_argument("synthetic corpus: image_size must be >= 16");
  auto classes = class_specs(spec);

  make_dirs(out_dir);
  std::string manifest = "path,label,split,view,source\n";
  std::string ground_truth = "path,glyph_quadrant\n";

  const int train_n = std::max(1, spec.samples_per_class * 4 / 5);
  const char* views[2] = {"indoor", "outdoor"};
  const char* sources[2] = {"self", "web"};

  for (int c = 0; c < spec.num_classes; ++c) {
    const std::string cls_dir = path_join(out_dir, path_join("images", classes[c].name));
    make_dirs(cls_dir);
    for (int i = 0; i < spec.samples_per_class; ++i) {
      Rng rng(mix64(spec.seed, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(i)));
      int quadrant = -1;
      ImageSample img = render(classes[static_cast<std::size_t>(c)], spec, rng, &quadrant);

      char file[32];
      std::snprintf(file, sizeof(file), "%04d.ppm", i);
      const std::string rel = "images/" + classes[static_cast<std::size_t>(c)].name + "/" + file;
      save_image(path_join(out_dir, rel), img);

      const char* split = i < train_n ? "train" : "test";
      manifest += rel + "," + classes[static_cast<std::size_t>(c)].name + "," + split + "," +
                  views[i % 2] + "," + sources[(i / 2) % 2] + "\n";
      if (spec.fixed_quadrant)
        ground_truth += rel + "," + kQuadrantNames[quadrant] + "\n";
    }
  }

  SynthResult res;
  res.manifest_path = path_join(out_dir, "manifest.csv");
  write_text_file(res.manifest_path, manifest);
  if (spec.fixed_quadrant) {
    res.ground_truth_path = path_join(out_dir, "ground_truth.csv");
    write_text_file(res.ground_truth_path, ground_truth);
  }
  for (auto& c : classes) res.class_names.push_back(c.name);
  return res;
}

std::map<std::string, std::string> load_ground_truth(const std::string& path) {
  auto bytes = read_binary_file(path);
  auto lines = split_lines(std::string(bytes.begin(), bytes.end()));
  if (lines.empty() || lines[0] != "path,glyph_quadrant")
    throw std::invalid_argument("ground truth header must be 'path,glyph_quadrant': " + path);
  std::map<std::string, std::string> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto f = split_csv_line(lines[i]);
    if (f.size() != 2)
      throw std::invalid_argument("ground truth line " + std::to_string(i + 1) + " malformed");
    out[f[0]] = f[1];
  }
  return out;
}

}  // namespace dlac
