#pragma once

#include <cstdint>
#include <vector>

#include "dlac/pca.hpp"

namespace dlac {

struct KmeansOptions {
  int max_iter = 100;
  int restarts = 10;  // best (lowest inertia) run wins
};

struct KmeansResult {
  std::vector<int> assignment;        // per point, in [0, k)
  Mat centroids;                      // k x dim
  double inertia = 0.0;               // sum of squared point-centroid distances
  std::vector<double> inertia_trace;  // per Lloyd iteration of the winning restart
};

// Lloyd's algorithm with k-means++ seeding. Points are rows of an n x dim
// matrix. Empty clusters are repaired by reseeding to the point farthest from
// its centroid. Inertia never increases across iterations (checked).
KmeansResult kmeans(const Mat& points, int k, std::uint64_t seed, const KmeansOptions& opts = {});

// Chance-corrected partition agreement; 1 means identical clusterings.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace dlac
