#include "dlac/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>

#include "dlac/rng.hpp"

namespace dlac {

namespace {

double dist2(const Mat& points, int i, const Mat& centroids, int c) {
  double s = 0.0;
  for (int d = 0; d < points.cols; ++d) {
    const double diff = points.at(i, d) - centroids.at(c, d);
    s += diff * diff;
  }
  return s;
}

Mat kmeanspp_seed(const Mat& points, int k, Rng& rng) {
  const int n = points.rows;
  Mat centroids(k, points.cols);
  std::vector<int> chosen;
  chosen.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(n))));
  for (int d = 0; d < points.cols; ++d) centroids.at(0, d) = points.at(chosen[0], d);

  std::vector<double> best_d2(static_cast<std::size_t>(n));
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < c; ++j) best = std::min(best, dist2(points, i, centroids, j));
      best_d2[static_cast<std::size_t>(i)] = best;
      total += best;
    }
    int pick;
    if (total <= 0.0) {
      pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));  // all points coincide
    } else {
      double threshold = rng.uniform() * total;
      pick = n - 1;
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += best_d2[static_cast<std::size_t>(i)];
        if (acc >= threshold) {
          pick = i;
          break;
        }
      }
    }
    for (int d = 0; d < points.cols; ++d) centroids.at(c, d) = points.at(pick, d);
  }
  return centroids;
}

struct LloydRun {
  std::vector<int> assignment;
  Mat centroids;
  double inertia = std::numeric_limits<double>::infinity();
  std::vector<double> trace;
};

LloydRun lloyd(const Mat& points, int k, Rng& rng, int max_iter) {
  const int n = points.rows;
  Mat centroids = kmeanspp_seed(points, k, rng);
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  std::vector<double> trace;

  double prev_inertia = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < max_iter; ++iter) {
    // assign to nearest centroid (ties to the lower index)
    std::vector<int> next(static_cast<std::size_t>(n));
    double inertia = 0.0;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = dist2(points, i, centroids, 0);
      for (int c = 1; c < k; ++c) {
        const double d = dist2(points, i, centroids, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      next[static_cast<std::size_t>(i)] = best;
      inertia += best_d;
    }
    if (inertia > prev_inertia * (1.0 + 1e-12))
      throw std::logic_error("kmeans: inertia increased across a Lloyd iteration");
    trace.push_back(inertia);

    const bool stable = next == assignment;
    assignment = std::move(next);
    if (stable) break;
    prev_inertia = inertia;

    // recompute means
    Mat sums(k, points.cols);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < n; ++i) {
      const int c = assignment[static_cast<std::size_t>(i)];
      counts[static_cast<std::size_t>(c)]++;
      for (int d = 0; d < points.cols; ++d) sums.at(c, d) += points.at(i, d);
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        for (int d = 0; d < points.cols; ++d)
          centroids.at(c, d) = sums.at(c, d) / counts[static_cast<std::size_t>(c)];
      } else {
        // reseed an empty cluster to the point farthest from its centroid;
        // the empty cluster served no points, so inertia cannot increase
        int far = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
          const double d = dist2(points, i, centroids, assignment[static_cast<std::size_t>(i)]);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        for (int d = 0; d < points.cols; ++d) centroids.at(c, d) = points.at(far, d);
      }
    }
  }

  // Final pass keeps the returned pair consistent: every point sits with its
  // nearest centroid even when the loop stopped on max_iter.
  double inertia = 0.0;
  for (int i = 0; i < n; ++i) {
    int best = 0;
    double best_d = dist2(points, i, centroids, 0);
    for (int c = 1; c < k; ++c) {
      const double d = dist2(points, i, centroids, c);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    assignment[static_cast<std::size_t>(i)] = best;
    inertia += best_d;
  }
  return {std::move(assignment), std::move(centroids), inertia, std::move(trace)};
}

}  // namespace

KmeansResult kmeans(const Mat& points, int k, std::uint64_t seed, const KmeansOptions& opts) {
  const int n = points.rows;
  if (n < 1) throw std::invalid_argument("kmeans: no points");
  if (k < 1 || k > n)
    throw std::invalid_argument("kmeans: k=" + std::to_string(k) + " out of range [1, " +
                                std::to_string(n) + "]");
  if (opts.max_iter < 1) throw std::invalid_argument("kmeans: max_iter must be >= 1");
  if (opts.restarts < 1) throw std::invalid_argument("kmeans: restarts must be >= 1");

  LloydRun best;
  bool have = false;
  for (int r = 0; r < opts.restarts; ++r) {
    Rng rng(mix64(seed, 0x6b6d65616e73ull, static_cast<std::uint64_t>(r)));
    LloydRun run = lloyd(points, k, rng, opts.max_iter);
    if (!have || run.inertia < best.inertia) {
      best = std::move(run);
      have = true;
    }
  }

  KmeansResult res;
  res.assignment = std::move(best.assignment);
  res.centroids = std::move(best.centroids);
  res.inertia = best.inertia;
  res.inertia_trace = std::move(best.trace);
  return res;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("ari: label vectors differ in length");
  const std::size_t n = a.size();
  if (n < 2) return 1.0;

  std::map<std::pair<int, int>, long long> cont;
  std::map<int, long long> ra, rb;
  for (std::size_t i = 0; i < n; ++i) {
    cont[{a[i], b[i]}]++;
    ra[a[i]]++;
    rb[b[i]]++;
  }
  auto choose2 = [](long long m) { return m * (m - 1) / 2.0; };
  double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, c] : cont) sum_ij += choose2(c);
  for (const auto& [key, c] : ra) sum_a += choose2(c);
  for (const auto& [key, c] : rb) sum_b += choose2(c);
  const double pairs = choose2(static_cast<long long>(n));
  const double expected = sum_a * sum_b / pairs;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;  // both partitions degenerate in the same way
  return (sum_ij - expected) / (max_index - expected);
}

}  // namespace dlac
