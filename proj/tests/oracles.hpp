// Independent reference implementations used to check the library. These are
// deliberately written without reusing library internals: the convolution is
// the plain quadruple loop, the eigensolver pivots on the largest off-diagonal
// element (the library sweeps cyclically), and k-means is exhaustive
// enumeration.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "dlac/pca.hpp"
#include "dlac/tensor.hpp"

namespace oracle {

// ---- finite differences ------------------------------------------------------

// Central finite differences of a scalar function with respect to one leaf
// tensor. eval() must rebuild the graph from current leaf values.
template <typename T, typename Eval>
std::vector<T> central_diff(dlac::TensorT<T>& leaf, Eval eval, T step) {
  std::vector<T> grad(leaf.numel());
  auto& v = leaf.value_mut();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const T saved = v[i];
    v[i] = saved + step;
    const T fp = eval();
    v[i] = saved - step;
    const T fm = eval();
    v[i] = saved;
    grad[i] = (fp - fm) / (2 * step);
  }
  return grad;
}

// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor)
template <typename T>
double max_rel_err(const std::vector<T>& a, const std::vector<T>& b, double floor_ = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = static_cast<double>(a[i]);
    const double y = static_cast<double>(b[i]);
    const double denom = std::max({std::abs(x), std::abs(y), floor_});
    worst = std::max(worst, std::abs(x - y) / denom);
  }
  return worst;
}

// ---- naive direct convolution ------------------------------------------------

// Cross-correlation, zero padding, inner accumulation in ascending
// (cin, ky, kx) order.
template <typename T>
std::vector<T> conv2d_reference(const std::vector<T>& in, int Ci, int H, int W,
                                const std::vector<T>& k, int Co, int kh, int kw, int stride,
                                int pad) {
  const int Ho = (H + 2 * pad - kh) / stride + 1;
  const int Wo = (W + 2 * pad - kw) / stride + 1;
  std::vector<T> out(static_cast<std::size_t>(Co) * Ho * Wo, T(0));
  for (int co = 0; co < Co; ++co)
    for (int oy = 0; oy < Ho; ++oy)
      for (int ox = 0; ox < Wo; ++ox) {
        T acc = 0;
        for (int ci = 0; ci < Ci; ++ci)
          for (int ky = 0; ky < kh; ++ky)
            for (int kx = 0; kx < kw; ++kx) {
              const int iy = oy * stride + ky - pad;
              const int ix = ox * stride + kx - pad;
              if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
              acc += in[(static_cast<std::size_t>(ci) * H + iy) * W + ix] *
                     k[((static_cast<std::size_t>(co) * Ci + ci) * kh + ky) * kw + kx];
            }
        out[(static_cast<std::size_t>(co) * Ho + oy) * Wo + ox] = acc;
      }
  return out;
}

// ---- eigen oracle --------------------------------------------------------------

// Jacobi with greedy largest-off-diagonal pivoting (the library uses cyclic
// sweeps). Returns eigenvalues descending, eigenvectors as columns,
// sign-fixed so the largest-magnitude component is positive.
struct EigenOracle {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;  // vectors[j] is eigenvector j
};

inline EigenOracle eigen_oracle(const dlac::Mat& sym) {
  const int n = sym.rows;
  std::vector<std::vector<double>> A(static_cast<std::size_t>(n),
                                     std::vector<double>(static_cast<std::size_t>(n)));
  std::vector<std::vector<double>> V(static_cast<std::size_t>(n),
                                     std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (int i = 0; i < n; ++i) {
    V[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
    for (int j = 0; j < n; ++j) A[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = sym.at(i, j);
  }

  for (long iter = 0; iter < 100000L * n * n; ++iter) {
    int p = 0, q = 1;
    double biggest = -1.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (std::abs(A[i][j]) > biggest) {
          biggest = std::abs(A[i][j]);
          p = i;
          q = j;
        }
    if (n < 2 || biggest < 1e-14) break;

    const double app = A[p][p], aqq = A[q][q], apq = A[p][q];
    const double phi = 0.5 * std::atan2(2.0 * apq, aqq - app);
    const double c = std::cos(phi), s = std::sin(phi);
    for (int i = 0; i < n; ++i) {
      const double aip = A[i][p], aiq = A[i][q];
      A[i][p] = c * aip - s * aiq;
      A[i][q] = s * aip + c * aiq;
    }
    for (int i = 0; i < n; ++i) {
      const double api = A[p][i], aqi = A[q][i];
      A[p][i] = c * api - s * aqi;
      A[q][i] = s * api + c * aqi;
    }
    for (int i = 0; i < n; ++i) {
      const double vip = V[i][p], viq = V[i][q];
      V[i][p] = c * vip - s * viq;
      V[i][q] = s * vip + c * viq;
    }
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    return A[static_cast<std::size_t>(x)][static_cast<std::size_t>(x)] >
           A[static_cast<std::size_t>(y)][static_cast<std::size_t>(y)];
  });

  EigenOracle out;
  for (int j : order) {
    out.values.push_back(A[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)]);
    std::vector<double> vec(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) vec[static_cast<std::size_t>(i)] = V[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    int arg = 0;
    for (int i = 1; i < n; ++i)
      if (std::abs(vec[static_cast<std::size_t>(i)]) > std::abs(vec[static_cast<std::size_t>(arg)])) arg = i;
    if (vec[static_cast<std::size_t>(arg)] < 0.0)
      for (auto& x : vec) x = -x;
    out.vectors.push_back(std::move(vec));
  }
  return out;
}

// ---- exhaustive k-means ---------------------------------------------------------

// Minimum inertia over every assignment of n points to at most k clusters.
inline double kmeans_exhaustive_optimum(const dlac::Mat& points, int k) {
  const int n = points.rows, dim = points.cols;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> assign(static_cast<std::size_t>(n), 0);
  long total = 1;
  for (int i = 0; i < n; ++i) total *= k;
  for (long code = 0; code < total; ++code) {
    long c = code;
    for (int i = 0; i < n; ++i) {
      assign[static_cast<std::size_t>(i)] = static_cast<int>(c % k);
      c /= k;
    }
    std::vector<std::vector<double>> mean(static_cast<std::size_t>(k),
                                          std::vector<double>(static_cast<std::size_t>(dim), 0.0));
    std::vector<int> count(static_cast<std::size_t>(k), 0);
    for (int i = 0; i < n; ++i) {
      count[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])]++;
      for (int d = 0; d < dim; ++d)
        mean[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])][static_cast<std::size_t>(d)] += points.at(i, d);
    }
    for (int j = 0; j < k; ++j)
      if (count[static_cast<std::size_t>(j)] > 0)
        for (int d = 0; d < dim; ++d)
          mean[static_cast<std::size_t>(j)][static_cast<std::size_t>(d)] /= count[static_cast<std::size_t>(j)];
    double inertia = 0.0;
    for (int i = 0; i < n; ++i)
      for (int d = 0; d < dim; ++d) {
        const double diff = points.at(i, d) -
                            mean[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])][static_cast<std::size_t>(d)];
        inertia += diff * diff;
      }
    best = std::min(best, inertia);
  }
  return best;
}

}  // namespace oracle
