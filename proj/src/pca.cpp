#include "dlac/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dlac {

namespace {

double offdiag_norm(const Mat& m) {
  double s = 0.0;
  for (int p = 0; p < m.rows; ++p)
    for (int q = p + 1; q < m.cols; ++q) s += 2.0 * m.at(p, q) * m.at(p, q);
  return std::sqrt(s);
}

void fix_sign(Mat& vectors, int col) {
  int arg = 0;
  double best = -1.0;
  for (int r = 0; r < vectors.rows; ++r) {
    const double mag = std::abs(vectors.at(r, col));
    if (mag > best) {
      best = mag;
      arg = r;
    }
  }
  if (vectors.at(arg, col) < 0.0)
    for (int r = 0; r < vectors.rows; ++r) vectors.at(r, col) = -vectors.at(r, col);
}

}  // namespace

EigenResult jacobi_eigen_sym(const Mat& sym) {
  if (sym.rows != sym.cols || sym.rows < 1)
    throw std::invalid_argument("jacobi: matrix must be square, got " + std::to_string(sym.rows) +
                                "x" + std::to_string(sym.cols));
  const int n = sym.rows;
  Mat A = sym;
  Mat V(n, n);
  for (int i = 0; i < n; ++i) V.at(i, i) = 1.0;

  const double tol = 1e-12;
  const int max_sweeps = 128;
  int sweep = 0;
  while (offdiag_norm(A) >= tol) {
    if (++sweep > max_sweeps) throw std::runtime_error("jacobi: no convergence after 128 sweeps");
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = A.at(p, q);
        if (apq == 0.0) continue;
        const double app = A.at(p, p);
        const double aqq = A.at(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (int i = 0; i < n; ++i) {
          const double aip = A.at(i, p);
          const double aiq = A.at(i, q);
          A.at(i, p) = c * aip - s * aiq;
          A.at(i, q) = s * aip + c * aiq;
        }
        for (int i = 0; i < n; ++i) {
          const double api = A.at(p, i);
          const double aqi = A.at(q, i);
          A.at(p, i) = c * api - s * aqi;
          A.at(q, i) = s * api + c * aqi;
        }
        for (int i = 0; i < n; ++i) {
          const double vip = V.at(i, p);
          const double viq = V.at(i, q);
          V.at(i, p) = c * vip - s * viq;
          V.at(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    if (A.at(x, x) != A.at(y, y)) return A.at(x, x) > A.at(y, y);
    return x < y;
  });

  EigenResult res;
  res.values.resize(static_cast<std::size_t>(n));
  res.vectors = Mat(n, n);
  for (int j = 0; j < n; ++j) {
    res.values[static_cast<std::size_t>(j)] = A.at(order[static_cast<std::size_t>(j)],
                                                   order[static_cast<std::size_t>(j)]);
    for (int i = 0; i < n; ++i)
      res.vectors.at(i, j) = V.at(i, order[static_cast<std::size_t>(j)]);
    fix_sign(res.vectors, j);
  }
  return res;
}

PcaBasis pca_fit(const Mat& D, int k, const PcaOptions& opts) {
  const int d = D.rows, n = D.cols;
  if (d < 1 || n < 2) throw std::invalid_argument("pca: need a d x n matrix with n >= 2");
  if (k < 1 || k > d)
    throw std::invalid_argument("pca: k=" + std::to_string(k) + " out of range [1, " +
                                std::to_string(d) + "]");
  const int achievable = opts.center ? std::min(d, n - 1) : std::min(d, n);
  if (k > achievable)
    throw std::invalid_argument("pca: k=" + std::to_string(k) + " exceeds achievable rank " +
                                std::to_string(achievable) + " for " + std::to_string(n) +
                                " samples in " + std::to_string(d) + " dimensions");

  PcaBasis basis;
  basis.mean.assign(static_cast<std::size_t>(d), 0.0);
  if (opts.center) {
    for (int i = 0; i < d; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += D.at(i, j);
      basis.mean[static_cast<std::size_t>(i)] = s / n;
    }
  }

  // scatter of (centered) columns
  Mat scatter(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      double s = 0.0;
      for (int c = 0; c < n; ++c)
        s += (D.at(i, c) - basis.mean[static_cast<std::size_t>(i)]) *
             (D.at(j, c) - basis.mean[static_cast<std::size_t>(j)]);
      scatter.at(i, j) = s;
      scatter.at(j, i) = s;
    }

  EigenResult eig = jacobi_eigen_sym(scatter);
  basis.basis = Mat(d, k);
  basis.eigenvalues.assign(eig.values.begin(), eig.values.begin() + k);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < k; ++j) basis.basis.at(i, j) = eig.vectors.at(i, j);
  return basis;
}

Mat pca_project(const PcaBasis& basis, const Mat& D) {
  const int d = basis.basis.rows, k = basis.basis.cols;
  if (D.rows != d)
    throw std::invalid_argument("pca_project: data has " + std::to_string(D.rows) +
                                " dimensions, basis expects " + std::to_string(d));
  Mat out(k, D.cols);
  for (int j = 0; j < D.cols; ++j)
    for (int r = 0; r < k; ++r) {
      double s = 0.0;
      for (int i = 0; i < d; ++i)
        s += basis.basis.at(i, r) * (D.at(i, j) - basis.mean[static_cast<std::size_t>(i)]);
      out.at(r, j) = s;
    }
  return out;
}

double reconstruction_error(const PcaBasis& basis, const Mat& D) {
  const int d = basis.basis.rows, k = basis.basis.cols;
  if (D.rows != d)
    throw std::invalid_argument("reconstruction_error: data has " + std::to_string(D.rows) +
                                " dimensions, basis expects " + std::to_string(d));
  double err = 0.0;
  std::vector<double> x(static_cast<std::size_t>(d));
  std::vector<double> proj(static_cast<std::size_t>(k));
  for (int j = 0; j < D.cols; ++j) {
    for (int i = 0; i < d; ++i)
      x[static_cast<std::size_t>(i)] = D.at(i, j) - basis.mean[static_cast<std::size_t>(i)];
    for (int r = 0; r < k; ++r) {
      double s = 0.0;
      for (int i = 0; i < d; ++i) s += basis.basis.at(i, r) * x[static_cast<std::size_t>(i)];
      proj[static_cast<std::size_t>(r)] = s;
    }
    for (int i = 0; i < d; ++i) {
      double rec = 0.0;
      for (int r = 0; r < k; ++r) rec += basis.basis.at(i, r) * proj[static_cast<std::size_t>(r)];
      const double e = x[static_cast<std::size_t>(i)] - rec;
      err += e * e;
    }
  }
  return err;
}

Mat rbf_kernel(const Mat& D, double gamma) {
  if (gamma <= 0.0) throw std::invalid_argument("kernel_pca: gamma must be positive");
  const int d = D.rows, n = D.cols;
  Mat K(n, n);
  for (int i = 0; i < n; ++i) {
    K.at(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      double dist2 = 0.0;
      for (int r = 0; r < d; ++r) {
        const double diff = D.at(r, i) - D.at(r, j);
        dist2 += diff * diff;
      }
      const double v = std::exp(-gamma * dist2);
      K.at(i, j) = v;
      K.at(j, i) = v;
    }
  }
  return K;
}

Mat kernel_pca(const Mat& D, int k, double gamma) {
  const int n = D.cols;
  if (n < 2) throw std::invalid_argument("kernel_pca: need at least 2 samples");
  if (k < 1 || k > n)
    throw std::invalid_argument("kernel_pca: k=" + std::to_string(k) + " out of range [1, " +
                                std::to_string(n) + "]");
  Mat K = rbf_kernel(D, gamma);

  // double centering: K' = K - 1K/n - K1/n + 1K1/n^2
  std::vector<double> row_mean(static_cast<std::size_t>(n), 0.0);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += K.at(i, j);
    row_mean[static_cast<std::size_t>(i)] = s / n;
    total += s;
  }
  total /= static_cast<double>(n) * n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      K.at(i, j) = K.at(i, j) - row_mean[static_cast<std::size_t>(i)] -
                   row_mean[static_cast<std::size_t>(j)] + total;

  EigenResult eig = jacobi_eigen_sym(K);
  const double scale = std::max(eig.values.empty() ? 0.0 : eig.values[0], 0.0);
  int rank = 0;
  for (double v : eig.values)
    if (v > 1e-12 && v > scale * 1e-12) ++rank;
  if (k > rank)
    throw std::invalid_argument("kernel_pca: k=" + std::to_string(k) +
                                " exceeds achievable rank " + std::to_string(rank) +
                                " of the centered kernel");

  Mat coords(k, n);
  for (int r = 0; r < k; ++r) {
    const double lam = std::sqrt(eig.values[static_cast<std::size_t>(r)]);
    for (int i = 0; i < n; ++i) coords.at(r, i) = lam * eig.vectors.at(i, r);
  }
  return coords;
}

}  // namespace dlac
