#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dlac {

// Minimal dense double matrix, row-major.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
};

struct EigenResult {
  std::vector<double> values;  // descending
  Mat vectors;                 // columns are unit eigenvectors, same order
};

// Cyclic Jacobi rotations on a symmetric matrix, 64-bit, iterated until the
// off-diagonal Frobenius norm drops below 1e-12. Eigenvectors are sign-fixed:
// the largest-magnitude component of each is positive.
EigenResult jacobi_eigen_sym(const Mat& sym);

struct PcaBasis {
  Mat basis;                        // d x k, orthonormal columns
  std::vector<double> eigenvalues;  // k, non-increasing
  std::vector<double> mean;         // d; zeros when centering is disabled
};

struct PcaOptions {
  bool center = true;  // subtract the column mean before forming the scatter
};

// D is d x n, one column per sample. Fits the top-k eigenvectors of the
// scatter matrix of (optionally centered) columns.
PcaBasis pca_fit(const Mat& D, int k, const PcaOptions& opts = {});

// k x n coordinates: B^T (d_i - mean).
Mat pca_project(const PcaBasis& basis, const Mat& D);

// sum_i || x_i - B B^T x_i ||^2 on centered columns.
double reconstruction_error(const PcaBasis& basis, const Mat& D);

// n x n RBF Gram matrix, K_ij = exp(-gamma ||d_i - d_j||^2).
Mat rbf_kernel(const Mat& D, double gamma);

// Double-centered RBF kernel eigendecomposition; coordinate r of sample i is
// sqrt(lambda_r) * v_r[i] (eigenvectors scaled by 1/sqrt(lambda)). Returns
// k x n coordinates.
Mat kernel_pca(const Mat& D, int k, double gamma);

}  // namespace dlac
