#pragma once

#include <string>
#include <vector>

#include "dlac/kmeans.hpp"
#include "dlac/model.hpp"
#include "dlac/pca.hpp"
#include "dlac/train.hpp"

namespace dlac {

// d x n matrix of L2-normalized pre-softmax vectors, one column per image.
struct EmbeddingMatrix {
  Mat D;
  std::vector<int> labels;       // per column
  std::vector<std::string> paths;  // per column, for reports
};

EmbeddingMatrix extract_embeddings(const Model& model, const std::vector<PreparedSample>& samples,
                                   int threads);

// Arithmetic mean of each class's projected points; coords is k x n.
// Returns num_classes x k (one row per class).
Mat class_centroids(const Mat& coords, const std::vector<int>& labels, int num_classes);

// `class,pc1,pc2,cluster` rows in class-index order.
std::string cluster_report_csv(const KmeansResult& result, const Mat& centroids,
                               const std::vector<std::string>& class_names);

// `image,label,pc1,pc2` rows in column order.
std::string pca_coords_csv(const Mat& coords, const EmbeddingMatrix& emb,
                           const std::vector<std::string>& class_names);

}  // namespace dlac
