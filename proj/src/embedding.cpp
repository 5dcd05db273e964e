#include "dlac/embedding.hpp"

#include <cmath>
#include <stdexcept>

#include "dlac/io.hpp"
#include "dlac/parallel.hpp"

namespace dlac {

EmbeddingMatrix extract_embeddings(const Model& model, const std::vector<PreparedSample>& samples,
                                   int threads) {
  if (samples.empty()) throw std::invalid_argument("extract_embeddings: empty split");
  const int d = model.config().num_classes;
  const int n = static_cast<int>(samples.size());

  EmbeddingMatrix emb;
  emb.D = Mat(d, n);
  emb.labels.resize(static_cast<std::size_t>(n));
  emb.paths.resize(static_cast<std::size_t>(n));
  std::vector<int> bad(static_cast<std::size_t>(n), 0);

  parallel_for(n, threads, [&](int i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    auto fwd = model.forward(s.input);
    const auto& logits = fwd.logits.value();
    double norm2 = 0.0;
    for (float v : logits) norm2 += static_cast<double>(v) * v;
    if (norm2 <= 0.0) {
      bad[static_cast<std::size_t>(i)] = 1;
      return;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (int r = 0; r < d; ++r)
      emb.D.at(r, i) = static_cast<double>(logits[static_cast<std::size_t>(r)]) * inv;
    emb.labels[static_cast<std::size_t>(i)] = s.label;
    emb.paths[static_cast<std::size_t>(i)] = s.path;
  });

  for (int i = 0; i < n; ++i)
    if (bad[static_cast<std::size_t>(i)])
      throw std::invalid_argument("extract_embeddings: zero logit vector for image '" +
                                  samples[static_cast<std::size_t>(i)].path +
                                  "' cannot be normalized");
  return emb;
}

Mat class_centroids(const Mat& coords, const std::vector<int>& labels, int num_classes) {
  if (coords.cols != static_cast<int>(labels.size()))
    throw std::invalid_argument("class_centroids: " + std::to_string(coords.cols) +
                                " coordinate columns vs " + std::to_string(labels.size()) +
                                " labels");
  Mat centroids(num_classes, coords.rows);
  std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
  for (int i = 0; i < coords.cols; ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    if (c < 0 || c >= num_classes)
      throw std::invalid_argument("class_centroids: label " + std::to_string(c) + " out of range");
    counts[static_cast<std::size_t>(c)]++;
    for (int r = 0; r < coords.rows; ++r) centroids.at(c, r) += coords.at(r, i);
  }
  for (int c = 0; c < num_classes; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0)
      throw std::invalid_argument("class_centroids: class " + std::to_string(c) +
                                  " has no points");
    for (int r = 0; r < coords.rows; ++r)
      centroids.at(c, r) /= counts[static_cast<std::size_t>(c)];
  }
  return centroids;
}

std::string cluster_report_csv(const KmeansResult& result, const Mat& centroids,
                               const std::vector<std::string>& class_names) {
  if (centroids.rows != static_cast<int>(class_names.size()) ||
      centroids.rows != static_cast<int>(result.assignment.size()))
    throw std::invalid_argument("cluster_report: class count mismatch");
  std::string s = "class,pc1,pc2,cluster\n";
  for (int c = 0; c < centroids.rows; ++c) {
    const double pc1 = centroids.cols > 0 ? centroids.at(c, 0) : 0.0;
    const double pc2 = centroids.cols > 1 ? centroids.at(c, 1) : 0.0;
    s += class_names[static_cast<std::size_t>(c)] + "," + fmt_g9(pc1) + "," + fmt_g9(pc2) + "," +
         std::to_string(result.assignment[static_cast<std::size_t>(c)]) + "\n";
  }
  return s;
}

std::string pca_coords_csv(const Mat& coords, const EmbeddingMatrix& emb,
                           const std::vector<std::string>& class_names) {
  std::string s = "image,label,pc1,pc2\n";
  for (int i = 0; i < coords.cols; ++i) {
    const double pc1 = coords.rows > 0 ? coords.at(0, i) : 0.0;
    const double pc2 = coords.rows > 1 ? coords.at(1, i) : 0.0;
    s += emb.paths[static_cast<std::size_t>(i)] + "," +
         class_names[static_cast<std::size_t>(emb.labels[static_cast<std::size_t>(i)])] + "," +
         fmt_g9(pc1) + "," + fmt_g9(pc2) + "\n";
  }
  return s;
}

}  // namespace dlac
