#pragma once

#include <string>
#include <vector>

#include "dlac/dataset.hpp"

namespace dlac {

// One evaluated test image: the full class ranking with probabilities plus
// the stratification tags.
struct PredictionRow {
  int true_label = 0;
  std::vector<int> ranked;       // permutation of all classes, best first
  std::vector<double> probs;     // aligned with ranked, non-increasing
  View view = View::kUnknown;
  Source source = Source::kWeb;
};

using PredictionLog = std::vector<PredictionRow>;

// 100 * |{i : true_i in top-k}| / n.
double topk_accuracy(const PredictionLog& log, int k, int num_classes);

struct AccuracyTable {
  struct Row {
    std::string name;
    long count = 0;
    long top1_hits = 0;
    long top5_hits = 0;
  };
  std::vector<Row> rows;  // class-index order
  long total_count = 0;
  long total_top1 = 0;
  long total_top5 = 0;  // overall row is micro-averaged
};

// top-5 means top-min(5, num_classes).
AccuracyTable per_class_table(const PredictionLog& log, const std::vector<std::string>& class_names);

// `class,top1,top5` with a TOTAL row; absent classes render N/A.
std::string accuracy_table_csv(const AccuracyTable& t);

// Paper-style table: one architect row per class plus the total.
std::string accuracy_table_text(const AccuracyTable& t);

struct StratCell {
  long count = 0;
  long top1_hits = 0;
  long top5_hits = 0;
};

// Full source x view grid (3 x 3, enum order self/web/synthetic x
// indoor/outdoor/unknown).
struct StrataTable {
  StratCell cells[3][3];
  const StratCell& cell(Source s, View v) const {
    return cells[static_cast<int>(s)][static_cast<int>(v)];
  }
  StratCell& cell(Source s, View v) { return cells[static_cast<int>(s)][static_cast<int>(v)]; }
};

StrataTable stratified_accuracy(const PredictionLog& log, int num_classes);

// `source,view,top1,top5,count`; empty cells render N/A.
std::string strata_csv(const StrataTable& t);

// The 4-column self/web x indoor/outdoor layout.
std::string strata_table_text(const StrataTable& t);

// M[true][rank-1 prediction] counts.
std::vector<std::vector<long>> confusion_matrix(const PredictionLog& log, int num_classes);

// Header row of class names, then one row per true class.
std::string confusion_csv(const std::vector<std::vector<long>>& m,
                          const std::vector<std::string>& class_names);

}  // namespace dlac
