#include "dlac/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "dlac/io.hpp"

namespace dlac {

namespace {

bool in_topk(const PredictionRow& row, int k) {
  for (int i = 0; i < k && i < static_cast<int>(row.ranked.size()); ++i)
    if (row.ranked[static_cast<std::size_t>(i)] == row.true_label) return true;
  return false;
}

std::string pct_or_na(long hits, long count) {
  if (count == 0) return "N/A";
  return fmt_pct2(100.0 * static_cast<double>(hits) / static_cast<double>(count));
}

}  // namespace

double topk_accuracy(const PredictionLog& log, int k, int num_classes) {
  if (log.empty()) throw std::invalid_argument("topk_accuracy: empty prediction log");
  if (k < 1 || k > num_classes)
    throw std::invalid_argument("topk_accuracy: k=" + std::to_string(k) + " out of range [1, " +
                                std::to_string(num_classes) + "]");
  long hits = 0;
  for (const auto& row : log)
    if (in_topk(row, k)) ++hits;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(log.size());
}

AccuracyTable per_class_table(const PredictionLog& log, const std::vector<std::string>& class_names) {
  const int d = static_cast<int>(class_names.size());
  const int k5 = std::min(5, d);
  AccuracyTable t;
  t.rows.resize(class_names.size());
  for (int c = 0; c < d; ++c) t.rows[static_cast<std::size_t>(c)].name = class_names[static_cast<std::size_t>(c)];
  for (const auto& row : log) {
    if (row.true_label < 0 || row.true_label >= d)
      throw std::invalid_argument("per_class_table: true label out of range");
    auto& r = t.rows[static_cast<std::size_t>(row.true_label)];
    r.count++;
    const bool h1 = in_topk(row, 1);
    const bool h5 = in_topk(row, k5);
    r.top1_hits += h1 ? 1 : 0;
    r.top5_hits += h5 ? 1 : 0;
    t.total_count++;
    t.total_top1 += h1 ? 1 : 0;
    t.total_top5 += h5 ? 1 : 0;
  }
  return t;
}

std::string accuracy_table_csv(const AccuracyTable& t) {
  std::string s = "class,top1,top5\n";
  for (const auto& r : t.rows)
    s += r.name + "," + pct_or_na(r.top1_hits, r.count) + "," + pct_or_na(r.top5_hits, r.count) +
         "\n";
  s += "TOTAL," + pct_or_na(t.total_top1, t.total_count) + "," +
       pct_or_na(t.total_top5, t.total_count) + "\n";
  return s;
}

std::string accuracy_table_text(const AccuracyTable& t) {
  std::size_t w = 5;
  for (const auto& r : t.rows) w = std::max(w, r.name.size());
  std::string s = std::string("Class").append(w - 5, ' ') + "  Top1 accuracy  Top5 accuracy\n";
  auto line = [&](const std::string& name, long h1, long h5, long count) {
    std::string a1 = pct_or_na(h1, count), a5 = pct_or_na(h5, count);
    std::string row = name;
    row.append(w - name.size(), ' ');
    row += "  " + std::string(13 - std::min<std::size_t>(13, a1.size()), ' ') + a1;
    row += "  " + std::string(13 - std::min<std::size_t>(13, a5.size()), ' ') + a5 + "\n";
    return row;
  };
  for (const auto& r : t.rows) s += line(r.name, r.top1_hits, r.top5_hits, r.count);
  s += line("Total", t.total_top1, t.total_top5, t.total_count);
  return s;
}

StrataTable stratified_accuracy(const PredictionLog& log, int num_classes) {
  const int k5 = std::min(5, num_classes);
  StrataTable t;
  for (const auto& row : log) {
    auto& c = t.cell(row.source, row.view);
    c.count++;
    c.top1_hits += in_topk(row, 1) ? 1 : 0;
    c.top5_hits += in_topk(row, k5) ? 1 : 0;
  }
  return t;
}

std::string strata_csv(const StrataTable& t) {
  static const Source kSources[3] = {Source::kSelf, Source::kWeb, Source::kSynthetic};
  static const View kViews[3] = {View::kIndoor, View::kOutdoor, View::kUnknown};
  std::string s = "source,view,top1,top5,count\n";
  for (Source src : kSources)
    for (View v : kViews) {
      const auto& c = t.cell(src, v);
      s += std::string(to_string(src)) + "," + to_string(v) + "," + pct_or_na(c.top1_hits, c.count) +
           "," + pct_or_na(c.top5_hits, c.count) + "," + std::to_string(c.count) + "\n";
    }
  return s;
}

std::string strata_table_text(const StrataTable& t) {
  auto cell = [&](Source s, View v, bool top1) {
    const auto& c = t.cell(s, v);
    return pct_or_na(top1 ? c.top1_hits : c.top5_hits, c.count);
  };
  std::string s;
  s += "Image Source   Self-taken Images     Internet Images\n";
  s += "               Indoor     Outdoor    Indoor     Outdoor\n";
  auto row = [&](const char* name, bool top1) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%-14s %-10s %-10s %-10s %-10s\n", name,
                  cell(Source::kSelf, View::kIndoor, top1).c_str(),
                  cell(Source::kSelf, View::kOutdoor, top1).c_str(),
                  cell(Source::kWeb, View::kIndoor, top1).c_str(),
                  cell(Source::kWeb, View::kOutdoor, top1).c_str());
    return std::string(buf);
  };
  s += row("Top1 Accuracy", true);
  s += row("Top5 Accuracy", false);
  return s;
}

std::vector<std::vector<long>> confusion_matrix(const PredictionLog& log, int num_classes) {
  if (log.empty()) throw std::invalid_argument("confusion_matrix: empty prediction log");
  std::vector<std::vector<long>> m(static_cast<std::size_t>(num_classes),
                                   std::vector<long>(static_cast<std::size_t>(num_classes), 0));
  for (const auto& row : log) {
    if (row.ranked.empty()) throw std::invalid_argument("confusion_matrix: row without ranking");
    m[static_cast<std::size_t>(row.true_label)][static_cast<std::size_t>(row.ranked[0])]++;
  }
  return m;
}

std::string confusion_csv(const std::vector<std::vector<long>>& m,
                          const std::vector<std::string>& class_names) {
  std::string s = "class";
  for (const auto& n : class_names) s += "," + n;
  s += "\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    s += class_names[i];
    for (long v : m[i]) s += "," + std::to_string(v);
    s += "\n";
  }
  return s;
}

}  // namespace dlac
