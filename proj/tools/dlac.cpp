// dlac: train a small cell-stacked image classifier, explain its predictions
// with gradient-weighted class activation maps, and cluster classes by their
// learned embeddings.

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dlac/checkpoint.hpp"
#include "dlac/dataset.hpp"
#include "dlac/embedding.hpp"
#include "dlac/gradcam.hpp"
#include "dlac/io.hpp"
#include "dlac/kmeans.hpp"
#include "dlac/metrics.hpp"
#include "dlac/model.hpp"
#include "dlac/parallel.hpp"
#include "dlac/pca.hpp"
#include "dlac/runconfig.hpp"
#include "dlac/synth.hpp"
#include "dlac/train.hpp"

namespace {

struct SynthArgs {
  std::string out_dir;
  int classes = 4;
  int per_class = 10;
  int size = 64;
  std::uint64_t seed = 0;
  bool fixed_quadrant = false;
  bool family_pairs = false;
};

struct TrainArgs {
  std::string config_path;
  std::string data;
  std::string out;
  std::string history;
  int threads = 1;
};

struct EvalArgs {
  std::string ckpt;
  std::string data;
  std::string out_dir;
  int threads = 1;
};

struct GradcamArgs {
  std::string ckpt;
  std::string image;
  int class_index = -1;
  int top = 4;
  std::string out_dir;
};

struct ClusterArgs {
  std::string ckpt;
  std::string data;
  std::string split = "test";
  int k = 4;
  int pc = 2;
  std::string out_dir;
  std::string kernel = "linear";
  double gamma = 1.0;
  bool no_center = false;
  std::uint64_t seed = 0;
  int threads = 1;
};

void run_synth(const SynthArgs& a) {
  dlac::SynthSpec spec;
  spec.num_classes = a.classes;
  spec.samples_per_class = a.per_class;
  spec.image_size = a.size;
  spec.seed = a.seed;
  spec.fixed_quadrant = a.fixed_quadrant;
  spec.family_pairs = a.family_pairs;
  auto res = dlac::generate_synthetic(spec, a.out_dir);
  std::printf("wrote %d classes x %d samples to %s\n", spec.num_classes, spec.samples_per_class,
              a.out_dir.c_str());
  std::printf("manifest: %s\n", res.manifest_path.c_str());
  if (!res.ground_truth_path.empty())
    std::printf("ground truth: %s\n", res.ground_truth_path.c_str());
}

void run_train(const TrainArgs& a) {
  dlac::RunConfig cfg =
      a.config_path.empty() ? dlac::RunConfig{} : dlac::load_run_config(a.config_path);
  cfg.validate();

  dlac::Dataset ds = dlac::load_manifest(a.data);
  if (ds.indices_of(dlac::Split::kTest).empty()) {
    std::printf("manifest has no test rows; stratified %g/%g re-split from seed %llu\n",
                cfg.split_ratio, 1.0 - cfg.split_ratio,
                static_cast<unsigned long long>(cfg.seed));
    dlac::stratified_split(ds, cfg.split_ratio, cfg.seed);
  }

  dlac::PreparedData data = dlac::prepare(ds, cfg.image_size, a.threads);

  dlac::ModelConfig mc;
  mc.image_size = cfg.image_size;
  mc.stem_channels = cfg.stem_channels;
  mc.cells = cfg.cells;
  mc.num_classes = data.num_classes;
  mc.seed = cfg.seed;
  mc.class_names = data.class_names;
  dlac::Model model = dlac::Model::build(mc);
  std::printf("model: %zu parameters, %d classes, cells %s\n", model.param_count(),
              mc.num_classes, mc.cells.c_str());

  dlac::TrainConfig tc = cfg.train_config(a.threads);
  auto result = dlac::train(model, data, tc, [&](const dlac::EpochStats& e) {
    std::printf("epoch %d/%d lr %.4g train_loss %.4f train_top1 %.2f test_top1 %.2f\n", e.epoch + 1,
                tc.epochs, e.lr, e.train_loss, e.train_top1, e.test_top1);
    std::fflush(stdout);
  });

  dlac::save_checkpoint(model, a.out);
  std::printf("checkpoint: %s\n", a.out.c_str());
  if (!a.history.empty()) {
    dlac::write_text_file(a.history, dlac::history_csv(result));
    std::printf("history: %s\n", a.history.c_str());
  }
}

dlac::PredictionLog build_log(const dlac::Model& model,
                              const std::vector<dlac::PreparedSample>& samples, int threads) {
  const int d = model.config().num_classes;
  dlac::PredictionLog log(samples.size());
  dlac::parallel_for(static_cast<int>(samples.size()), threads, [&](int i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    auto preds = dlac::predict_topk(model, s.input, d);
    auto& row = log[static_cast<std::size_t>(i)];
    row.true_label = s.label;
    row.view = s.view;
    row.source = s.source;
    for (const auto& p : preds) {
      row.ranked.push_back(p.class_index);
      row.probs.push_back(p.probability);
    }
  });
  return log;
}

void run_eval(const EvalArgs& a) {
  dlac::Model model = dlac::load_checkpoint(a.ckpt);
  dlac::Dataset ds = dlac::load_manifest(a.data);
  if (ds.num_classes() != model.config().num_classes)
    throw std::invalid_argument("eval: manifest has " + std::to_string(ds.num_classes()) +
                                " classes, checkpoint expects " +
                                std::to_string(model.config().num_classes));
  dlac::PreparedData data = dlac::prepare(ds, model.config().image_size, a.threads);
  if (data.test.empty()) throw std::invalid_argument("eval: manifest has no test rows");

  dlac::PredictionLog log = build_log(model, data.test, a.threads);

  auto table = dlac::per_class_table(log, ds.class_names);
  auto strata = dlac::stratified_accuracy(log, ds.num_classes());
  auto confusion = dlac::confusion_matrix(log, ds.num_classes());

  dlac::make_dirs(a.out_dir);
  dlac::write_text_file(dlac::path_join(a.out_dir, "report.csv"), dlac::accuracy_table_csv(table));
  dlac::write_text_file(dlac::path_join(a.out_dir, "strata.csv"), dlac::strata_csv(strata));
  dlac::write_text_file(dlac::path_join(a.out_dir, "confusion.csv"),
                        dlac::confusion_csv(confusion, ds.class_names));

  std::printf("%s\n%s\n", dlac::accuracy_table_text(table).c_str(),
              dlac::strata_table_text(strata).c_str());
  std::printf("wrote report.csv, strata.csv, confusion.csv to %s\n", a.out_dir.c_str());
}

void run_gradcam(const GradcamArgs& a) {
  dlac::Model model = dlac::load_checkpoint(a.ckpt);
  const int d = model.config().num_classes;
  const auto& names = model.config().class_names;
  auto class_name = [&](int c) {
    return names.empty() ? "class" + std::to_string(c) : names[static_cast<std::size_t>(c)];
  };

  dlac::ImageSample raw = dlac::load_image(a.image);
  const int S = model.config().image_size;
  dlac::Tensor input = dlac::preprocess(raw, S);
  dlac::ImageSample display = dlac::crop_resize(raw, S);

  if (a.class_index >= d)
    throw std::invalid_argument("gradcam: class " + std::to_string(a.class_index) +
                                " out of range [0, " + std::to_string(d) + ")");
  const int top_n = std::min(a.top, d);
  if (top_n < 1) throw std::invalid_argument("gradcam: --top must be >= 1");

  auto preds = dlac::predict_topk(model, input, top_n);
  std::vector<int> targets;
  if (a.class_index >= 0) {
    targets.push_back(a.class_index);
  } else {
    for (const auto& p : preds) targets.push_back(p.class_index);
  }

  dlac::make_dirs(a.out_dir);
  std::string pred_csv = "rank,class,probability\n";
  for (std::size_t i = 0; i < preds.size(); ++i)
    pred_csv += std::to_string(i + 1) + "," + class_name(preds[i].class_index) + "," +
                dlac::fmt_g9(preds[i].probability) + "\n";
  dlac::write_text_file(dlac::path_join(a.out_dir, "predictions.csv"), pred_csv);

  for (int c : targets) {
    dlac::Heatmap hm = dlac::explain(model, input, c);
    auto pgm = dlac::heatmap_to_pgm(hm);
    const std::string stem = "class" + std::to_string(c);
    dlac::write_binary_file(dlac::path_join(a.out_dir, "heatmap_" + stem + ".pgm"), pgm.data(),
                            pgm.size());
    dlac::Heatmap up = dlac::normalize_by_max(dlac::upsample_bilinear(hm, S));
    dlac::save_image(dlac::path_join(a.out_dir, "overlay_" + stem + ".ppm"),
                     dlac::render_overlay(display, up));
    std::printf("class %d (%s): heatmap_%s.pgm overlay_%s.ppm\n", c, class_name(c).c_str(),
                stem.c_str(), stem.c_str());
  }
  std::printf("wrote predictions.csv and %zu explanation(s) to %s\n", targets.size(),
              a.out_dir.c_str());
}

void run_cluster(const ClusterArgs& a) {
  dlac::Model model = dlac::load_checkpoint(a.ckpt);
  dlac::Dataset ds = dlac::load_manifest(a.data);
  if (ds.num_classes() != model.config().num_classes)
    throw std::invalid_argument("cluster: manifest has " + std::to_string(ds.num_classes()) +
                                " classes, checkpoint expects " +
                                std::to_string(model.config().num_classes));
  if (a.k < 1 || a.k > ds.num_classes())
    throw std::invalid_argument("cluster: --k must be in [1, " +
                                std::to_string(ds.num_classes()) + "]");
  if (a.pc < 1) throw std::invalid_argument("cluster: --pc must be >= 1");

  dlac::PreparedData data = dlac::prepare(ds, model.config().image_size, a.threads);
  std::vector<dlac::PreparedSample> samples;
  if (a.split == "train") {
    samples = std::move(data.train);
  } else if (a.split == "test") {
    samples = std::move(data.test);
  } else if (a.split == "all") {
    samples = std::move(data.train);
    for (auto& s : data.test) samples.push_back(std::move(s));
  } else {
    throw std::invalid_argument("cluster: --split must be train|test|all");
  }
  if (samples.empty()) throw std::invalid_argument("cluster: split '" + a.split + "' is empty");

  dlac::EmbeddingMatrix emb = dlac::extract_embeddings(model, samples, a.threads);

  dlac::Mat coords;
  if (a.kernel == "linear") {
    dlac::PcaOptions opts;
    opts.center = !a.no_center;
    auto basis = dlac::pca_fit(emb.D, a.pc, opts);
    coords = dlac::pca_project(basis, emb.D);
  } else if (a.kernel == "rbf") {
    coords = dlac::kernel_pca(emb.D, a.pc, a.gamma);
  } else {
    throw std::invalid_argument("cluster: --kernel must be linear|rbf");
  }

  dlac::Mat centroids = dlac::class_centroids(coords, emb.labels, ds.num_classes());
  auto result = dlac::kmeans(centroids, a.k, a.seed);

  dlac::make_dirs(a.out_dir);
  dlac::write_text_file(dlac::path_join(a.out_dir, "pca_coords.csv"),
                        dlac::pca_coords_csv(coords, emb, ds.class_names));
  dlac::write_text_file(dlac::path_join(a.out_dir, "clusters.csv"),
                        dlac::cluster_report_csv(result, centroids, ds.class_names));
  std::printf("clustered %d classes into %d clusters (inertia %.6g)\n", ds.num_classes(), a.k,
              result.inertia);
  std::printf("wrote pca_coords.csv and clusters.csv to %s\n", a.out_dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cell-stacked CNN classifier with Grad-CAM explanations and PCA/k-means "
               "class clustering"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate a synthetic glyph corpus");
  synth->add_option("--out", synth_args.out_dir, "output directory")->required();
  synth->add_option("--classes", synth_args.classes, "number of classes");
  synth->add_option("--per-class", synth_args.per_class, "samples per class");
  synth->add_option("--size", synth_args.size, "image side in pixels");
  synth->add_option("--seed", synth_args.seed, "corpus seed");
  synth->add_flag("--fixed-quadrant", synth_args.fixed_quadrant,
                  "confine glyphs to one quadrant and write localization ground truth");
  synth->add_flag("--family-pairs", synth_args.family_pairs,
                  "classes form size-variant pairs of three shape families");

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "train a classifier on a manifest");
  train->add_option("--config", train_args.config_path, "key=value config file");
  train->add_option("--data", train_args.data, "manifest CSV")->required();
  train->add_option("--out", train_args.out, "checkpoint output path")->required();
  train->add_option("--history", train_args.history, "per-epoch history CSV");
  train->add_option("--threads", train_args.threads, "worker threads");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  eval->add_option("--ckpt", eval_args.ckpt, "checkpoint path")->required();
  eval->add_option("--data", eval_args.data, "manifest CSV")->required();
  eval->add_option("--out-dir", eval_args.out_dir, "report directory")->required();
  eval->add_option("--threads", eval_args.threads, "worker threads");

  GradcamArgs gradcam_args;
  auto* gradcam = app.add_subcommand("gradcam", "explain predictions for one image");
  gradcam->add_option("--ckpt", gradcam_args.ckpt, "checkpoint path")->required();
  gradcam->add_option("--image", gradcam_args.image, "input image (PPM)")->required();
  auto* cls_opt = gradcam->add_option("--class", gradcam_args.class_index,
                                      "explain this class index only");
  auto* top_opt = gradcam->add_option("--top", gradcam_args.top,
                                      "explain the N highest-probability classes");
  cls_opt->excludes(top_opt);
  gradcam->add_option("--out-dir", gradcam_args.out_dir, "output directory")->required();

  ClusterArgs cluster_args;
  auto* cluster = app.add_subcommand("cluster", "project embeddings and cluster classes");
  cluster->add_option("--ckpt", cluster_args.ckpt, "checkpoint path")->required();
  cluster->add_option("--data", cluster_args.data, "manifest CSV")->required();
  cluster->add_option("--split", cluster_args.split, "embedding split: train|test|all");
  cluster->add_option("--k", cluster_args.k, "cluster count");
  cluster->add_option("--pc", cluster_args.pc, "principal components to keep");
  cluster->add_option("--out-dir", cluster_args.out_dir, "output directory")->required();
  cluster->add_option("--kernel", cluster_args.kernel, "pca kernel: linear|rbf");
  cluster->add_option("--gamma", cluster_args.gamma, "rbf bandwidth");
  cluster->add_flag("--no-center", cluster_args.no_center,
                    "skip mean centering (literal uncentered objective)");
  cluster->add_option("--seed", cluster_args.seed, "k-means seed");
  cluster->add_option("--threads", cluster_args.threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(synth)) run_synth(synth_args);
    else if (app.got_subcommand(train)) run_train(train_args);
    else if (app.got_subcommand(eval)) run_eval(eval_args);
    else if (app.got_subcommand(gradcam)) run_gradcam(gradcam_args);
    else if (app.got_subcommand(cluster)) run_cluster(cluster_args);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
  return 0;
}
