#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dlac/dataset.hpp"
#include "dlac/model.hpp"

namespace dlac {

struct LrPhase {
  int from_epoch;
  double lr;
};

struct TrainConfig {
  int epochs = 30;
  std::vector<LrPhase> lr_schedule = {{0, 0.1}, {20, 0.01}};
  int batch_size = 16;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;  // phases must partition [0, epochs), lrs positive
  double lr_at(int epoch) const;
};

struct EpochStats {
  int epoch;
  double lr;
  double train_loss;
  double train_top1;  // percent
  double test_loss;
  double test_top1;  // percent
};

struct TrainResult {
  std::vector<EpochStats> history;
};

struct PreparedSample {
  Tensor input;
  int label;
  std::string path;
  View view = View::kUnknown;
  Source source = Source::kWeb;
};

struct PreparedData {
  std::vector<PreparedSample> train;
  std::vector<PreparedSample> test;
  int num_classes = 0;
  std::vector<std::string> class_names;
};

// Decodes and preprocesses every manifest item into memory.
PreparedData prepare(const Dataset& ds, int image_size, int threads);

// SGD with momentum over shuffled minibatches. Per-sample gradients are
// computed on worker graphs and reduced in ascending sample order, so results
// are bit-identical for any thread count. on_epoch, when set, is called after
// each epoch (progress logging).
using EpochCallback = std::function<void(const EpochStats&)>;
TrainResult train(Model& model, const PreparedData& data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

// `epoch,lr,train_loss,train_top1,test_top1` rows.
std::string history_csv(const TrainResult& result);

// Parses "0:0.1,20:0.01" into phases.
std::vector<LrPhase> parse_lr_schedule(const std::string& text);
std::string lr_schedule_to_string(const std::vector<LrPhase>& phases);

// Deterministic stratified re-split used when a manifest carries no test rows.
void stratified_split(Dataset& ds, double train_ratio, std::uint64_t seed);

}  // namespace dlac
