#pragma once

#include <cstdint>
#include <string>

#include "dlac/train.hpp"

namespace dlac {

// Flat key=value training configuration. Defaults: 30 epochs, batch 16,
// lr 0.1 dropping to 0.01 at epoch 20, momentum 0.9.
struct RunConfig {
  int image_size = 64;
  int stem_channels = 8;
  std::string cells = "NRNRN";
  int epochs = 30;
  std::vector<LrPhase> lr_schedule = {{0, 0.1}, {20, 0.01}};
  int batch_size = 16;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  double split_ratio = 0.8;  // used only when a manifest has no test rows

  TrainConfig train_config(int threads) const;
  void validate() const;
};

// Unknown keys are rejected; blank lines and '#' comments are allowed.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);
std::string run_config_to_string(const RunConfig& cfg);

}  // namespace dlac
