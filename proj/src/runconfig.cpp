#include "dlac/runconfig.hpp"

#include <algorithm>
#include <iterator>
#include <stdexcept>

#include "dlac/io.hpp"

namespace dlac {

TrainConfig RunConfig::train_config(int threads) const {
  TrainConfig t;
  t.epochs = epochs;
  t.lr_schedule = lr_schedule;
  t.batch_size = batch_size;
  t.momentum = momentum;
  t.seed = seed;
  t.threads = threads;
  return t;
}

void RunConfig::validate() const {
  if (image_size < 1) throw std::invalid_argument("config: image_size must be positive");
  if (stem_channels < 1) throw std::invalid_argument("config: stem_channels must be positive");
  if (split_ratio <= 0.0 || split_ratio >= 1.0)
    throw std::invalid_argument("config: split_ratio must be in (0, 1)");
  for (char c : cells)
    if (c != 'N' && c != 'R')
      throw std::invalid_argument(std::string("config: cells may only contain N and R, got '") +
                                  c + "'");
  train_config(1).validate();
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  for (const auto& raw : split_lines(text)) {
    std::string line = raw;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    line = line.substr(start);

    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line is not key=value: '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);
    static const std::string known[] = {"image_size", "stem_channels", "cells",
                                        "epochs",     "lr_schedule",   "batch_size",
                                        "momentum",   "seed",          "split_ratio"};
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      throw std::invalid_argument("config: unknown key '" + key + "'");
    try {
      if (key == "image_size")
        cfg.image_size = std::stoi(val);
      else if (key == "stem_channels")
        cfg.stem_channels = std::stoi(val);
      else if (key == "cells")
        cfg.cells = val;
      else if (key == "epochs")
        cfg.epochs = std::stoi(val);
      else if (key == "lr_schedule")
        cfg.lr_schedule = parse_lr_schedule(val);
      else if (key == "batch_size")
        cfg.batch_size = std::stoi(val);
      else if (key == "momentum")
        cfg.momentum = std::stod(val);
      else if (key == "seed")
        cfg.seed = std::stoull(val);
      else if (key == "split_ratio")
        cfg.split_ratio = std::stod(val);
    } catch (const std::exception&) {
      throw std::invalid_argument("config: bad value for '" + key + "': '" + val + "'");
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  if (!file_exists(path)) throw std::invalid_argument("config not found: " + path);
  auto bytes = read_binary_file(path);
  return parse_run_config(std::string(bytes.begin(), bytes.end()));
}

std::string run_config_to_string(const RunConfig& cfg) {
  std::string s;
  s += "image_size=" + std::to_string(cfg.image_size) + "\n";
  s += "stem_channels=" + std::to_string(cfg.stem_channels) + "\n";
  s += "cells=" + cfg.cells + "\n";
  s += "epochs=" + std::to_string(cfg.epochs) + "\n";
  s += "lr_schedule=" + lr_schedule_to_string(cfg.lr_schedule) + "\n";
  s += "batch_size=" + std::to_string(cfg.batch_size) + "\n";
  s += "momentum=" + fmt_g9(cfg.momentum) + "\n";
  s += "seed=" + std::to_string(cfg.seed) + "\n";
  s += "split_ratio=" + fmt_g9(cfg.split_ratio) + "\n";
  return s;
}

}  // namespace dlac
