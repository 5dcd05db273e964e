#include "dlac/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

#include "dlac/io.hpp"

namespace dlac {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& data, const std::string& path)
      : data_(data), path_(path) {}

  bool eof() const { return pos_ == data_.size(); }

  std::uint32_t u32() {
    need(4, "u32");
    std::uint32_t v = static_cast<std::uint32_t>(data_[pos_]) |
                      (static_cast<std::uint32_t>(data_[pos_ + 1]) << 8) |
                      (static_cast<std::uint32_t>(data_[pos_ + 2]) << 16) |
                      (static_cast<std::uint32_t>(data_[pos_ + 3]) << 24);
    pos_ += 4;
    return v;
  }

  float f32() { return std::bit_cast<float>(u32()); }

  std::string str(std::size_t n) {
    need(n, "string");
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  void raw(std::size_t n, std::uint8_t* dst) {
    need(n, "payload");
    std::memcpy(dst, data_.data() + pos_, n);
    pos_ += n;
  }

 private:
  void need(std::size_t n, const char* what) {
    if (data_.size() - pos_ < n)
      throw std::invalid_argument("checkpoint truncated in " + std::string(what) + ": " + path_);
  }

  const std::vector<std::uint8_t>& data_;
  std::string path_;
  std::size_t pos_ = 0;
};

std::string config_block(const ModelConfig& c) {
  std::string s;
  s += "image_size=" + std::to_string(c.image_size) + "\n";
  s += "in_channels=" + std::to_string(c.in_channels) + "\n";
  s += "stem_channels=" + std::to_string(c.stem_channels) + "\n";
  s += "cells=" + c.cells + "\n";
  s += "num_classes=" + std::to_string(c.num_classes) + "\n";
  s += "seed=" + std::to_string(c.seed) + "\n";
  if (!c.class_names.empty()) {
    s += "classes=";
    for (std::size_t i = 0; i < c.class_names.size(); ++i) {
      if (i) s += ",";
      s += c.class_names[i];
    }
    s += "\n";
  }
  return s;
}

ModelConfig parse_config_block(const std::string& text, const std::string& path) {
  ModelConfig c;
  c.class_names.clear();
  bool saw_classes = false;
  for (const auto& line : split_lines(text)) {
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("checkpoint config line without '=': " + path);
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    if (key == "image_size")
      c.image_size = std::stoi(val);
    else if (key == "in_channels")
      c.in_channels = std::stoi(val);
    else if (key == "stem_channels")
      c.stem_channels = std::stoi(val);
    else if (key == "cells")
      c.cells = val;
    else if (key == "num_classes")
      c.num_classes = std::stoi(val);
    else if (key == "seed")
      c.seed = std::stoull(val);
    else if (key == "classes") {
      for (auto& name : split_csv_line(val)) c.class_names.push_back(name);
      saw_classes = true;
    } else {
      throw std::invalid_argument("checkpoint config has unknown key '" + key + "': " + path);
    }
  }
  if (!saw_classes) c.class_names.clear();
  return c;
}

}  // namespace

std::size_t checkpoint_byte_size(const Model& model) {
  std::size_t n = 4 + 4;  // magic + version
  n += 4 + config_block(model.config()).size();
  for (const auto& [name, t] : model.params())
    n += 4 + name.size() + 4 + 4 * t.shape().size() + 4 * t.numel();
  return n;
}

void save_checkpoint(const Model& model, const std::string& path) {
  std::vector<std::uint8_t> out;
  out.reserve(checkpoint_byte_size(model));
  out.insert(out.end(), kCheckpointMagic, kCheckpointMagic + 4);
  put_u32(out, kCheckpointVersion);
  const std::string cfg = config_block(model.config());
  put_u32(out, static_cast<std::uint32_t>(cfg.size()));
  out.insert(out.end(), cfg.begin(), cfg.end());
  for (const auto& [name, t] : model.params()) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put_u32(out, static_cast<std::uint32_t>(t.shape().size()));
    for (int d : t.shape()) put_u32(out, static_cast<std::uint32_t>(d));
    for (float v : t.value()) put_f32(out, v);
  }
  write_binary_file(path, out.data(), out.size());
}

Model load_checkpoint(const std::string& path) {
  auto data = read_binary_file(path);
  Reader r(data, path);
  const std::string magic = r.str(4);
  if (magic != std::string(kCheckpointMagic, 4))
    throw std::invalid_argument("checkpoint has bad magic '" + magic + "': " + path);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw std::invalid_argument("checkpoint version " + std::to_string(version) +
                                " unsupported (want " + std::to_string(kCheckpointVersion) +
                                "): " + path);
  const std::uint32_t cfg_len = r.u32();
  ModelConfig config = parse_config_block(r.str(cfg_len), path);

  // Rebuild the architecture, then overwrite every tensor from the file. The
  // file must carry exactly the parameters the config implies, in order.
  Model model = Model::build(config);
  const auto& params = model.params();
  std::size_t idx = 0;
  while (!r.eof()) {
    if (idx >= params.size())
      throw std::invalid_argument("checkpoint has more tensors than the config defines: " + path);
    const auto& [want_name, tensor] = params[idx];
    const std::uint32_t name_len = r.u32();
    const std::string name = r.str(name_len);
    if (name != want_name)
      throw std::invalid_argument("checkpoint tensor '" + name + "' does not match expected '" +
                                  want_name + "': " + path);
    const std::uint32_t rank = r.u32();
    std::vector<int> dims(rank);
    for (auto& d : dims) d = static_cast<int>(r.u32());
    if (dims != tensor.shape())
      throw std::invalid_argument("checkpoint tensor '" + name + "' has shape " + shape_str(dims) +
                                  ", config implies " + shape_str(tensor.shape()) + ": " + path);
    Tensor t = tensor;  // shared handle; fills the model's own buffer
    auto& v = t.value_mut();
    r.raw(v.size() * 4, reinterpret_cast<std::uint8_t*>(v.data()));
    // stored little-endian; this loader assumes a little-endian host
    ++idx;
  }
  if (idx != params.size())
    throw std::invalid_argument("checkpoint is missing tensors (" + std::to_string(idx) + " of " +
                                std::to_string(params.size()) + "): " + path);
  return model;
}

}  // namespace dlac
