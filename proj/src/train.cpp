#include "dlac/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dlac/io.hpp"
#include "dlac/parallel.hpp"

namespace dlac {

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (momentum < 0.0 || momentum >= 1.0)
    throw std::invalid_argument("train: momentum must be in [0, 1)");
  if (threads < 1) throw std::invalid_argument("train: threads must be >= 1");
  if (lr_schedule.empty()) throw std::invalid_argument("train: empty lr schedule");
  if (lr_schedule.front().from_epoch != 0)
    throw std::invalid_argument("train: lr schedule must start at epoch 0");
  for (std::size_t i = 0; i < lr_schedule.size(); ++i) {
    if (lr_schedule[i].lr <= 0.0) throw std::invalid_argument("train: learning rates must be positive");
    if (i > 0 && lr_schedule[i].from_epoch <= lr_schedule[i - 1].from_epoch)
      throw std::invalid_argument("train: lr schedule epochs must be strictly increasing");
    if (lr_schedule[i].from_epoch >= epochs)
      throw std::invalid_argument("train: lr phase at epoch " +
                                  std::to_string(lr_schedule[i].from_epoch) +
                                  " is outside [0, " + std::to_string(epochs) + ")");
  }
}

double TrainConfig::lr_at(int epoch) const {
  double lr = lr_schedule.front().lr;
  for (const auto& p : lr_schedule)
    if (epoch >= p.from_epoch) lr = p.lr;
  return lr;
}

std::vector<LrPhase> parse_lr_schedule(const std::string& text) {
  std::vector<LrPhase> out;
  for (const auto& part : split_csv_line(text)) {
    auto colon = part.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("lr schedule entry '" + part + "' is not epoch:lr");
    try {
      out.push_back({std::stoi(part.substr(0, colon)), std::stod(part.substr(colon + 1))});
    } catch (const std::exception&) {
      throw std::invalid_argument("lr schedule entry '" + part + "' is not epoch:lr");
    }
  }
  if (out.empty()) throw std::invalid_argument("empty lr schedule");
  return out;
}

std::string lr_schedule_to_string(const std::vector<LrPhase>& phases) {
  std::string s;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(phases[i].from_epoch) + ":" + fmt_g9(phases[i].lr);
  }
  return s;
}

void stratified_split(Dataset& ds, double train_ratio, std::uint64_t seed) {
  if (train_ratio <= 0.0 || train_ratio >= 1.0)
    throw std::invalid_argument("split ratio must be in (0, 1)");
  std::vector<std::vector<int>> per_class(ds.class_names.size());
  for (std::size_t i = 0; i < ds.items.size(); ++i)
    per_class[static_cast<std::size_t>(ds.items[i].label)].push_back(static_cast<int>(i));
  Rng rng(mix64(seed, 0x73706c6974ull));  // split stream
  for (auto& idx : per_class) {
    rng.shuffle(idx);
    const int train_n = std::max(1, static_cast<int>(idx.size() * train_ratio));
    for (std::size_t j = 0; j < idx.size(); ++j)
      ds.items[static_cast<std::size_t>(idx[j])].split =
          static_cast<int>(j) < train_n ? Split::kTrain : Split::kTest;
  }
}

PreparedData prepare(const Dataset& ds, int image_size, int threads) {
  PreparedData out;
  out.num_classes = ds.num_classes();
  out.class_names = ds.class_names;

  std::vector<PreparedSample> all(ds.items.size());
  parallel_for(static_cast<int>(ds.items.size()), threads, [&](int i) {
    const auto& item = ds.items[static_cast<std::size_t>(i)];
    ImageSample img = load_image(ds.resolve(item));
    auto& slot = all[static_cast<std::size_t>(i)];
    slot.input = preprocess(img, image_size);
    slot.label = item.label;
    slot.path = item.path;
    slot.view = item.view;
    slot.source = item.source;
  });
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (ds.items[i].split == Split::kTrain)
      out.train.push_back(std::move(all[i]));
    else
      out.test.push_back(std::move(all[i]));
  }
  return out;
}

namespace {

struct SampleResult {
  std::vector<float> grads;  // flattened across parameters, fixed layout
  double loss = 0.0;
  bool top1_hit = false;
};

struct EvalResult {
  double loss = 0.0;
  bool top1_hit = false;
};

// Argmax with ascending-index tie break.
int argmax_class(const std::vector<float>& logits) {
  int best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i)
    if (logits[i] > logits[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return best;
}

}  // namespace

TrainResult train(Model& model, const PreparedData& data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (data.train.empty()) throw std::invalid_argument("train: empty training split");
  {
    std::vector<int> counts(static_cast<std::size_t>(data.num_classes), 0);
    for (const auto& s : data.train) counts[static_cast<std::size_t>(s.label)]++;
    for (std::size_t c = 0; c < counts.size(); ++c)
      if (counts[c] == 0)
        throw std::invalid_argument("train: class '" + data.class_names[c] +
                                    "' has no samples in the training split");
  }

  auto params = model.param_tensors();
  std::vector<std::size_t> offsets(params.size() + 1, 0);
  for (std::size_t i = 0; i < params.size(); ++i) offsets[i + 1] = offsets[i] + params[i].numel();
  const std::size_t total_params = offsets.back();

  Sgd opt(params);
  TrainResult result;

  std::vector<int> order(data.train.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.lr_at(epoch);
    Rng shuffle_rng(mix64(cfg.seed, 0x65706f6368ull, static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    long top1_hits = 0;

    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const int bsz = static_cast<int>(
          std::min(static_cast<std::size_t>(cfg.batch_size), order.size() - start));

      std::vector<SampleResult> results(static_cast<std::size_t>(bsz));
      parallel_for(bsz, cfg.threads, [&](int bi) {
        const auto& sample = data.train[static_cast<std::size_t>(order[start + static_cast<std::size_t>(bi)])];
        auto fwd = model.forward(sample.input);
        auto loss = softmax_cross_entropy(fwd.logits, sample.label);
        auto gm = loss.backward_collect();

        auto& res = results[static_cast<std::size_t>(bi)];
        res.loss = loss.item();
        res.top1_hit = argmax_class(fwd.logits.value()) == sample.label;
        res.grads.assign(total_params, 0.0f);
        for (std::size_t pi = 0; pi < params.size(); ++pi) {
          auto it = gm.find(params[pi].raw());
          if (it == gm.end()) continue;
          std::copy(it->second.begin(), it->second.end(), res.grads.begin() +
                    static_cast<std::ptrdiff_t>(offsets[pi]));
        }
      });

      // Fixed-order reduction: ascending sample index, then a single 1/B
      // scale. Identical arithmetic regardless of thread count.
      std::vector<float> grad_sum(total_params, 0.0f);
      for (int bi = 0; bi < bsz; ++bi) {
        const auto& g = results[static_cast<std::size_t>(bi)].grads;
        for (std::size_t j = 0; j < total_params; ++j) grad_sum[j] += g[j];
        loss_sum += results[static_cast<std::size_t>(bi)].loss;
        top1_hits += results[static_cast<std::size_t>(bi)].top1_hit ? 1 : 0;
      }
      const float inv_b = 1.0f / static_cast<float>(bsz);
      for (std::size_t pi = 0; pi < params.size(); ++pi) {
        auto& g = params[pi].grad_mut();
        for (std::size_t j = 0; j < g.size(); ++j) g[j] = grad_sum[offsets[pi] + j] * inv_b;
      }
      opt.step(static_cast<float>(lr), static_cast<float>(cfg.momentum));
    }

    // test-split evaluation
    double test_loss = 0.0;
    long test_hits = 0;
    if (!data.test.empty()) {
      std::vector<EvalResult> evals(data.test.size());
      parallel_for(static_cast<int>(data.test.size()), cfg.threads, [&](int i) {
        const auto& sample = data.test[static_cast<std::size_t>(i)];
        auto fwd = model.forward(sample.input);
        auto loss = softmax_cross_entropy(fwd.logits, sample.label);
        evals[static_cast<std::size_t>(i)] = {loss.item(),
                                              argmax_class(fwd.logits.value()) == sample.label};
      });
      for (const auto& e : evals) {
        test_loss += e.loss;
        test_hits += e.top1_hit ? 1 : 0;
      }
      test_loss /= static_cast<double>(data.test.size());
    }

    EpochStats st;
    st.epoch = epoch;
    st.lr = lr;
    st.train_loss = loss_sum / static_cast<double>(data.train.size());
    st.train_top1 = 100.0 * static_cast<double>(top1_hits) / static_cast<double>(data.train.size());
    st.test_loss = test_loss;
    st.test_top1 = data.test.empty()
                       ? 0.0
                       : 100.0 * static_cast<double>(test_hits) / static_cast<double>(data.test.size());
    result.history.push_back(st);
    if (on_epoch) on_epoch(st);
  }
  return result;
}

std::string history_csv(const TrainResult& result) {
  std::string s = "epoch,lr,train_loss,train_top1,test_top1\n";
  for (const auto& e : result.history) {
    s += std::to_string(e.epoch) + "," + fmt_g9(e.lr) + "," + fmt_g9(e.train_loss) + "," +
         fmt_pct2(e.train_top1) + "," + fmt_pct2(e.test_top1) + "\n";
  }
  return s;
}

}  // namespace dlac
