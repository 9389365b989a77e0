#include "vsnit/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "vsnit/checkpoint.hpp"
#include "vsnit/error.hpp"

namespace vsnit::train {

namespace {

// Stream tags for Rng::derive.
constexpr std::uint64_t kShuffleStream = 0x5348;
constexpr std::uint64_t kExampleStream = 0x4558;
constexpr std::uint64_t kDropoutStream = 0x4452;

}  // namespace

void validate(const TrainConfig& c) {
  if (!(c.lr > 0.0)) throw ConfigError("learning rate must be > 0");
  if (c.batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (!(c.beta1 >= 0.0 && c.beta1 < 1.0 && c.beta2 >= 0.0 && c.beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(c.eps > 0.0)) throw ConfigError("Adam eps must be > 0");
  if (!(c.clip_norm > 0.0)) throw ConfigError("clip norm must be > 0");
  if (!(c.partial_state_prob >= 0.0 && c.partial_state_prob <= 1.0)) {
    throw ConfigError("partial_state_prob outside [0, 1]");
  }
  if (c.epochs == 0 && c.max_steps == 0) throw ConfigError("need epochs or max_steps");
}

TrainingExample make_example(const RecoverySample& sample, std::span<const std::size_t> reinserted) {
  const auto& complete = sample.complete.activities;
  std::vector<bool> present(complete.size(), true);
  for (auto r : sample.removed_positions) present[r] = false;
  for (auto r : reinserted) {
    if (r >= complete.size()) throw IndexError("reinserted position beyond sequence");
    present[r] = true;
  }

  DaySequence partial = sample.complete.empty_copy();
  std::vector<std::size_t> anchors;
  std::vector<bool> inserted(complete.size(), false);
  for (auto r : reinserted) inserted[r] = true;
  for (std::size_t i = 0; i < complete.size(); ++i) {
    if (!present[i]) continue;
    partial.activities.push_back(inserted[i] && std::find(sample.removed_positions.begin(),
                                                          sample.removed_positions.end(), i) !=
                                                    sample.removed_positions.end()
                                     ? ActivityRecord::unobserved(complete[i].label)
                                     : complete[i]);
    anchors.push_back(i);
  }
  TrainingExample ex;
  ex.state = DecoderState::from_sequence(partial);
  const auto source = partial.labels();
  const auto target = sample.complete.labels();
  ex.targets = insertion_targets(source, target, anchors);
  return ex;
}

TrainingExample draw_example(const RecoverySample& sample, double partial_state_prob, Rng& rng) {
  std::vector<std::size_t> reinserted;
  if (!sample.removed_positions.empty() && rng.bernoulli(partial_state_prob)) {
    const double keep = rng.uniform();
    for (auto r : sample.removed_positions) {
      if (rng.bernoulli(keep)) reinserted.push_back(r);
    }
  }
  return make_example(sample, reinserted);
}

Trainer::Trainer(VsnitModel model, TrainConfig config)
    : model_(std::move(model)), config_(std::move(config)) {
  validate(config_);
  adam_ = optim::AdamState::zeros(model_.parameters());
}

Trainer Trainer::resume(const std::filesystem::path& checkpoint, TrainConfig config) {
  auto loaded = ckpt::load_checkpoint(checkpoint);
  Trainer t(std::move(loaded.model), std::move(config));
  if (loaded.counters) {
    t.step_ = loaded.counters->step;
    t.skipped_ = loaded.counters->skipped_steps;
    t.adam_ = std::move(loaded.counters->adam);
  }
  return t;
}

std::size_t Trainer::total_steps(std::size_t dataset_size) const {
  if (config_.max_steps > 0) return config_.max_steps;
  const std::size_t per_epoch = (dataset_size + config_.batch_size - 1) / config_.batch_size;
  return per_epoch * config_.epochs;
}

std::vector<std::size_t> Trainer::batch_indices(std::size_t dataset_size, std::size_t step) const {
  const std::size_t batch = std::min(config_.batch_size, dataset_size);
  const std::size_t per_epoch = (dataset_size + batch - 1) / batch;
  const std::size_t epoch = step / per_epoch;
  const std::size_t offset = (step % per_epoch) * batch;

  std::vector<std::size_t> order(dataset_size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = Rng::derive(config_.seed ^ kShuffleStream, epoch);
  rng.shuffle(order.begin(), order.end());
  const std::size_t end = std::min(dataset_size, offset + batch);
  return {order.begin() + static_cast<std::ptrdiff_t>(offset), order.begin() + static_cast<std::ptrdiff_t>(end)};
}

double Trainer::step(std::span<const RecoverySample> data) {
  if (data.empty()) throw ConfigError("training dataset is empty");
  const auto indices = batch_indices(data.size(), step_);

  std::vector<TrainingExample> examples;
  examples.reserve(indices.size());
  std::size_t longest = 0;
  for (auto i : indices) {
    Rng rng = Rng::derive(config_.seed ^ kExampleStream, step_, i);
    examples.push_back(draw_example(data[i], config_.partial_state_prob, rng));
    longest = std::max(longest, examples.back().state.tokens.size());
  }

  auto& params = model_.parameters();
  params.zero_grad();
  const double weight = 1.0 / static_cast<double>(examples.size());
  double total = 0.0;
  for (std::size_t k = 0; k < examples.size(); ++k) {
    Rng dropout_rng = Rng::derive(config_.seed ^ kDropoutStream, step_, indices[k]);
    VsnitModel::ForwardOptions options;
    options.training = true;
    options.rng = &dropout_rng;
    options.pad_to = config_.pad_batches ? longest : 0;
    const nn::Var loss = model_.insertion_loss(examples[k].state, examples[k].targets, options);
    total += loss.value()[0];
    nn::backward(loss, weight);
  }
  const double mean_loss = total * weight;

  optim::clip_global_norm(params, config_.clip_norm);
  if (!std::isfinite(mean_loss) || !optim::adam_step(params, adam_, config_.adam())) ++skipped_;
  ++step_;

  if (config_.checkpoint_interval > 0 && !config_.checkpoint_path.empty() &&
      step_ % config_.checkpoint_interval == 0) {
    save(config_.checkpoint_path);
  }
  return mean_loss;
}

TrainReport Trainer::run(std::span<const RecoverySample> data) {
  if (data.empty()) throw ConfigError("training dataset is empty");
  const auto started = std::chrono::steady_clock::now();
  TrainReport report;
  report.start_step = step_;
  const std::size_t last = total_steps(data.size());
  while (step_ < last) report.losses.push_back(step(data));
  report.final_step = step_;
  report.skipped_steps = skipped_;
  report.checksum = ckpt::parameter_checksum(model_.parameters());
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

void Trainer::save(const std::filesystem::path& path) const {
  const ckpt::TrainingCounters counters{step_, skipped_, adam_};
  ckpt::save_checkpoint(path, model_, &counters);
}

TrainResult train(std::span<const RecoverySample> data, const ModelConfig& model_config,
                  const TrainConfig& config) {
  if (data.empty()) throw ConfigError("training dataset is empty");
  Trainer trainer(VsnitModel(model_config), config);
  auto report = trainer.run(data);
  return {std::move(trainer.model()), std::move(report)};
}

}  // namespace vsnit::train
