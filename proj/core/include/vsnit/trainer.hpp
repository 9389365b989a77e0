#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vsnit/model.hpp"
#include "vsnit/optimizer.hpp"

namespace vsnit::train {

struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t batch_size = 64;
  std::size_t epochs = 10;
  std::size_t max_steps = 0;  // 0: epochs * batches-per-epoch
  double clip_norm = 1.0;
  std::uint64_t seed = 7;
  std::size_t checkpoint_interval = 0;  // steps; 0 disables periodic checkpoints
  std::string checkpoint_path;
  // Probability that a sample is trained from an intermediate decoding state in
  // which a random subset of its removed activities was already re-inserted.
  double partial_state_prob = 0.5;
  bool pad_batches = true;

  optim::AdamConfig adam() const { return {lr, beta1, beta2, eps}; }
};

void validate(const TrainConfig& config);

struct TrainReport {
  std::vector<double> losses;  // one batch-mean loss per step
  std::size_t start_step = 0;
  std::size_t final_step = 0;
  std::size_t skipped_steps = 0;
  std::string checksum;  // of the float32 parameter image
  double wall_clock_seconds = 0.0;
};

// A decoder state drawn from a sample plus the per-slot labels it still lacks.
struct TrainingExample {
  DecoderState state;
  SlotTargets targets;
};

// With reinserted empty, the state is the sample's incomplete sequence; the listed
// removed positions appear as unobserved activities.
TrainingExample make_example(const RecoverySample& sample, std::span<const std::size_t> reinserted);
TrainingExample draw_example(const RecoverySample& sample, double partial_state_prob, Rng& rng);

class Trainer {
 public:
  Trainer(VsnitModel model, TrainConfig config);

  // Continues from a checkpoint written by save(); the step counter and
  // optimizer moments are restored.
  static Trainer resume(const std::filesystem::path& checkpoint, TrainConfig config);

  std::size_t total_steps(std::size_t dataset_size) const;
  // Sample indices of the batch taken at `step` (seeded per-epoch shuffle).
  std::vector<std::size_t> batch_indices(std::size_t dataset_size, std::size_t step) const;

  // Mean per-sample loss of the batch, gradients applied unless non-finite.
  double step(std::span<const RecoverySample> data);
  TrainReport run(std::span<const RecoverySample> data);

  void save(const std::filesystem::path& path) const;

  const VsnitModel& model() const noexcept { return model_; }
  VsnitModel& model() noexcept { return model_; }
  std::size_t current_step() const noexcept { return step_; }
  std::size_t skipped_steps() const noexcept { return skipped_; }
  const optim::AdamState& optimizer_state() const noexcept { return adam_; }

 private:
  VsnitModel model_;
  TrainConfig config_;
  optim::AdamState adam_;
  std::size_t step_ = 0;
  std::size_t skipped_ = 0;
};

struct TrainResult {
  VsnitModel model;
  TrainReport report;
};

// Throws ConfigError on an empty dataset.
TrainResult train(std::span<const RecoverySample> data, const ModelConfig& model_config,
                  const TrainConfig& config);

}  // namespace vsnit::train
