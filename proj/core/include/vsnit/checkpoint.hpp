#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "vsnit/model.hpp"
#include "vsnit/optimizer.hpp"

// Checkpoints are a JSON manifest at `path` (config, parameter names/shapes/
// offsets, training counters) plus `path` + ".bin": little-endian float32
// values of every parameter in manifest order, then optionally the Adam first
// and second moments in the same order.
namespace vsnit::ckpt {

struct TrainingCounters {
  std::size_t step = 0;
  std::size_t skipped_steps = 0;
  optim::AdamState adam;
};

void save_checkpoint(const std::filesystem::path& path, const VsnitModel& model,
                     const TrainingCounters* counters = nullptr);

struct LoadedCheckpoint {
  VsnitModel model;
  std::optional<TrainingCounters> counters;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

// Also verifies that the structural fields of the stored configuration equal
// `expected`; mismatches raise CompatibilityError naming every differing field.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected);

std::filesystem::path blob_path(const std::filesystem::path& manifest);

// FNV-1a over the float32 little-endian image of all parameters, as hex.
std::string parameter_checksum(const nn::ParameterStore& params);

}  // namespace vsnit::ckpt
