#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "vsnit/generator.hpp"
#include "vsnit/model_config.hpp"
#include "vsnit/trainer.hpp"

// JSON documents mirroring the configuration structs. Parsing overlays the
// fields present in the document onto `base`; unknown keys are rejected.
namespace vsnit::config {

std::string to_json(const GeneratorConfig& c);
std::string to_json(const ModelConfig& c);
std::string to_json(const train::TrainConfig& c);

GeneratorConfig parse_generator_config(std::string_view text,
                                       GeneratorConfig base = GeneratorConfig::defaults());
ModelConfig parse_model_config(std::string_view text, ModelConfig base = {});
train::TrainConfig parse_train_config(std::string_view text, train::TrainConfig base = {});

GeneratorConfig load_generator_config(const std::filesystem::path& path);

}  // namespace vsnit::config
