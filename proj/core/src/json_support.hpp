#pragma once

// nlohmann/json bindings shared by the core translation units. Not installed.

#include <string>

#include "json.hpp"
#include "vsnit/generator.hpp"
#include "vsnit/model_config.hpp"
#include "vsnit/trainer.hpp"

namespace vsnit::detail {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

ordered_json model_config_json(const ModelConfig& c);
ModelConfig model_config_from(const json& j, ModelConfig base);

ordered_json generator_config_json(const GeneratorConfig& c);
GeneratorConfig generator_config_from(const json& j, GeneratorConfig base);

ordered_json train_config_json(const train::TrainConfig& c);
train::TrainConfig train_config_from(const json& j, train::TrainConfig base);

json parse_document(std::string_view text, const std::string& what);

}  // namespace vsnit::detail
