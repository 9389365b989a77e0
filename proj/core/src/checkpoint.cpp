#include "vsnit/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json_support.hpp"
#include "vsnit/dataset_io.hpp"
#include "vsnit/error.hpp"

namespace vsnit::ckpt {

namespace {

constexpr const char* kFormat = "vsnit-checkpoint";
constexpr int kVersion = 1;

void append_f32(std::string& out, double value) {
  const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(value));
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
}

double read_f32(const std::string& blob, std::size_t index) {
  std::uint32_t bits = 0;
  for (int b = 0; b < 4; ++b) {
    bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(blob[4 * index + b])) << (8 * b);
  }
  return static_cast<double>(std::bit_cast<float>(bits));
}

void append_tensor(std::string& out, const nn::Tensor& t) {
  for (double v : t.data()) append_f32(out, v);
}

std::string to_hex(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = kDigits[v & 0xf];
  return s;
}

std::string params_image(const nn::ParameterStore& params) {
  std::string out;
  out.reserve(params.element_count() * 4);
  for (const auto& p : params) append_tensor(out, p.value());
  return out;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Structural fields decide parameter shapes; runtime knobs may differ.
std::vector<std::string> structural_mismatches(const ModelConfig& stored, const ModelConfig& expected) {
  std::vector<std::string> out;
  auto check = [&](const char* name, auto a, auto b) {
    if (a != b) {
      std::ostringstream ss;
      ss << name << " (checkpoint " << a << ", expected " << b << ")";
      out.push_back(ss.str());
    }
  };
  check("d_model", stored.d_model, expected.d_model);
  check("heads", stored.heads, expected.heads);
  check("d_attn", stored.d_attn, expected.d_attn);
  check("d_val", stored.d_val, expected.d_val);
  check("layers", stored.layers, expected.layers);
  check("use_vsn", stored.use_vsn, expected.use_vsn);
  check("static_covariates", stored.static_covariates, expected.static_covariates);
  check("known_covariates", stored.known_covariates, expected.known_covariates);
  check("unknown_covariates", stored.unknown_covariates, expected.unknown_covariates);
  return out;
}

}  // namespace

std::filesystem::path blob_path(const std::filesystem::path& manifest) {
  auto p = manifest;
  p += ".bin";
  return p;
}

std::string parameter_checksum(const nn::ParameterStore& params) {
  return "fnv1a64:" + to_hex(fnv1a(params_image(params)));
}

void save_checkpoint(const std::filesystem::path& path, const VsnitModel& model,
                     const TrainingCounters* counters) {
  const auto& params = model.parameters();
  std::string blob = params_image(params);

  detail::ordered_json manifest;
  manifest["format"] = kFormat;
  manifest["version"] = kVersion;
  manifest["config"] = detail::model_config_json(model.config());
  manifest["blob"] = blob_path(path).filename().string();
  auto entries = detail::ordered_json::array();
  std::size_t offset = 0;
  for (const auto& p : params) {
    entries.push_back({{"name", p.name()}, {"shape", p.shape()}, {"offset", offset}});
    offset += p.value().size();
  }
  manifest["parameters"] = std::move(entries);
  manifest["element_count"] = offset;
  manifest["checksum"] = parameter_checksum(params);
  if (counters) {
    if (counters->adam.m.size() != params.size() || counters->adam.v.size() != params.size()) {
      throw DimensionError("optimizer state does not match the model parameters");
    }
    for (const auto& m : counters->adam.m) append_tensor(blob, m);
    for (const auto& v : counters->adam.v) append_tensor(blob, v);
    manifest["training"] = {{"step", counters->step},
                            {"skipped_steps", counters->skipped_steps},
                            {"adam_t", counters->adam.t}};
  }
  manifest["blob_bytes"] = blob.size();

  io::write_text(blob_path(path), blob);
  io::write_text(path, manifest.dump(2) + "\n");
}

namespace {

LoadedCheckpoint load_impl(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("checkpoint not found: " + path.string());
  const auto manifest = detail::parse_document(io::read_text(path), "checkpoint manifest");
  if (!manifest.is_object() || manifest.value("format", "") != kFormat) {
    throw CompatibilityError(path.string() + " is not a checkpoint manifest");
  }
  if (manifest.value("version", 0) != kVersion) throw CompatibilityError("unsupported checkpoint version");

  const ModelConfig config = detail::model_config_from(manifest.at("config"), ModelConfig{});
  VsnitModel model(config);
  auto& params = model.parameters();

  const auto blob_file = path.parent_path() / manifest.at("blob").get<std::string>();
  const std::string blob = io::read_text(blob_file);
  if (blob.size() != manifest.at("blob_bytes").get<std::size_t>() || blob.size() % 4 != 0) {
    throw CompatibilityError("checkpoint blob size does not match manifest");
  }

  const auto& entries = manifest.at("parameters");
  if (entries.size() != params.size()) {
    throw CompatibilityError("checkpoint has " + std::to_string(entries.size()) +
                             " parameters, model expects " + std::to_string(params.size()));
  }
  std::size_t offset = 0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k];
    const auto& e = entries[k];
    if (e.at("name").get<std::string>() != p.name() || e.at("shape").get<nn::Shape>() != p.shape()) {
      throw CompatibilityError("parameter " + std::to_string(k) + " '" + e.at("name").get<std::string>() +
                               "' does not match model parameter '" + p.name() + "' " +
                               nn::shape_string(p.shape()));
    }
    if (e.at("offset").get<std::size_t>() != offset) throw CompatibilityError("parameter offsets out of order");
    auto values = p.value().data();
    if ((offset + values.size()) * 4 > blob.size()) throw CompatibilityError("checkpoint blob truncated");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = read_f32(blob, offset + i);
    offset += values.size();
  }

  LoadedCheckpoint out{std::move(model), std::nullopt};
  if (manifest.contains("training")) {
    const auto& t = manifest.at("training");
    TrainingCounters c;
    c.step = t.at("step").get<std::size_t>();
    c.skipped_steps = t.at("skipped_steps").get<std::size_t>();
    c.adam = optim::AdamState::zeros(out.model.parameters());
    c.adam.t = t.at("adam_t").get<std::uint64_t>();
    if (blob.size() != 4 * 3 * offset) throw CompatibilityError("optimizer section size mismatch");
    std::size_t cursor = offset;
    for (auto* moments : {&c.adam.m, &c.adam.v}) {
      for (auto& tensor : *moments) {
        for (auto& v : tensor.data()) v = read_f32(blob, cursor++);
      }
    }
    out.counters = std::move(c);
  } else if (blob.size() != 4 * offset) {
    throw CompatibilityError("checkpoint blob has trailing data");
  }
  return out;
}

}  // namespace

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  try {
    return load_impl(path);
  } catch (const detail::json::exception& e) {
    throw CompatibilityError(path.string() + ": malformed manifest (" + e.what() + ")");
  }
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected) {
  if (!std::filesystem::exists(path)) throw ConfigError("checkpoint not found: " + path.string());
  const auto manifest = detail::parse_document(io::read_text(path), "checkpoint manifest");
  if (!manifest.is_object() || !manifest.contains("config")) {
    throw CompatibilityError(path.string() + " is not a checkpoint manifest");
  }
  const ModelConfig stored = detail::model_config_from(manifest.at("config"), ModelConfig{});
  const auto diffs = structural_mismatches(stored, expected);
  if (!diffs.empty()) {
    std::string msg = "checkpoint configuration mismatch:";
    for (const auto& d : diffs) msg += " " + d + ";";
    throw CompatibilityError(msg);
  }
  return load_checkpoint(path);
}

}  // namespace vsnit::ckpt
