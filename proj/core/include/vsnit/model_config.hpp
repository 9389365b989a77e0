#pragma once

#include <cstddef>
#include <cstdint>

#include "vsnit/activity.hpp"

namespace vsnit {

// Decoder input tokens: the nine activities, then sentinels and padding.
using TokenId = std::uint8_t;
inline constexpr TokenId kBos = 9;
inline constexpr TokenId kEos = 10;
inline constexpr TokenId kPad = 11;
inline constexpr std::size_t kTokenVocab = 12;

// Slot output classes: the nine activities plus "nothing to insert here".
inline constexpr std::size_t kNoInsert = 9;
inline constexpr std::size_t kSlotClasses = 10;

constexpr TokenId token_of(Activity a) { return static_cast<TokenId>(index_of(a)); }
constexpr bool is_activity_token(TokenId t) { return t < kNumActivities; }

struct ModelConfig {
  std::size_t d_model = 64;
  std::size_t heads = 4;
  std::size_t d_attn = 16;  // per-head query/key width
  std::size_t d_val = 16;   // per-head value width
  std::size_t layers = 2;
  bool use_vsn = true;  // false: covariate-free baseline
  double dropout = 0.1;
  std::size_t max_rounds = 8;
  std::size_t max_len = 32;  // framed length cap, sentinels included
  std::size_t static_covariates = 4;
  std::size_t known_covariates = 2;
  std::size_t unknown_covariates = 4;
  std::uint64_t init_seed = 1;

  std::size_t covariate_count() const {
    return static_covariates + known_covariates + unknown_covariates;
  }
  // Time-dependent input streams fed to variable selection (token stream included).
  std::size_t stream_count() const { return use_vsn ? 1 + known_covariates + unknown_covariates : 1; }

  static ModelConfig baseline() {
    ModelConfig c;
    c.use_vsn = false;
    return c;
  }

  bool operator==(const ModelConfig&) const = default;
};

// Throws ConfigError when widths are zero, the covariate schema differs from the
// supported one (4 static, 2 known, 4 unknown) or the dropout rate is outside [0, 1).
void validate(const ModelConfig& config);

}  // namespace vsnit
