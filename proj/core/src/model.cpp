#include "vsnit/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vsnit/alignment.hpp"
#include "vsnit/error.hpp"

namespace vsnit {

using nn::Tensor;
using nn::Var;

void validate(const ModelConfig& c) {
  if (c.d_model == 0 || c.heads == 0 || c.d_attn == 0 || c.d_val == 0 || c.layers == 0) {
    throw ConfigError("model widths, heads and layers must be positive");
  }
  if (c.heads * c.d_attn > 4096 || c.heads * c.d_val > 4096 || c.d_model > 4096) {
    throw ConfigError("attention widths exceed 4096");
  }
  if (c.static_covariates != kStaticCovariates || c.known_covariates != kKnownCovariates ||
      c.unknown_covariates != kUnknownCovariates) {
    throw ConfigError("covariate schema must be 4 static, 2 known, 4 unknown (N_c = 10)");
  }
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw ConfigError("dropout outside [0, 1)");
  if (c.max_len < 2) throw ConfigError("max_len must leave room for both sentinels");
}

DecoderState DecoderState::from_sequence(const DaySequence& seq) {
  DecoderState s;
  s.weekday = seq.weekday;
  s.holiday = seq.holiday;
  s.static_codes = seq.static_codes;
  s.tokens.push_back(kBos);
  s.covariates.push_back(ActivityRecord{});
  for (const auto& a : seq.activities) {
    s.tokens.push_back(token_of(a.label));
    s.covariates.push_back(a);
  }
  s.tokens.push_back(kEos);
  s.covariates.push_back(ActivityRecord{});
  return s;
}

DaySequence DecoderState::to_sequence(const DaySequence& day) const {
  DaySequence out = day.empty_copy();
  for (std::size_t i = 1; i + 1 < tokens.size(); ++i) {
    ActivityRecord rec = covariates[i];
    rec.label = static_cast<Activity>(tokens[i]);
    out.activities.push_back(rec);
  }
  return out;
}

std::vector<Activity> DecoderState::labels() const {
  std::vector<Activity> out;
  for (std::size_t i = 1; i + 1 < tokens.size(); ++i) out.push_back(static_cast<Activity>(tokens[i]));
  return out;
}

void DecoderState::check() const {
  if (tokens.size() < 2 || tokens.front() != kBos || tokens.back() != kEos) {
    throw ContractError("decoder state must be framed by BOS/EOS");
  }
  if (covariates.size() != tokens.size()) throw ContractError("covariates not aligned with tokens");
  for (std::size_t i = 1; i + 1 < tokens.size(); ++i) {
    if (!is_activity_token(tokens[i])) throw ContractError("sentinel inside decoder state");
  }
}

std::vector<std::size_t> SlotDistribution::argmax() const {
  std::vector<std::size_t> out;
  out.reserve(slots.size());
  for (const auto& p : slots) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < kSlotClasses; ++c) {
      if (p[c] > p[best]) best = c;
    }
    out.push_back(best);
  }
  return out;
}

SlotTargets insertion_targets(std::span<const Activity> incomplete, std::span<const Activity> complete,
                              std::span<const std::size_t> anchors) {
  return slot_contents(incomplete, complete, anchors);
}

Tensor target_distribution(const SlotTargets& targets) {
  if (targets.empty()) throw DimensionError("no slots to build targets for");
  Tensor t({targets.size(), kSlotClasses}, 0.0);
  for (std::size_t s = 0; s < targets.size(); ++s) {
    if (targets[s].empty()) {
      t.at(s, kNoInsert) = 1.0;
      continue;
    }
    const double w = 1.0 / static_cast<double>(targets[s].size());
    for (Activity a : targets[s]) t.at(s, index_of(a)) += w;
  }
  return t;
}

namespace {

nn::Parameter make_table(nn::ParameterStore& store, const std::string& name, std::size_t rows,
                         std::size_t width, double stddev, Rng& rng) {
  Tensor t({rows, width});
  for (auto& v : t.data()) v = stddev * rng.normal();
  return store.add(name, std::move(t));
}

std::size_t checked_code(int code, int lo, int hi, const char* what) {
  if (code < lo || code > hi) {
    throw VocabularyError(std::string(what) + " code " + std::to_string(code) + " outside " +
                          std::to_string(lo) + ".." + std::to_string(hi));
  }
  return static_cast<std::size_t>(code);
}

}  // namespace

VsnitModel::VsnitModel(ModelConfig config) : config_(config) {
  validate(config_);
  Rng rng(config_.init_seed);
  const std::size_t d = config_.d_model;
  token_embedding_ = make_table(params_, "embed.token", kTokenVocab, d, 1.0, rng);
  if (config_.use_vsn) {
    Embeddings e;
    // Row 0 of the unknown-covariate tables is the MISSING embedding.
    e.arrival = make_table(params_, "embed.arrival", kTimeBins + 1, d, 0.5, rng);
    e.departure = make_table(params_, "embed.departure", kTimeBins + 1, d, 0.5, rng);
    e.mode = make_table(params_, "embed.mode", kModeUnknown + 1, d, 0.5, rng);
    e.distance_w = layers::make_weight(params_, "embed.distance.w", 1, d, rng);
    e.distance_b = layers::make_bias(params_, "embed.distance.b", d);
    e.distance_flag = make_table(params_, "embed.distance.flag", 2, d, 0.5, rng);
    e.weekday = make_table(params_, "embed.weekday", 7, d, 0.5, rng);
    e.holiday = make_table(params_, "embed.holiday", 2, d, 0.5, rng);
    static constexpr std::array<const char*, kStaticCovariates> kStaticNames{"income", "age", "race",
                                                                              "education"};
    for (std::size_t i = 0; i < kStaticCovariates; ++i) {
      e.static_tables[i] = make_table(params_, std::string("static.embed.") + kStaticNames[i],
                                      kStaticLevels, d, 0.5, rng);
    }
    covariate_embeddings_ = e;
    static_grn_ = layers::Grn::create(params_, "static.grn", {d, d, d, 0}, rng);
    vsn_ = layers::Vsn::create(params_, "vsn", config_.stream_count(), d, d, rng);
  }
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const std::string p = "layer" + std::to_string(l);
    Block b{layers::MultiHeadAttention::create(params_, p + ".attn", d, config_.heads, config_.d_attn,
                                               config_.d_val, rng),
            layers::make_bias(params_, p + ".attn_ln.gain", d, 1.0),
            layers::make_bias(params_, p + ".attn_ln.bias", d, 0.0),
            layers::Grn::create(params_, p + ".ff", {d, d, d, 0}, rng)};
    blocks_.push_back(std::move(b));
  }
  slot_w_ = layers::make_weight(params_, "head.slot.w", 2 * d, d, rng);
  slot_b_ = layers::make_bias(params_, "head.slot.b", d);
  out_w_ = layers::make_weight(params_, "head.out.w", d, kSlotClasses, rng);
  out_b_ = layers::make_bias(params_, "head.out.b", kSlotClasses);
}

std::vector<Var> VsnitModel::encode_streams(const DecoderState& state, std::size_t pad_to) const {
  const std::size_t n = state.tokens.size();
  const std::size_t rows = std::max(n, pad_to);
  const std::size_t d = config_.d_model;

  std::vector<std::size_t> token_idx(rows, kPad);
  for (std::size_t i = 0; i < n; ++i) token_idx[i] = state.tokens[i];
  std::vector<Var> streams;
  streams.push_back(nn::add(nn::embed_rows(token_embedding_, token_idx),
                            Var::constant(layers::positional_encoding(rows, d))));
  if (!config_.use_vsn) return streams;

  const auto& e = *covariate_embeddings_;
  std::vector<std::size_t> arr(rows, 0), dep(rows, 0), mode(rows, 0), flag(rows, 1);
  Tensor dist({rows, 1}, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = state.covariates[i];
    if (!c.observed) continue;
    arr[i] = checked_code(c.arrival, 1, kTimeBins, "arrival bin");
    dep[i] = checked_code(c.departure, 1, kTimeBins, "departure bin");
    mode[i] = checked_code(c.mode, 1, kModeUnknown, "travel mode");
    if (!(c.distance >= 0.0)) throw VocabularyError("negative trip distance");
    dist.at(i, 0) = std::log1p(c.distance);
    flag[i] = 0;
  }
  const std::size_t weekday = checked_code(state.weekday, 1, 7, "weekday") - 1;
  const std::vector<std::size_t> weekday_idx(rows, weekday);
  const std::vector<std::size_t> holiday_idx(rows, state.holiday ? 1 : 0);

  streams.push_back(nn::embed_rows(e.arrival, arr));
  streams.push_back(nn::embed_rows(e.departure, dep));
  streams.push_back(nn::embed_rows(e.mode, mode));
  streams.push_back(nn::add(nn::linear(Var::constant(std::move(dist)), e.distance_w, e.distance_b),
                            nn::embed_rows(e.distance_flag, flag)));
  streams.push_back(nn::embed_rows(e.weekday, weekday_idx));
  streams.push_back(nn::embed_rows(e.holiday, holiday_idx));
  return streams;
}

std::vector<Var> VsnitModel::encode_position_covariates(const DecoderState& state,
                                                        std::size_t position) const {
  if (position >= state.tokens.size()) throw IndexError("position beyond decoder state");
  auto streams = encode_streams(state);
  for (auto& s : streams) s = nn::slice_rows(s, position, 1);
  return streams;
}

Var VsnitModel::static_context(const std::array<int, kStaticCovariates>& codes) const {
  if (!config_.use_vsn) throw ConfigError("baseline model has no static context");
  const auto& e = *covariate_embeddings_;
  Var total;
  for (std::size_t i = 0; i < kStaticCovariates; ++i) {
    const Var row = nn::embed_lookup(e.static_tables[i], checked_code(codes[i], 1, kStaticLevels, "static") - 1);
    total = total.valid() ? nn::add(total, row) : row;
  }
  return static_grn_->forward(total);
}

VsnitModel::Forward VsnitModel::forward(const DecoderState& state, const ForwardOptions& options) const {
  state.check();
  const std::size_t n = state.tokens.size();
  if (n > config_.max_len) {
    throw CapacityError("decoder state of length " + std::to_string(n) + " exceeds max_len " +
                        std::to_string(config_.max_len));
  }
  const bool train = options.training && config_.dropout > 0.0;
  if (train && !options.rng) throw ConfigError("training forward needs an rng for dropout");
  const std::size_t rows = std::max(n, options.pad_to);

  Forward out;
  const auto streams = encode_streams(state, rows);
  Var x;
  if (config_.use_vsn) {
    const Var cs = static_context(state.static_codes);
    auto fused = vsn_->forward(streams, &cs);
    x = fused.fused;
    out.selection = fused.weights;
  } else {
    x = streams[0];
  }
  if (train) x = nn::dropout(x, config_.dropout, *options.rng);

  std::vector<bool> key_mask(rows, false);
  std::fill_n(key_mask.begin(), n, true);
  for (const auto& block : blocks_) {
    Var a = block.attn.forward(x, key_mask);
    if (train) a = nn::dropout(a, config_.dropout, *options.rng);
    x = nn::layer_norm(nn::add(x, a), block.ln_gain, block.ln_bias);
    x = block.feed_forward.forward(x);
  }

  const Var pair[] = {nn::slice_rows(x, 0, rows - 1), nn::slice_rows(x, 1, rows - 1)};
  const Var slot = nn::elu(nn::linear(nn::concat_cols(pair), slot_w_, slot_b_));
  out.logits = nn::linear(slot, out_w_, out_b_);
  out.valid_slots = n - 1;
  return out;
}

SlotDistribution VsnitModel::decoder_forward(const DecoderState& state) const {
  nn::NoGradGuard no_grad;
  const auto f = forward(state);
  const Var probs = nn::softmax(nn::slice_rows(f.logits, 0, f.valid_slots), 1);
  SlotDistribution dist;
  dist.slots.resize(f.valid_slots);
  for (std::size_t s = 0; s < f.valid_slots; ++s)
    for (std::size_t c = 0; c < kSlotClasses; ++c) dist.slots[s][c] = probs.value().at(s, c);
  return dist;
}

Tensor VsnitModel::selection_weights(const DecoderState& state) const {
  if (!config_.use_vsn) throw ConfigError("baseline model has no variable selection");
  nn::NoGradGuard no_grad;
  return forward(state).selection.value();
}

Var VsnitModel::insertion_loss(const DecoderState& state, const SlotTargets& targets,
                               const ForwardOptions& options) const {
  const auto f = forward(state, options);
  if (targets.size() != f.valid_slots) {
    throw DimensionError("expected targets for " + std::to_string(f.valid_slots) + " slots, got " +
                         std::to_string(targets.size()));
  }
  const Var logp = nn::log_softmax_rows(nn::slice_rows(f.logits, 0, f.valid_slots));
  const Var weighted = nn::mul(Var::constant(target_distribution(targets)), logp);
  return nn::scale(nn::sum(weighted), -1.0 / static_cast<double>(f.valid_slots));
}

}  // namespace vsnit
