#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "vsnit/layers.hpp"
#include "vsnit/model_config.hpp"
#include "vsnit/sequence.hpp"

namespace vsnit {

// A partial sequence during decoding, framed as BOS a_1 .. a_n EOS. `covariates`
// is aligned with `tokens`; sentinels and inserted activities are unobserved.
struct DecoderState {
  std::vector<TokenId> tokens;
  std::vector<ActivityRecord> covariates;
  int weekday = 1;
  bool holiday = false;
  std::array<int, kStaticCovariates> static_codes{1, 1, 1, 1};
  std::size_t round = 0;

  static DecoderState from_sequence(const DaySequence& seq);
  // Copies the activities back onto `day`'s person/date fields.
  DaySequence to_sequence(const DaySequence& day) const;

  std::size_t activity_count() const { return tokens.size() - 2; }
  std::size_t slot_count() const { return tokens.size() - 1; }
  std::vector<Activity> labels() const;

  // Throws ContractError unless sentinels frame the sequence and nowhere else.
  void check() const;
};

// Per slot probabilities over the nine activities followed by NO_INSERT.
struct SlotDistribution {
  std::vector<std::array<double, kSlotClasses>> slots;

  // Highest-probability class per slot; ties go to the lowest index.
  std::vector<std::size_t> argmax() const;
};

// Required labels per slot; an empty multiset means NO_INSERT.
using SlotTargets = std::vector<std::vector<Activity>>;

// Slot s collects the complete-sequence labels strictly between anchors s-1 and s.
SlotTargets insertion_targets(std::span<const Activity> incomplete,
                              std::span<const Activity> complete,
                              std::span<const std::size_t> anchors);

// Row-stochastic target matrix [slots x kSlotClasses]: uniform over each slot's
// required labels (multiplicity counts) or one-hot NO_INSERT.
nn::Tensor target_distribution(const SlotTargets& targets);

struct ForwardOptions {
  bool training = false;    // enables dropout, requires rng
  Rng* rng = nullptr;
  std::size_t pad_to = 0;   // pad the framed sequence to this many positions
};

class VsnitModel {
 public:
  explicit VsnitModel(ModelConfig config);

  const ModelConfig& config() const noexcept { return config_; }
  nn::ParameterStore& parameters() noexcept { return params_; }
  const nn::ParameterStore& parameters() const noexcept { return params_; }

  using ForwardOptions = vsnit::ForwardOptions;

  struct Forward {
    nn::Var logits;       // [padded_len - 1 x kSlotClasses]
    nn::Var selection;    // [padded_len x streams]; invalid in baseline mode
    std::size_t valid_slots = 0;
  };

  Forward forward(const DecoderState& state, const ForwardOptions& options = {}) const;

  // Inference: slot distributions, dropout off, no tape.
  SlotDistribution decoder_forward(const DecoderState& state) const;
  // Variable selection weights per framed position [len x streams]; VSN only.
  nn::Tensor selection_weights(const DecoderState& state) const;

  // Mean over slots of the cross-entropy against target_distribution(targets).
  nn::Var insertion_loss(const DecoderState& state, const SlotTargets& targets,
                         const ForwardOptions& options = {}) const;

  // Input streams for every framed position (padded to `pad_to`), each [rows x d_model]:
  // token, arrival, departure, mode, distance, weekday, holiday. Baseline: token only.
  std::vector<nn::Var> encode_streams(const DecoderState& state, std::size_t pad_to = 0) const;
  std::vector<nn::Var> encode_position_covariates(const DecoderState& state, std::size_t position) const;
  // Embeds the four static codes, sums them and passes the GRN; [1 x d_model].
  nn::Var static_context(const std::array<int, kStaticCovariates>& codes) const;

  const layers::Grn& static_grn() const { return *static_grn_; }
  const layers::Vsn& vsn() const { return *vsn_; }
  const layers::MultiHeadAttention& attention(std::size_t layer) const { return blocks_[layer].attn; }

 private:
  struct Block {
    layers::MultiHeadAttention attn;
    nn::Parameter ln_gain, ln_bias;
    layers::Grn feed_forward;
  };

  struct Embeddings {
    nn::Parameter arrival, departure, mode, weekday, holiday;
    nn::Parameter distance_w, distance_b, distance_flag;
    std::array<nn::Parameter, kStaticCovariates> static_tables;
  };

  ModelConfig config_;
  nn::ParameterStore params_;
  nn::Parameter token_embedding_;
  std::optional<Embeddings> covariate_embeddings_;
  std::optional<layers::Grn> static_grn_;
  std::optional<layers::Vsn> vsn_;
  std::vector<Block> blocks_;
  nn::Parameter slot_w_, slot_b_, out_w_, out_b_;
};

}  // namespace vsnit
