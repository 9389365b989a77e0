#include "vsnit/decoding.hpp"

#include "vsnit/error.hpp"

namespace vsnit {

std::size_t decode_round(DecoderState& state, const VsnitModel& model) {
  const auto choice = model.decoder_forward(state).argmax();
  std::size_t inserts = 0;
  for (auto c : choice) inserts += c != kNoInsert;
  if (inserts == 0) return 0;
  if (state.tokens.size() + inserts > model.config().max_len) {
    throw CapacityError("round would grow the sequence to " +
                        std::to_string(state.tokens.size() + inserts) + " > max_len " +
                        std::to_string(model.config().max_len));
  }

  DecoderState next = state;
  next.tokens.clear();
  next.covariates.clear();
  // Slot s sits between framed positions s and s+1.
  for (std::size_t pos = 0; pos < state.tokens.size(); ++pos) {
    next.tokens.push_back(state.tokens[pos]);
    next.covariates.push_back(state.covariates[pos]);
    if (pos < choice.size() && choice[pos] != kNoInsert) {
      const auto label = static_cast<Activity>(choice[pos]);
      next.tokens.push_back(token_of(label));
      next.covariates.push_back(ActivityRecord::unobserved(label));
    }
  }
  next.round = state.round + 1;
  state = std::move(next);
  return inserts;
}

RecoveryResult recover(const DaySequence& incomplete, const VsnitModel& model, std::size_t max_rounds) {
  DecoderState state = DecoderState::from_sequence(incomplete);
  RecoveryResult result;
  if (state.tokens.size() > model.config().max_len) {
    result.sequence = incomplete;
    result.truncated = true;
    return result;
  }
  while (state.round < max_rounds) {
    try {
      if (decode_round(state, model) == 0) break;
    } catch (const CapacityError&) {
      result.truncated = true;
      break;
    }
  }
  result.rounds = state.round;
  result.sequence = state.to_sequence(incomplete);
  return result;
}

}  // namespace vsnit
