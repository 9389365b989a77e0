#pragma once

#include <cstddef>

#include "vsnit/model.hpp"

namespace vsnit {

struct RecoveryResult {
  DaySequence sequence;
  std::size_t rounds = 0;
  bool truncated = false;  // stopped because the next round would exceed max_len
};

// One parallel insertion round: every slot whose argmax is an activity receives
// it (unobserved covariates). Returns the number of insertions; 0 leaves the
// state untouched. Throws CapacityError if the result would exceed max_len.
std::size_t decode_round(DecoderState& state, const VsnitModel& model);

// Iterative recovery until every slot predicts NO_INSERT or max_rounds rounds ran.
// Input activities are never moved or removed.
RecoveryResult recover(const DaySequence& incomplete, const VsnitModel& model, std::size_t max_rounds);
inline RecoveryResult recover(const DaySequence& incomplete, const VsnitModel& model) {
  return recover(incomplete, model, model.config().max_rounds);
}

}  // namespace vsnit
