#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vsnit/activity.hpp"

namespace vsnit {

// Leftmost-greedy embedding of `source` into `target`: anchor[i] is the
// smallest target index after anchor[i-1] whose label equals source[i].
// Throws AlignmentError when source is not an ordered subsequence of target.
std::vector<std::size_t> align_subsequence(std::span<const Activity> source,
                                           std::span<const Activity> target);

bool is_subsequence(std::span<const Activity> source, std::span<const Activity> target);

// Labels of `target` grouped by the source slot they fall into. Slot s lies
// between anchors s-1 and s; there are source.size() + 1 slots.
// Throws AlignmentError unless anchors are strictly increasing, in range, and
// label-matching.
std::vector<std::vector<Activity>> slot_contents(std::span<const Activity> source,
                                                 std::span<const Activity> target,
                                                 std::span<const std::size_t> anchors);

}  // namespace vsnit
