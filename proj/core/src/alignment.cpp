#include "vsnit/alignment.hpp"

#include <string>

#include "vsnit/error.hpp"
#include "vsnit/sequence.hpp"

namespace vsnit {

std::vector<std::size_t> align_subsequence(std::span<const Activity> source,
                                           std::span<const Activity> target) {
  std::vector<std::size_t> anchors;
  anchors.reserve(source.size());
  std::size_t t = 0;
  for (Activity label : source) {
    while (t < target.size() && target[t] != label) ++t;
    if (t == target.size()) {
      throw AlignmentError(to_string(source) + " is not a subsequence of " + to_string(target));
    }
    anchors.push_back(t++);
  }
  return anchors;
}

bool is_subsequence(std::span<const Activity> source, std::span<const Activity> target) {
  std::size_t t = 0;
  for (Activity label : source) {
    while (t < target.size() && target[t] != label) ++t;
    if (t == target.size()) return false;
    ++t;
  }
  return true;
}

std::vector<std::vector<Activity>> slot_contents(std::span<const Activity> source,
                                                 std::span<const Activity> target,
                                                 std::span<const std::size_t> anchors) {
  if (anchors.size() != source.size()) {
    throw AlignmentError("expected " + std::to_string(source.size()) + " anchors, got " +
                         std::to_string(anchors.size()));
  }
  std::vector<std::vector<Activity>> slots(source.size() + 1);
  std::size_t next = 0;  // first target index not yet assigned
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const std::size_t a = anchors[i];
    if (a >= target.size() || a < next || target[a] != source[i]) {
      throw AlignmentError("invalid anchor " + std::to_string(a) + " for source position " +
                           std::to_string(i));
    }
    slots[i].assign(target.begin() + static_cast<std::ptrdiff_t>(next),
                    target.begin() + static_cast<std::ptrdiff_t>(a));
    next = a + 1;
  }
  slots.back().assign(target.begin() + static_cast<std::ptrdiff_t>(next), target.end());
  return slots;
}

}  // namespace vsnit
