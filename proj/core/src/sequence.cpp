#include "vsnit/sequence.hpp"

#include <algorithm>
#include <cmath>

#include "vsnit/error.hpp"

namespace vsnit {

std::vector<Activity> DaySequence::labels() const {
  std::vector<Activity> out;
  out.reserve(activities.size());
  for (const auto& a : activities) out.push_back(a.label);
  return out;
}

DaySequence DaySequence::empty_copy() const {
  DaySequence out = *this;
  out.activities.clear();
  return out;
}

void validate(const DaySequence& seq) {
  auto fail = [&](const std::string& what) {
    throw ConfigError("person " + std::to_string(seq.person_id) + " date " +
                      std::to_string(seq.date) + ": " + what);
  };
  if (seq.weekday < 1 || seq.weekday > 7) fail("weekday outside 1..7");
  for (int code : seq.static_codes) {
    if (code < 1 || code > kStaticLevels) fail("static code outside 1..5");
  }
  for (std::size_t i = 0; i < seq.activities.size(); ++i) {
    const auto& a = seq.activities[i];
    if (index_of(a.label) >= kNumActivities) fail("unknown activity label");
    if (!std::isfinite(a.distance) || a.distance < 0.0) fail("negative or non-finite distance");
    if (!a.observed) continue;
    if (a.arrival < 1 || a.arrival > kTimeBins || a.departure < 1 || a.departure > kTimeBins) {
      fail("time bin outside 1..96 at activity " + std::to_string(i));
    }
    if (a.arrival > a.departure) fail("arrival after departure at activity " + std::to_string(i));
    if (a.mode < 1 || a.mode > kModeUnknown) fail("travel mode outside 1..6");
  }
}

RecoverySample make_sample(DaySequence complete, std::vector<std::size_t> removed_positions) {
  if (!std::is_sorted(removed_positions.begin(), removed_positions.end()) ||
      std::adjacent_find(removed_positions.begin(), removed_positions.end()) !=
          removed_positions.end()) {
    throw ConfigError("removed_positions must be strictly increasing");
  }
  if (!removed_positions.empty() && removed_positions.back() >= complete.size()) {
    throw IndexError("removed position " + std::to_string(removed_positions.back()) +
                     " beyond sequence of length " + std::to_string(complete.size()));
  }
  DaySequence incomplete = complete.empty_copy();
  std::size_t r = 0;
  for (std::size_t i = 0; i < complete.size(); ++i) {
    if (r < removed_positions.size() && removed_positions[r] == i) {
      ++r;
      continue;
    }
    incomplete.activities.push_back(complete.activities[i]);
  }
  return RecoverySample{std::move(complete), std::move(incomplete), std::move(removed_positions)};
}

std::string to_string(std::span<const Activity> labels) {
  std::string out = "[";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += ",";
    out += name_of(labels[i]);
  }
  return out + "]";
}

}  // namespace vsnit
