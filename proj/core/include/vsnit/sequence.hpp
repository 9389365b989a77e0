#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vsnit/activity.hpp"

namespace vsnit {

inline constexpr int kTimeBins = 96;     // 15-minute bins, 1..96
inline constexpr int kTravelModes = 5;   // modes 1..5
inline constexpr int kModeUnknown = 6;   // "Unknown" travel mode
inline constexpr int kStaticLevels = 5;  // tract categories 1..5
inline constexpr std::size_t kStaticCovariates = 4;
inline constexpr std::size_t kKnownCovariates = 2;    // weekday, holiday
inline constexpr std::size_t kUnknownCovariates = 4;  // arrival, departure, mode, distance

// One activity with its time-dependent unknown covariates. Activities inserted
// by the decoder carry observed == false and zeroed covariates.
struct ActivityRecord {
  Activity label = Activity::HomeActivity;
  int arrival = 0;
  int departure = 0;
  int mode = 0;
  double distance = 0.0;
  bool observed = false;

  static ActivityRecord unobserved(Activity label) { return ActivityRecord{label, 0, 0, 0, 0.0, false}; }

  bool operator==(const ActivityRecord&) const = default;
};

struct DaySequence {
  std::uint64_t person_id = 0;
  int date = 0;
  int weekday = 1;  // 1 = Monday .. 7 = Sunday
  bool holiday = false;
  std::array<int, kStaticCovariates> static_codes{1, 1, 1, 1};  // income, age, race, education
  std::vector<ActivityRecord> activities;

  std::size_t size() const noexcept { return activities.size(); }
  std::vector<Activity> labels() const;
  // Same day and person with no activities.
  DaySequence empty_copy() const;

  bool operator==(const DaySequence&) const = default;
};

// Throws ConfigError describing the first violated field constraint.
void validate(const DaySequence& seq);

struct RecoverySample {
  DaySequence complete;
  DaySequence incomplete;
  std::vector<std::size_t> removed_positions;  // sorted indices into complete

  bool operator==(const RecoverySample&) const = default;
};

// Builds a sample by deleting `removed_positions` from `complete`.
RecoverySample make_sample(DaySequence complete, std::vector<std::size_t> removed_positions);

std::string to_string(std::span<const Activity> labels);

}  // namespace vsnit
