#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "vsnit/rng.hpp"
#include "vsnit/sequence.hpp"

namespace vsnit {

using TransitionMatrix = std::array<std::array<double, kNumActivities>, kNumActivities>;
using LabelDistribution = std::array<double, kNumActivities>;

enum class Regime { Weekday = 0, Weekend = 1, Holiday = 2 };
inline constexpr std::size_t kNumRegimes = 3;

Regime regime_of(int weekday, bool holiday);

struct RegimeModel {
  LabelDistribution initial{};
  TransitionMatrix transitions{};
};

// Inclusive range of stay durations in 15-minute bins.
struct DurationRange {
  int min_bins = 2;
  int max_bins = 4;
};

struct GeneratorConfig {
  std::uint64_t seed = 2020;
  std::size_t population = 1000;  // person-days
  int days_per_person = 7;
  int month_days = 31;
  int first_weekday = 3;  // weekday of date 0
  std::vector<int> holiday_dates{0, 19};
  std::array<RegimeModel, kNumRegimes> regimes{};
  std::array<DurationRange, kNumActivities> durations{};
  double p_remove = 0.3;
  double target_mean_activities = 4.49;
  int max_activities = 16;

  // Weekday mornings favor WorkForPay after HomeActivity, weekends favor Recreation.
  static GeneratorConfig defaults();

  const RegimeModel& regime(Regime r) const { return regimes[static_cast<std::size_t>(r)]; }
};

// Throws ConfigError on malformed probabilities or ranges.
void validate(const GeneratorConfig& config);

std::vector<DaySequence> generate_population(const GeneratorConfig& config, std::uint64_t seed);

// Removes each position independently with probability p_remove.
RecoverySample mask_sequence(const DaySequence& complete, double p_remove, Rng& rng);

// Population plus masking, each person-day on its own derived stream.
std::vector<RecoverySample> generate_samples(const GeneratorConfig& config, std::uint64_t seed);

}  // namespace vsnit
