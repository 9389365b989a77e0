#include "vsnit/activity.hpp"

namespace vsnit {

std::optional<Activity> activity_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNumActivities; ++i) {
    if (kActivityNames[i] == name) return static_cast<Activity>(i);
  }
  return std::nullopt;
}

std::optional<Activity> activity_from_index(int index) {
  if (index < 0 || index >= static_cast<int>(kNumActivities)) return std::nullopt;
  return static_cast<Activity>(index);
}

std::optional<Activity> activity_from_naics(int sector) {
  for (const auto& row : kNaicsTable) {
    for (std::size_t i = 0; i < row.sector_count; ++i) {
      if (row.sectors[i] == sector) return row.activity;
    }
  }
  return std::nullopt;
}

}  // namespace vsnit
