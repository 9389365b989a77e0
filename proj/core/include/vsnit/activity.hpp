#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace vsnit {

// Closed activity vocabulary; the underlying values are the label indices used
// throughout the model and the metrics.
enum class Activity : std::uint8_t {
  GoShopping = 0,
  Other = 1,
  PersonalBusiness = 2,
  GoToSchool = 3,
  Healthcare = 4,
  Recreation = 5,
  EatOut = 6,
  HomeActivity = 7,
  WorkForPay = 8,
};

inline constexpr std::size_t kNumActivities = 9;

inline constexpr std::array<std::string_view, kNumActivities> kActivityNames = {
    "GoShopping", "Other",  "PersonalBusiness", "GoToSchool", "Healthcare",
    "Recreation", "EatOut", "HomeActivity",     "WorkForPay",
};

constexpr std::size_t index_of(Activity a) { return static_cast<std::size_t>(a); }
constexpr std::string_view name_of(Activity a) { return kActivityNames[index_of(a)]; }

std::optional<Activity> activity_from_name(std::string_view name);
std::optional<Activity> activity_from_index(int index);

// Two-digit NAICS sector prefixes per category. HomeActivity and WorkForPay
// come from home/work inference and have no sector.
struct NaicsMapping {
  Activity activity;
  std::array<int, 5> sectors;
  std::size_t sector_count;
};

inline constexpr std::array<NaicsMapping, 7> kNaicsTable = {{
    {Activity::GoShopping, {42, 44, 45, 0, 0}, 3},
    {Activity::Other, {51, 53, 0, 0, 0}, 2},
    {Activity::PersonalBusiness, {52, 54, 56, 81, 92}, 5},
    {Activity::GoToSchool, {61, 0, 0, 0, 0}, 1},
    {Activity::Healthcare, {62, 0, 0, 0, 0}, 1},
    {Activity::Recreation, {71, 0, 0, 0, 0}, 1},
    {Activity::EatOut, {72, 0, 0, 0, 0}, 1},
}};

std::optional<Activity> activity_from_naics(int sector);

}  // namespace vsnit
