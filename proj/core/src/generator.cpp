#include "vsnit/generator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vsnit/error.hpp"

namespace vsnit {

namespace {

constexpr std::size_t kShop = index_of(Activity::GoShopping);
constexpr std::size_t kOther = index_of(Activity::Other);
constexpr std::size_t kBusiness = index_of(Activity::PersonalBusiness);
constexpr std::size_t kSchool = index_of(Activity::GoToSchool);
constexpr std::size_t kHealth = index_of(Activity::Healthcare);
constexpr std::size_t kRec = index_of(Activity::Recreation);
constexpr std::size_t kEat = index_of(Activity::EatOut);
constexpr std::size_t kHome = index_of(Activity::HomeActivity);
constexpr std::size_t kWork = index_of(Activity::WorkForPay);

// Shop, Other, Business, School, Health, Rec, Eat, Home, Work
constexpr LabelDistribution kWeekdayFromHome{.08, .04, .08, .07, .05, .03, .06, .04, .55};
constexpr LabelDistribution kWeekdayFromWork{.10, .03, .08, .00, .02, .02, .20, .45, .10};
constexpr LabelDistribution kWeekdayFromOther{.08, .03, .07, .03, .03, .03, .08, .50, .15};
constexpr LabelDistribution kWeekdayInitial{.01, .01, .01, .01, .01, .01, .01, .85, .08};

constexpr LabelDistribution kWeekendFromHome{.15, .05, .04, .01, .03, .45, .12, .10, .05};
constexpr LabelDistribution kWeekendFromRec{.10, .03, .02, .01, .02, .15, .20, .45, .02};
constexpr LabelDistribution kWeekendFromOther{.08, .03, .03, .01, .02, .20, .10, .50, .03};
constexpr LabelDistribution kWeekendInitial{.03, .00, .00, .00, .00, .03, .02, .92, .00};

// Median one-way trip distance (miles) into each activity.
constexpr std::array<double, kNumActivities> kMedianDistance{2.0, 4.0, 3.0, 4.0, 4.0, 5.0, 2.0, 5.0, 8.0};

RegimeModel weekday_model() {
  RegimeModel m;
  m.initial = kWeekdayInitial;
  for (std::size_t from = 0; from < kNumActivities; ++from) m.transitions[from] = kWeekdayFromOther;
  m.transitions[kHome] = kWeekdayFromHome;
  m.transitions[kWork] = kWeekdayFromWork;
  return m;
}

RegimeModel weekend_model() {
  RegimeModel m;
  m.initial = kWeekendInitial;
  for (std::size_t from = 0; from < kNumActivities; ++from) m.transitions[from] = kWeekendFromOther;
  m.transitions[kHome] = kWeekendFromHome;
  m.transitions[kRec] = kWeekendFromRec;
  return m;
}

void check_distribution(std::span<const double> p, const std::string& where) {
  double total = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) throw ConfigError(where + ": negative or non-finite probability");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConfigError(where + ": probabilities sum to " + std::to_string(total) + ", expected 1");
  }
}

int draw_mode(double distance, Rng& rng) {
  // walk, car, transit, bike, other, unknown
  static constexpr std::array<double, 6> kShort{.55, .25, .05, .08, .02, .05};
  static constexpr std::array<double, 6> kLong{.00, .72, .15, .04, .02, .07};
  const auto& w = distance < 1.0 ? kShort : kLong;
  return static_cast<int>(rng.categorical(w)) + 1;
}

DaySequence generate_day(const GeneratorConfig& config, std::uint64_t seed, std::size_t k) {
  const std::size_t person = k / static_cast<std::size_t>(config.days_per_person);
  const int offset = static_cast<int>(k % static_cast<std::size_t>(config.days_per_person));

  Rng person_rng = Rng::derive(seed, person, 1);
  const int start = static_cast<int>(
      person_rng.integer(0, std::max(0, config.month_days - config.days_per_person)));
  DaySequence day;
  day.person_id = person;
  for (auto& code : day.static_codes) code = static_cast<int>(person_rng.integer(1, kStaticLevels));
  day.date = start + offset;
  day.weekday = (config.first_weekday - 1 + day.date) % 7 + 1;
  day.holiday = std::find(config.holiday_dates.begin(), config.holiday_dates.end(), day.date) !=
                config.holiday_dates.end();

  Rng rng = Rng::derive(seed, k, 2);
  const RegimeModel& model = config.regime(regime_of(day.weekday, day.holiday));
  const int n = std::min(config.max_activities, 1 + rng.poisson(config.target_mean_activities - 1.0));

  std::vector<Activity> labels;
  labels.push_back(static_cast<Activity>(rng.categorical(model.initial)));
  for (int i = 1; i < n; ++i) {
    labels.push_back(static_cast<Activity>(rng.categorical(model.transitions[index_of(labels.back())])));
  }

  std::vector<int> durations, gaps;
  int total_stay = 0, total_gap = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& r = config.durations[index_of(labels[i])];
    durations.push_back(static_cast<int>(rng.integer(r.min_bins, r.max_bins)));
    gaps.push_back(i == 0 ? 0 : static_cast<int>(rng.integer(1, 2)));
    total_stay += durations.back();
    total_gap += gaps.back();
  }
  if (total_stay + total_gap > kTimeBins) {
    const double squeeze = static_cast<double>(kTimeBins - total_gap) / total_stay;
    for (auto& d : durations) d = std::max(1, static_cast<int>(std::floor(d * squeeze)));
  }

  int clock = 0;  // last occupied bin
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ActivityRecord rec;
    rec.label = labels[i];
    rec.observed = true;
    rec.arrival = clock + gaps[i] + 1;
    rec.departure = i + 1 == labels.size() ? kTimeBins : rec.arrival + durations[i] - 1;
    clock = rec.departure;
    if (i == 0) {
      rec.mode = kModeUnknown;
      rec.distance = 0.0;
    } else {
      const double miles = kMedianDistance[index_of(labels[i])] * std::exp(0.6 * rng.normal());
      rec.distance = std::round(miles * 100.0) / 100.0;
      rec.mode = draw_mode(rec.distance, rng);
    }
    day.activities.push_back(rec);
  }
  return day;
}

}  // namespace

Regime regime_of(int weekday, bool holiday) {
  if (holiday) return Regime::Holiday;
  return weekday >= 6 ? Regime::Weekend : Regime::Weekday;
}

GeneratorConfig GeneratorConfig::defaults() {
  GeneratorConfig c;
  c.regimes[static_cast<std::size_t>(Regime::Weekday)] = weekday_model();
  c.regimes[static_cast<std::size_t>(Regime::Weekend)] = weekend_model();
  c.regimes[static_cast<std::size_t>(Regime::Holiday)] = weekend_model();
  c.durations[kShop] = {2, 6};
  c.durations[kOther] = {2, 8};
  c.durations[kBusiness] = {2, 6};
  c.durations[kSchool] = {16, 28};
  c.durations[kHealth] = {2, 8};
  c.durations[kRec] = {4, 16};
  c.durations[kEat] = {2, 6};
  c.durations[kHome] = {8, 28};
  c.durations[kWork] = {16, 36};
  return c;
}

void validate(const GeneratorConfig& config) {
  static constexpr std::array<const char*, kNumRegimes> kNames{"weekday", "weekend", "holiday"};
  for (std::size_t r = 0; r < kNumRegimes; ++r) {
    check_distribution(config.regimes[r].initial, std::string(kNames[r]) + ".initial");
    for (std::size_t from = 0; from < kNumActivities; ++from) {
      check_distribution(config.regimes[r].transitions[from],
                         std::string(kNames[r]) + ".transitions[" + std::string(kActivityNames[from]) + "]");
    }
  }
  for (std::size_t a = 0; a < kNumActivities; ++a) {
    const auto& d = config.durations[a];
    if (d.min_bins < 1 || d.max_bins < d.min_bins || d.max_bins > kTimeBins) {
      throw ConfigError("durations[" + std::string(kActivityNames[a]) + "]: invalid bin range");
    }
  }
  if (!(config.p_remove >= 0.0 && config.p_remove <= 1.0)) throw ConfigError("p_remove outside [0, 1]");
  if (!(config.target_mean_activities >= 1.0)) throw ConfigError("target_mean_activities must be >= 1");
  if (config.max_activities < 1 || config.max_activities > kTimeBins / 3) {
    throw ConfigError("max_activities outside 1..32");
  }
  if (config.days_per_person < 1 || config.month_days < config.days_per_person) {
    throw ConfigError("days_per_person must be in 1..month_days");
  }
  if (config.first_weekday < 1 || config.first_weekday > 7) throw ConfigError("first_weekday outside 1..7");
}

std::vector<DaySequence> generate_population(const GeneratorConfig& config, std::uint64_t seed) {
  validate(config);
  std::vector<DaySequence> out;
  out.reserve(config.population);
  for (std::size_t k = 0; k < config.population; ++k) out.push_back(generate_day(config, seed, k));
  return out;
}

RecoverySample mask_sequence(const DaySequence& complete, double p_remove, Rng& rng) {
  std::vector<std::size_t> removed;
  for (std::size_t i = 0; i < complete.size(); ++i) {
    if (rng.bernoulli(p_remove)) removed.push_back(i);
  }
  return make_sample(complete, std::move(removed));
}

std::vector<RecoverySample> generate_samples(const GeneratorConfig& config, std::uint64_t seed) {
  const auto days = generate_population(config, seed);
  std::vector<RecoverySample> out;
  out.reserve(days.size());
  for (std::size_t k = 0; k < days.size(); ++k) {
    Rng rng = Rng::derive(seed, k, 3);
    out.push_back(mask_sequence(days[k], config.p_remove, rng));
  }
  return out;
}

}  // namespace vsnit
