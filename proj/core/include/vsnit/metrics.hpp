#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "vsnit/activity.hpp"
#include "vsnit/sequence.hpp"

namespace vsnit::metrics {

// Labels of one evaluated sample. `incomplete` must be an ordered subsequence
// of both `complete` and `hypothesis`.
struct Triple {
  std::vector<Activity> incomplete;
  std::vector<Activity> complete;
  std::vector<Activity> hypothesis;
};

// Throws ContractError when the two spans differ in length.
std::vector<Triple> make_triples(std::span<const RecoverySample> samples,
                                 std::span<const DaySequence> hypotheses);

struct Ratios {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Zero denominators give zero ratios.
Ratios ratios(std::size_t correct, std::size_t inserted, std::size_t removed);

struct MetricsReport {
  std::size_t total_inserted = 0;
  std::size_t total_removed = 0;
  double avg_daily_hypothesis = 0.0;
  double avg_daily_target = 0.0;
  double avg_correct_location_pct = 0.0;
  double avg_correct_location_pct_missing_only = 0.0;
  std::size_t correct_inserted = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t oi_correct = 0;
  double oi_precision = 0.0;
  double oi_recall = 0.0;
  double oi_f1 = 0.0;

  bool operator==(const MetricsReport&) const = default;
};

// Per-sample breakdown behind the position-dependent block.
struct SampleCounts {
  std::size_t inserted = 0;
  std::size_t removed = 0;
  std::size_t location_correct = 0;
  std::size_t label_location_correct = 0;
  double location_pct = 0.0;
};

// Throws ContractError if the incomplete sequence is not a subsequence of the
// target or the hypothesis.
SampleCounts sample_counts(const Triple& t);

// Fills the counts, averages and position-dependent ratios; the oi_* fields stay zero.
MetricsReport position_metrics(std::span<const Triple> triples);
// Fills the counts and the oi_* block; positional fields stay zero.
MetricsReport order_independent_metrics(std::span<const Triple> triples);
// Both blocks.
MetricsReport evaluate(std::span<const Triple> triples);

using Distribution = std::array<std::size_t, kNumActivities>;
Distribution activity_distribution(std::span<const std::vector<Activity>> sequences);
Distribution activity_distribution(std::span<const DaySequence> sequences);

// Throws ContractError on an empty set.
double average_daily_activities(std::span<const std::vector<Activity>> sequences);
double average_daily_activities(std::span<const DaySequence> sequences);

// Hypothesis labels left unanchored by the incomplete sequence, in order.
std::vector<Activity> inserted_labels(const Triple& t);

struct PatternCount {
  std::vector<Activity> pattern;  // empty: nothing inserted
  std::size_t count = 0;
  bool operator==(const PatternCount&) const = default;
};

// Ranked by count, ties broken by lexicographic label-index order.
std::vector<PatternCount> insertion_pattern_topk(std::span<const Triple> triples, std::size_t k = 20);

using PairCounts = std::array<std::array<std::size_t, kNumActivities>, kNumActivities>;

enum class Role : std::size_t { Second = 0, First = 1 };
inline constexpr std::size_t kRoles = 2;
inline constexpr std::size_t kTransitionCells = kRoles * kNumActivities * kNumActivities;

struct TransitionTable {
  // Multiset differences of adjacent pairs: complete minus incomplete, and
  // hypothesis minus incomplete. Indexed [from][to].
  PairCounts broken{};
  PairCounts inserted{};
  // Pairs touching a removed (or inserted) activity, split by whether that
  // activity is the second or the first element. Role::Second cells are
  // [preceding][activity], Role::First cells are [activity][following].
  std::array<PairCounts, kRoles> broken_by_role{};
  std::array<PairCounts, kRoles> inserted_by_role{};
};

TransitionTable transition_analysis(std::span<const Triple> triples);

enum class Verdict { A, B, Tie };

struct CellVerdict {
  Role role;
  Activity from;
  Activity to;
  std::size_t broken = 0;
  std::size_t inserted_a = 0;
  std::size_t inserted_b = 0;
  Verdict verdict = Verdict::Tie;
};

struct TransitionComparison {
  std::vector<CellVerdict> cells;  // kTransitionCells entries, role-major
  std::size_t wins_a = 0;
  std::size_t wins_b = 0;
  std::size_t ties = 0;
};

// Closer means a smaller |inserted - broken| in a role cell. Throws
// ContractError when the two tables were computed from different samples.
TransitionComparison compare_transitions(const TransitionTable& a, const TransitionTable& b);

}  // namespace vsnit::metrics
