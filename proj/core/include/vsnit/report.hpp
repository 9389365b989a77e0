#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vsnit/metrics.hpp"

// JSON and CSV renderings of the evaluation results. CSV headers are fixed.
namespace vsnit::report {

// Flat object with exactly the MetricsReport fields.
std::string metrics_json(const metrics::MetricsReport& r);

// activity,<name1>,<name2>,...
std::string distribution_csv(const std::vector<std::pair<std::string, metrics::Distribution>>& columns);

// rank,pattern,length,count ; pattern labels joined by '>', empty for no insertion.
std::string patterns_csv(const std::vector<metrics::PatternCount>& patterns);

// role,from,to,broken,inserted (role cells) followed by pair cells with role "pair".
std::string transitions_csv(const metrics::TransitionTable& t);

// role,from,to,broken,inserted_a,inserted_b,verdict
std::string comparison_csv(const metrics::TransitionComparison& c);

std::string pattern_string(const std::vector<Activity>& pattern);
const char* role_name(metrics::Role r);
const char* verdict_name(metrics::Verdict v);

}  // namespace vsnit::report
