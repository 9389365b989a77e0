#include "vsnit/report.hpp"

#include <sstream>

#include "json_support.hpp"

namespace vsnit::report {

std::string metrics_json(const metrics::MetricsReport& r) {
  detail::ordered_json j;
  j["total_inserted"] = r.total_inserted;
  j["total_removed"] = r.total_removed;
  j["avg_daily_hypothesis"] = r.avg_daily_hypothesis;
  j["avg_daily_target"] = r.avg_daily_target;
  j["avg_correct_location_pct"] = r.avg_correct_location_pct;
  j["avg_correct_location_pct_missing_only"] = r.avg_correct_location_pct_missing_only;
  j["correct_inserted"] = r.correct_inserted;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["oi_correct"] = r.oi_correct;
  j["oi_precision"] = r.oi_precision;
  j["oi_recall"] = r.oi_recall;
  j["oi_f1"] = r.oi_f1;
  return j.dump(2);
}

std::string pattern_string(const std::vector<Activity>& pattern) {
  std::string s;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (i) s += '>';
    s += name_of(pattern[i]);
  }
  return s;
}

const char* role_name(metrics::Role r) { return r == metrics::Role::Second ? "second" : "first"; }

const char* verdict_name(metrics::Verdict v) {
  switch (v) {
    case metrics::Verdict::A: return "a";
    case metrics::Verdict::B: return "b";
    case metrics::Verdict::Tie: return "tie";
  }
  return "tie";
}

std::string distribution_csv(const std::vector<std::pair<std::string, metrics::Distribution>>& columns) {
  std::ostringstream out;
  out << "activity";
  for (const auto& [name, d] : columns) out << ',' << name;
  out << '\n';
  for (std::size_t a = 0; a < kNumActivities; ++a) {
    out << kActivityNames[a];
    for (const auto& [name, d] : columns) out << ',' << d[a];
    out << '\n';
  }
  return out.str();
}

std::string patterns_csv(const std::vector<metrics::PatternCount>& patterns) {
  std::ostringstream out;
  out << "rank,pattern,length,count\n";
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    out << i + 1 << ',' << pattern_string(patterns[i].pattern) << ',' << patterns[i].pattern.size() << ','
        << patterns[i].count << '\n';
  }
  return out.str();
}

std::string transitions_csv(const metrics::TransitionTable& t) {
  std::ostringstream out;
  out << "role,from,to,broken,inserted\n";
  for (std::size_t r = 0; r < metrics::kRoles; ++r) {
    for (std::size_t i = 0; i < kNumActivities; ++i) {
      for (std::size_t j = 0; j < kNumActivities; ++j) {
        out << role_name(static_cast<metrics::Role>(r)) << ',' << kActivityNames[i] << ',' << kActivityNames[j]
            << ',' << t.broken_by_role[r][i][j] << ',' << t.inserted_by_role[r][i][j] << '\n';
      }
    }
  }
  for (std::size_t i = 0; i < kNumActivities; ++i) {
    for (std::size_t j = 0; j < kNumActivities; ++j) {
      out << "pair," << kActivityNames[i] << ',' << kActivityNames[j] << ',' << t.broken[i][j] << ','
          << t.inserted[i][j] << '\n';
    }
  }
  return out.str();
}

std::string comparison_csv(const metrics::TransitionComparison& c) {
  std::ostringstream out;
  out << "role,from,to,broken,inserted_a,inserted_b,verdict\n";
  for (const auto& cell : c.cells) {
    out << role_name(cell.role) << ',' << name_of(cell.from) << ',' << name_of(cell.to) << ',' << cell.broken
        << ',' << cell.inserted_a << ',' << cell.inserted_b << ',' << verdict_name(cell.verdict) << '\n';
  }
  return out.str();
}

}  // namespace vsnit::report
