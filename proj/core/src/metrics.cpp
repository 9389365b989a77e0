#include "vsnit/metrics.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "vsnit/alignment.hpp"
#include "vsnit/error.hpp"

namespace vsnit::metrics {

namespace {

std::vector<std::size_t> anchor(const std::vector<Activity>& source, const std::vector<Activity>& target,
                                const char* what) {
  try {
    return align_subsequence(source, target);
  } catch (const AlignmentError& e) {
    throw ContractError(std::string(what) + " does not preserve the incomplete sequence: " + e.what());
  }
}

std::size_t diff(std::size_t a, std::size_t b) { return a > b ? a - b : b - a; }

PairCounts pair_counts(const std::vector<Activity>& seq) {
  PairCounts c{};
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) ++c[index_of(seq[i])][index_of(seq[i + 1])];
  return c;
}

// Adds max(0, a - b) cellwise.
void add_positive_difference(PairCounts& out, const PairCounts& a, const PairCounts& b) {
  for (std::size_t i = 0; i < kNumActivities; ++i) {
    for (std::size_t j = 0; j < kNumActivities; ++j) {
      if (a[i][j] > b[i][j]) out[i][j] += a[i][j] - b[i][j];
    }
  }
}

// Pairs around each unanchored position of `seq`.
void add_role_pairs(std::array<PairCounts, kRoles>& out, const std::vector<Activity>& seq,
                    const std::vector<std::size_t>& anchors) {
  std::vector<bool> anchored(seq.size(), false);
  for (auto a : anchors) anchored[a] = true;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (anchored[i]) continue;
    const std::size_t x = index_of(seq[i]);
    if (i > 0) ++out[static_cast<std::size_t>(Role::Second)][index_of(seq[i - 1])][x];
    if (i + 1 < seq.size()) ++out[static_cast<std::size_t>(Role::First)][x][index_of(seq[i + 1])];
  }
}

MetricsReport base_counts(std::span<const Triple> triples) {
  MetricsReport r;
  std::size_t hyp_tokens = 0;
  std::size_t tgt_tokens = 0;
  for (const auto& t : triples) {
    if (t.hypothesis.size() < t.incomplete.size() || t.complete.size() < t.incomplete.size()) {
      throw ContractError("incomplete sequence longer than its target or hypothesis");
    }
    r.total_inserted += t.hypothesis.size() - t.incomplete.size();
    r.total_removed += t.complete.size() - t.incomplete.size();
    hyp_tokens += t.hypothesis.size();
    tgt_tokens += t.complete.size();
  }
  if (!triples.empty()) {
    r.avg_daily_hypothesis = static_cast<double>(hyp_tokens) / static_cast<double>(triples.size());
    r.avg_daily_target = static_cast<double>(tgt_tokens) / static_cast<double>(triples.size());
  }
  return r;
}

}  // namespace

std::vector<Triple> make_triples(std::span<const RecoverySample> samples,
                                 std::span<const DaySequence> hypotheses) {
  if (samples.size() != hypotheses.size()) {
    throw ContractError(std::to_string(samples.size()) + " samples but " + std::to_string(hypotheses.size()) +
                        " hypotheses");
  }
  std::vector<Triple> out;
  out.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out.push_back({samples[i].incomplete.labels(), samples[i].complete.labels(), hypotheses[i].labels()});
  }
  return out;
}

Ratios ratios(std::size_t correct, std::size_t inserted, std::size_t removed) {
  Ratios r;
  if (inserted > 0) r.precision = static_cast<double>(correct) / static_cast<double>(inserted);
  if (removed > 0) r.recall = static_cast<double>(correct) / static_cast<double>(removed);
  if (r.precision + r.recall > 0.0) r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

SampleCounts sample_counts(const Triple& t) {
  const auto target_slots = slot_contents(t.incomplete, t.complete, anchor(t.incomplete, t.complete, "target"));
  const auto hyp_slots =
      slot_contents(t.incomplete, t.hypothesis, anchor(t.incomplete, t.hypothesis, "hypothesis"));

  SampleCounts c;
  c.inserted = t.hypothesis.size() - t.incomplete.size();
  c.removed = t.complete.size() - t.incomplete.size();
  for (std::size_t s = 0; s < target_slots.size(); ++s) {
    c.location_correct += std::min(hyp_slots[s].size(), target_slots[s].size());
    std::array<std::size_t, kNumActivities> h{}, g{};
    for (auto a : hyp_slots[s]) ++h[index_of(a)];
    for (auto a : target_slots[s]) ++g[index_of(a)];
    for (std::size_t k = 0; k < kNumActivities; ++k) c.label_location_correct += std::min(h[k], g[k]);
  }
  if (c.inserted == 0) {
    c.location_pct = c.removed == 0 ? 1.0 : 0.0;
  } else {
    c.location_pct = static_cast<double>(c.location_correct) / static_cast<double>(c.inserted);
  }
  return c;
}

MetricsReport position_metrics(std::span<const Triple> triples) {
  MetricsReport r = base_counts(triples);
  double pct_sum = 0.0;
  double missing_sum = 0.0;
  std::size_t missing_n = 0;
  for (const auto& t : triples) {
    const auto c = sample_counts(t);
    r.correct_inserted += c.label_location_correct;
    pct_sum += c.location_pct;
    if (c.removed > 0) {
      missing_sum += c.location_pct;
      ++missing_n;
    }
  }
  if (!triples.empty()) r.avg_correct_location_pct = pct_sum / static_cast<double>(triples.size());
  if (missing_n > 0) r.avg_correct_location_pct_missing_only = missing_sum / static_cast<double>(missing_n);
  const auto q = ratios(r.correct_inserted, r.total_inserted, r.total_removed);
  r.precision = q.precision;
  r.recall = q.recall;
  r.f1 = q.f1;
  return r;
}

MetricsReport order_independent_metrics(std::span<const Triple> triples) {
  MetricsReport r = base_counts(triples);
  std::array<std::size_t, kNumActivities> inserted{}, removed{};
  for (const auto& t : triples) {
    const auto hyp = anchor(t.incomplete, t.hypothesis, "hypothesis");
    const auto tgt = anchor(t.incomplete, t.complete, "target");
    std::vector<bool> used(t.hypothesis.size(), false);
    for (auto a : hyp) used[a] = true;
    for (std::size_t i = 0; i < t.hypothesis.size(); ++i) {
      if (!used[i]) ++inserted[index_of(t.hypothesis[i])];
    }
    used.assign(t.complete.size(), false);
    for (auto a : tgt) used[a] = true;
    for (std::size_t i = 0; i < t.complete.size(); ++i) {
      if (!used[i]) ++removed[index_of(t.complete[i])];
    }
  }
  for (std::size_t k = 0; k < kNumActivities; ++k) r.oi_correct += std::min(inserted[k], removed[k]);
  const auto q = ratios(r.oi_correct, r.total_inserted, r.total_removed);
  r.oi_precision = q.precision;
  r.oi_recall = q.recall;
  r.oi_f1 = q.f1;
  return r;
}

MetricsReport evaluate(std::span<const Triple> triples) {
  MetricsReport r = position_metrics(triples);
  const MetricsReport oi = order_independent_metrics(triples);
  r.oi_correct = oi.oi_correct;
  r.oi_precision = oi.oi_precision;
  r.oi_recall = oi.oi_recall;
  r.oi_f1 = oi.oi_f1;
  return r;
}

Distribution activity_distribution(std::span<const std::vector<Activity>> sequences) {
  Distribution d{};
  for (const auto& s : sequences) {
    for (auto a : s) ++d[index_of(a)];
  }
  return d;
}

Distribution activity_distribution(std::span<const DaySequence> sequences) {
  Distribution d{};
  for (const auto& s : sequences) {
    for (const auto& r : s.activities) ++d[index_of(r.label)];
  }
  return d;
}

double average_daily_activities(std::span<const std::vector<Activity>> sequences) {
  if (sequences.empty()) throw ContractError("average of an empty sequence set");
  std::size_t total = 0;
  for (const auto& s : sequences) total += s.size();
  return static_cast<double>(total) / static_cast<double>(sequences.size());
}

double average_daily_activities(std::span<const DaySequence> sequences) {
  if (sequences.empty()) throw ContractError("average of an empty sequence set");
  std::size_t total = 0;
  for (const auto& s : sequences) total += s.size();
  return static_cast<double>(total) / static_cast<double>(sequences.size());
}

std::vector<Activity> inserted_labels(const Triple& t) {
  const auto anchors = anchor(t.incomplete, t.hypothesis, "hypothesis");
  std::vector<Activity> out;
  std::size_t next = 0;
  for (std::size_t i = 0; i < t.hypothesis.size(); ++i) {
    if (next < anchors.size() && anchors[next] == i) {
      ++next;
    } else {
      out.push_back(t.hypothesis[i]);
    }
  }
  return out;
}

std::vector<PatternCount> insertion_pattern_topk(std::span<const Triple> triples, std::size_t k) {
  std::map<std::vector<Activity>, std::size_t> counts;  // ordered by label index
  for (const auto& t : triples) ++counts[inserted_labels(t)];
  std::vector<PatternCount> ranked;
  ranked.reserve(counts.size());
  for (auto& [pattern, n] : counts) ranked.push_back({pattern, n});
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const PatternCount& a, const PatternCount& b) { return a.count > b.count; });
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

TransitionTable transition_analysis(std::span<const Triple> triples) {
  TransitionTable table;
  for (const auto& t : triples) {
    const auto tgt = anchor(t.incomplete, t.complete, "target");
    const auto hyp = anchor(t.incomplete, t.hypothesis, "hypothesis");
    const auto src_pairs = pair_counts(t.incomplete);
    add_positive_difference(table.broken, pair_counts(t.complete), src_pairs);
    add_positive_difference(table.inserted, pair_counts(t.hypothesis), src_pairs);
    add_role_pairs(table.broken_by_role, t.complete, tgt);
    add_role_pairs(table.inserted_by_role, t.hypothesis, hyp);
  }
  return table;
}

TransitionComparison compare_transitions(const TransitionTable& a, const TransitionTable& b) {
  if (a.broken != b.broken || a.broken_by_role != b.broken_by_role) {
    throw ContractError("transition tables come from different samples");
  }
  TransitionComparison out;
  out.cells.reserve(kTransitionCells);
  for (std::size_t r = 0; r < kRoles; ++r) {
    for (std::size_t i = 0; i < kNumActivities; ++i) {
      for (std::size_t j = 0; j < kNumActivities; ++j) {
        CellVerdict c;
        c.role = static_cast<Role>(r);
        c.from = static_cast<Activity>(i);
        c.to = static_cast<Activity>(j);
        c.broken = a.broken_by_role[r][i][j];
        c.inserted_a = a.inserted_by_role[r][i][j];
        c.inserted_b = b.inserted_by_role[r][i][j];
        const std::size_t da = diff(c.inserted_a, c.broken);
        const std::size_t db = diff(c.inserted_b, c.broken);
        if (da < db) {
          c.verdict = Verdict::A;
          ++out.wins_a;
        } else if (db < da) {
          c.verdict = Verdict::B;
          ++out.wins_b;
        } else {
          ++out.ties;
        }
        out.cells.push_back(c);
      }
    }
  }
  return out;
}

}  // namespace vsnit::metrics
