#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "test_util.hpp"
#include "vsnit/alignment.hpp"
#include "vsnit/config_io.hpp"
#include "vsnit/dataset_io.hpp"
#include "vsnit/error.hpp"
#include "vsnit/generator.hpp"

using namespace vsnit;
using testutil::day;
using testutil::seq;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "vsnit_unit";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("activity names round trip") {
  for (std::size_t i = 0; i < kNumActivities; ++i) {
    const auto a = static_cast<Activity>(i);
    CHECK(activity_from_name(name_of(a)) == a);
    CHECK(activity_from_index(static_cast<int>(i)) == a);
  }
  CHECK_FALSE(activity_from_name("Sleeping"));
  CHECK_FALSE(activity_from_index(9));
  CHECK_FALSE(activity_from_index(-1));
}

TEST_CASE("NAICS sectors map to categories") {
  CHECK(activity_from_naics(44) == Activity::GoShopping);
  CHECK(activity_from_naics(61) == Activity::GoToSchool);
  CHECK(activity_from_naics(72) == Activity::EatOut);
  CHECK(activity_from_naics(92) == Activity::PersonalBusiness);
  CHECK_FALSE(activity_from_naics(11));
  CHECK_FALSE(activity_from_naics(0));
}

TEST_CASE("regimes follow weekday and holiday") {
  CHECK(regime_of(1, false) == Regime::Weekday);
  CHECK(regime_of(5, false) == Regime::Weekday);
  CHECK(regime_of(6, false) == Regime::Weekend);
  CHECK(regime_of(7, false) == Regime::Weekend);
  CHECK(regime_of(3, true) == Regime::Holiday);
}

TEST_CASE("sequence validation rejects out-of-range fields") {
  auto d = day("HWH");
  CHECK_NOTHROW(validate(d));
  auto bad = d;
  bad.weekday = 8;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = d;
  bad.static_codes[2] = 6;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = d;
  bad.activities[1].arrival = 97;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = d;
  bad.activities[1].arrival = bad.activities[1].departure + 1;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = d;
  bad.activities[0].distance = -1.0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = d;
  bad.activities[2].mode = 7;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  // Unobserved records carry no covariates to check.
  bad = d;
  bad.activities[1] = ActivityRecord::unobserved(Activity::Other);
  CHECK_NOTHROW(validate(bad));
}

TEST_CASE("make_sample deletes the listed positions") {
  const auto s = make_sample(day("HSWEH"), {1, 3});
  CHECK(s.incomplete.labels() == seq("HWH"));
  CHECK(s.incomplete.activities[1] == s.complete.activities[2]);
  CHECK_THROWS_AS(make_sample(day("HW"), {1, 1}), ConfigError);
  CHECK_THROWS_AS(make_sample(day("HW"), {1, 0}), ConfigError);
  CHECK_THROWS_AS(make_sample(day("HW"), {2}), IndexError);
}

TEST_CASE("generator defaults validate and reject malformed configs") {
  auto c = GeneratorConfig::defaults();
  CHECK_NOTHROW(validate(c));
  auto bad = c;
  bad.p_remove = 1.5;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = c;
  bad.regimes[0].transitions[2][3] += 0.2;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = c;
  bad.regimes[1].initial[0] = -0.1;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = c;
  bad.durations[4] = {5, 2};
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = c;
  bad.target_mean_activities = 0.5;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = c;
  bad.first_weekday = 0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("generated days are valid, ordered and deterministic") {
  auto c = GeneratorConfig::defaults();
  c.population = 400;
  const auto a = generate_population(c, 9);
  const auto b = generate_population(c, 9);
  CHECK(a == b);
  CHECK(a != generate_population(c, 10));
  REQUIRE(a.size() == 400);
  for (const auto& d : a) {
    CHECK_NOTHROW(validate(d));
    REQUIRE(d.size() >= 1);
    CHECK(d.size() <= static_cast<std::size_t>(c.max_activities));
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto& r = d.activities[i];
      CHECK(r.observed);
      CHECK(r.arrival <= r.departure);
      if (i > 0) CHECK(d.activities[i - 1].departure <= r.arrival);
    }
    CHECK(d.activities.back().departure == kTimeBins);
  }
}

TEST_CASE("generated daily activity count averages the configured target") {
  auto c = GeneratorConfig::defaults();
  c.population = 10000;
  const auto days = generate_population(c, 2020);
  double total = 0.0;
  for (const auto& d : days) total += static_cast<double>(d.size());
  CHECK(std::abs(total / 10000.0 - 4.49) < 0.3);
}

TEST_CASE("empirical transitions match each regime's matrix") {
  auto c = GeneratorConfig::defaults();
  c.population = 20000;
  const auto days = generate_population(c, 5);
  std::array<TransitionMatrix, kNumRegimes> counts{};
  for (const auto& d : days) {
    const auto r = static_cast<std::size_t>(regime_of(d.weekday, d.holiday));
    for (std::size_t i = 1; i < d.size(); ++i)
      counts[r][index_of(d.activities[i - 1].label)][index_of(d.activities[i].label)] += 1.0;
  }
  const auto home = index_of(Activity::HomeActivity);
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t from = 0; from < kNumActivities; ++from) {
      double row = 0.0;
      for (double v : counts[r][from]) row += v;
      if (row < 2000.0) continue;
      for (std::size_t to = 0; to < kNumActivities; ++to) {
        CHECK(std::abs(counts[r][from][to] / row - c.regimes[r].transitions[from][to]) < 0.05);
      }
    }
    double row = 0.0;
    for (double v : counts[r][home]) row += v;
    REQUIRE(row > 0.0);
  }
  const auto work = index_of(Activity::WorkForPay);
  const auto rec = index_of(Activity::Recreation);
  auto share = [&](std::size_t r, std::size_t to) {
    double row = 0.0;
    for (double v : counts[r][home]) row += v;
    return counts[r][home][to] / row;
  };
  CHECK(share(0, work) > 0.45);
  CHECK(share(1, work) < 0.15);
  CHECK(share(1, rec) > 0.35);
}

TEST_CASE("masking rates") {
  const auto d = day("HSWEHRH");
  Rng rng(1);
  auto none = mask_sequence(d, 0.0, rng);
  CHECK(none.removed_positions.empty());
  CHECK(none.incomplete == d);
  auto all = mask_sequence(d, 1.0, rng);
  CHECK(all.removed_positions.size() == d.size());
  CHECK(all.incomplete.size() == 0);

  auto c = GeneratorConfig::defaults();
  c.population = 25000;
  const auto samples = generate_samples(c, 77);
  double tokens = 0.0;
  double removed = 0.0;
  for (const auto& s : samples) {
    tokens += static_cast<double>(s.complete.size());
    removed += static_cast<double>(s.removed_positions.size());
    CHECK(s.incomplete.size() + s.removed_positions.size() == s.complete.size());
    CHECK(is_subsequence(s.incomplete.labels(), s.complete.labels()));
  }
  REQUIRE(tokens > 100000.0);
  CHECK(std::abs(removed / tokens - 0.30) < 0.01);
}

TEST_CASE("leftmost greedy alignment") {
  CHECK(align_subsequence(seq("SW"), seq("SOW")) == std::vector<std::size_t>{0, 2});
  CHECK(align_subsequence(seq("HH"), seq("HWHH")) == std::vector<std::size_t>{0, 2});
  CHECK(align_subsequence(seq(""), seq("HWH")).empty());
  CHECK(align_subsequence(seq(""), seq("")).empty());
  CHECK_THROWS_AS(align_subsequence(seq("WH"), seq("HW")), AlignmentError);
  CHECK_THROWS_AS(align_subsequence(seq("HH"), seq("H")), AlignmentError);
  CHECK(is_subsequence(seq("HWH"), seq("HSWEH")));
  CHECK_FALSE(is_subsequence(seq("HWW"), seq("HSWEH")));
}

TEST_CASE("slot contents partition the extras") {
  const auto src = seq("HH");
  const auto tgt = seq("SHWEH");
  const std::vector<std::size_t> anchors{1, 4};
  const auto slots = slot_contents(src, tgt, anchors);
  REQUIRE(slots.size() == 3);
  CHECK(slots[0] == seq("S"));
  CHECK(slots[1] == seq("WE"));
  CHECK(slots[2].empty());
  const std::vector<std::size_t> bad{1, 1};
  CHECK_THROWS_AS(slot_contents(src, tgt, bad), AlignmentError);
  const std::vector<std::size_t> wrong_label{0, 4};
  CHECK_THROWS_AS(slot_contents(src, tgt, wrong_label), AlignmentError);
}

TEST_CASE("alignment anchors are strictly increasing and label-matching") {
  Rng rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const auto full = testutil::random_labels(rng, 12, 4);
    const auto sub = testutil::random_subsequence(rng, full, 0.6);
    const auto anchors = align_subsequence(sub, full);
    REQUIRE(anchors.size() == sub.size());
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      CHECK(full[anchors[i]] == sub[i]);
      if (i > 0) CHECK(anchors[i] > anchors[i - 1]);
    }
  }
}

TEST_CASE("samples round trip through JSON lines") {
  auto c = GeneratorConfig::defaults();
  c.population = 1000;
  const auto samples = generate_samples(c, 31);
  const auto path = temp_file("roundtrip.jsonl");
  io::write_samples(path, samples);
  const auto back = io::read_samples(path);
  REQUIRE(back.size() == samples.size());
  CHECK(back == samples);
  // Rewriting gives the same bytes.
  const auto text = io::read_text(path);
  io::write_samples(path, back);
  CHECK(io::read_text(path) == text);
}

TEST_CASE("malformed lines report their line number") {
  const auto path = temp_file("broken.jsonl");
  const auto good = io::sample_to_line(make_sample(day("HWH"), {1}));
  io::write_text(path, good + "\n\n" + good.substr(0, good.size() / 2) + "\n");
  try {
    io::read_samples(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  io::write_text(path, good + "\n" + R"({"person_id":1})" + "\n");
  CHECK_THROWS_AS(io::read_samples(path), ParseError);
}

TEST_CASE("empty files read as empty datasets") {
  const auto path = temp_file("empty.jsonl");
  io::write_text(path, "");
  CHECK(io::read_samples(path).empty());
  CHECK_THROWS_AS(io::read_samples(temp_file("does_not_exist.jsonl")), ConfigError);
}

TEST_CASE("plain sequences are accepted only when allowed") {
  const auto line = io::sequence_to_line(day("HSW"));
  CHECK_THROWS_AS(io::parse_sample_line(line, 1), ParseError);
  const auto s = io::parse_sample_line(line, 1, true);
  CHECK(s.removed_positions.empty());
  CHECK(s.incomplete == s.complete);
}

TEST_CASE("configuration JSON round trips and rejects unknown keys") {
  auto g = GeneratorConfig::defaults();
  g.population = 123;
  g.p_remove = 0.25;
  const auto g2 = config::parse_generator_config(config::to_json(g));
  CHECK(g2.population == 123);
  CHECK(g2.p_remove == doctest::Approx(0.25));
  CHECK(config::to_json(g2) == config::to_json(g));

  ModelConfig m;
  m.d_model = 32;
  m.use_vsn = false;
  CHECK(config::parse_model_config(config::to_json(m)) == m);

  train::TrainConfig t;
  t.lr = 0.005;
  t.batch_size = 7;
  const auto t2 = config::parse_train_config(config::to_json(t));
  CHECK(t2.lr == doctest::Approx(0.005));
  CHECK(t2.batch_size == 7);

  CHECK_THROWS_AS(config::parse_model_config(R"({"d_modle": 8})"), ConfigError);
  CHECK_THROWS_AS(config::parse_train_config("{not json"), ConfigError);
}
