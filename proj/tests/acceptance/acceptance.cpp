// One binary per criterion run: `vsnit_acceptance --criterion N [--workdir DIR]`.
// Prints a single "criterion N: PASS|FAIL ..." line and exits non-zero on failure.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "cli.hpp"
#include "json.hpp"
#include "metrics_oracle.hpp"
#include "vsnit/alignment.hpp"
#include "vsnit/dataset_io.hpp"
#include "vsnit/decoding.hpp"
#include "vsnit/generator.hpp"
#include "vsnit/grad_check.hpp"
#include "vsnit/layers.hpp"
#include "vsnit/metrics.hpp"
#include "vsnit/model.hpp"
#include "vsnit/ops.hpp"
#include "vsnit/trainer.hpp"

using namespace vsnit;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(digits);
  ss << v;
  return ss.str();
}

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

int cli_run(std::vector<std::string> args) {
  args.insert(args.begin(), "vsnit");
  std::ostringstream log, err;
  const int code = cli::run(args, log, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(io::read_text(p)); }

nn::Tensor random_tensor(nn::Shape shape, Rng& rng, double scale = 1.0) {
  nn::Tensor t(std::move(shape));
  for (auto& v : t.data()) v = rng.uniform(-scale, scale);
  return t;
}

void randomize(nn::ParameterStore& store, Rng& rng, double scale = 0.5) {
  for (auto& p : store)
    for (auto& v : p.value().data()) v = rng.uniform(-scale, scale);
}

std::vector<nn::Parameter> all_params(nn::ParameterStore& store) { return {store.begin(), store.end()}; }

DaySequence random_day(Rng& rng, std::size_t max_len, int alphabet = 9) {
  DaySequence d;
  d.person_id = rng.next() % 1000;
  d.date = static_cast<int>(rng.integer(0, 30));
  d.weekday = static_cast<int>(rng.integer(1, 7));
  d.holiday = rng.bernoulli(0.1);
  for (auto& c : d.static_codes) c = static_cast<int>(rng.integer(1, kStaticLevels));
  const auto n = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(max_len)));
  int clock = 1;
  for (std::size_t i = 0; i < n; ++i) {
    ActivityRecord r;
    r.label = static_cast<Activity>(rng.integer(0, alphabet - 1));
    r.observed = rng.bernoulli(0.9);
    if (r.observed) {
      r.arrival = clock;
      r.departure = std::min(kTimeBins, clock + static_cast<int>(rng.integer(0, 6)));
      r.mode = static_cast<int>(rng.integer(1, kModeUnknown));
      r.distance = rng.bernoulli(0.2) ? 0.0 : rng.uniform(0.0, 30.0);
      clock = std::min(kTimeBins, r.departure + 1);
    }
    d.activities.push_back(r);
  }
  return d;
}

ModelConfig random_config(Rng& rng) {
  ModelConfig c;
  c.d_model = static_cast<std::size_t>(4 * rng.integer(1, 4));
  c.heads = static_cast<std::size_t>(rng.integer(1, 4));
  c.d_attn = static_cast<std::size_t>(rng.integer(1, 8));
  c.d_val = static_cast<std::size_t>(rng.integer(1, 8));
  c.layers = static_cast<std::size_t>(rng.integer(1, 2));
  c.dropout = 0.0;
  c.use_vsn = rng.bernoulli(0.75);
  c.init_seed = rng.next();
  return c;
}

// ---- criteria ----

Verdict table_arithmetic() {
  struct Row {
    std::size_t correct, inserted, removed;
    double p, r, f;
  };
  const Row rows[] = {
      {807, 4883, 5757, 0.165, 0.140, 0.152},
      {1809, 4883, 5757, 0.370, 0.314, 0.340},
      {459, 2106, 5757, 0.218, 0.080, 0.117},
      {925, 2106, 5757, 0.439, 0.161, 0.235},
  };
  std::ostringstream detail;
  bool ok = true;
  for (const auto& row : rows) {
    const auto q = metrics::ratios(row.correct, row.inserted, row.removed);
    const bool hit = std::abs(round3(q.precision) - row.p) < 1e-9 && std::abs(round3(q.recall) - row.r) < 1e-9 &&
                     std::abs(round3(q.f1) - row.f) < 1e-9;
    ok &= hit;
    detail << row.correct << "/" << row.inserted << "/" << row.removed << " -> " << fmt(q.precision, 3) << " "
           << fmt(q.recall, 3) << " " << fmt(q.f1, 3) << (hit ? "" : " (mismatch)");
    if (&row != &rows[3]) detail << "; ";
  }
  return {ok, detail.str()};
}

Verdict gradient_checks() {
  Rng rng(2);
  const std::size_t d = 8;
  std::map<std::string, double> errors;

  {
    nn::ParameterStore store;
    auto g = layers::Glu::create(store, "glu", d, d, rng);
    randomize(store, rng);
    const nn::Var x = nn::Var::constant(random_tensor({3, d}, rng));
    const nn::Var w = nn::Var::constant(random_tensor({3, d}, rng));
    auto params = all_params(store);
    errors["GLU"] = nn::grad_check("glu", [&] { return nn::sum(nn::mul(w, g.forward(x))); }, params).max_rel_error;
  }
  {
    nn::ParameterStore store;
    auto g = layers::Grn::create(store, "grn", {d, d, d, d}, rng);
    randomize(store, rng);
    const nn::Var x = nn::Var::constant(random_tensor({3, d}, rng));
    const nn::Var c = nn::Var::constant(random_tensor({1, d}, rng));
    const nn::Var w = nn::Var::constant(random_tensor({3, d}, rng));
    auto params = all_params(store);
    errors["GRN"] =
        nn::grad_check("grn", [&] { return nn::sum(nn::mul(w, g.forward(x, &c))); }, params).max_rel_error;
  }
  {
    nn::ParameterStore store;
    auto v = layers::Vsn::create(store, "vsn", 7, d, d, rng);
    randomize(store, rng);
    std::vector<nn::Var> streams;
    for (int j = 0; j < 7; ++j) streams.push_back(nn::Var::constant(random_tensor({3, d}, rng)));
    const nn::Var c = nn::Var::constant(random_tensor({1, d}, rng));
    const nn::Var w = nn::Var::constant(random_tensor({3, d}, rng));
    auto params = all_params(store);
    errors["VSN"] =
        nn::grad_check("vsn", [&] { return nn::sum(nn::mul(w, v.forward(streams, &c).fused)); }, params)
            .max_rel_error;
  }
  {
    nn::ParameterStore store;
    auto m = layers::MultiHeadAttention::create(store, "mha", d, 2, 4, 4, rng);
    const nn::Var x = nn::Var::constant(random_tensor({3, d}, rng));
    const nn::Var w = nn::Var::constant(random_tensor({3, d}, rng));
    auto params = all_params(store);
    errors["MHA"] =
        nn::grad_check("mha", [&] { return nn::sum(nn::mul(w, m.forward(x, {true, true, true}))); }, params)
            .max_rel_error;
  }
  {
    ModelConfig c;
    c.d_model = d;
    c.layers = 1;
    c.heads = 2;
    c.d_attn = 4;
    c.d_val = 4;
    c.dropout = 0.0;
    VsnitModel model(c);
    DaySequence day;
    day.weekday = 2;
    day.static_codes = {1, 2, 3, 4};
    const Activity labels[] = {Activity::HomeActivity, Activity::WorkForPay, Activity::EatOut};
    int t = 1;
    for (auto a : labels) {
      day.activities.push_back({a, t, t + 4, t == 1 ? kModeUnknown : 2, t == 1 ? 0.0 : 3.5, true});
      t += 6;
    }
    const auto state = DecoderState::from_sequence(day);
    const std::vector<Activity> complete{Activity::HomeActivity, Activity::WorkForPay, Activity::GoShopping,
                                         Activity::EatOut, Activity::HomeActivity};
    const std::vector<std::size_t> anchors{0, 1, 3};
    const auto targets = insertion_targets(day.labels(), complete, anchors);
    auto params = all_params(model.parameters());
    errors["loss"] =
        nn::grad_check("insertion_loss", [&] { return model.insertion_loss(state, targets); }, params).max_rel_error;
  }

  bool ok = true;
  std::ostringstream detail;
  for (const auto& [name, err] : errors) {
    ok &= err < 1e-4;
    detail << (detail.tellp() > 0 ? ", " : "") << name << " " << std::scientific << err;
  }
  return {ok, "max relative error: " + detail.str()};
}

Verdict weights_sum_to_one() {
  Rng rng(3);
  double worst = 0.0;
  std::size_t rows = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto cfg = random_config(rng);
    VsnitModel model(cfg);
    const auto day = random_day(rng, 12);
    const auto state = DecoderState::from_sequence(day);
    for (const auto& slot : model.decoder_forward(state).slots) {
      double s = 0.0;
      for (double p : slot) s += p;
      worst = std::max(worst, std::abs(s - 1.0));
      ++rows;
    }
    if (cfg.use_vsn) {
      const auto w = model.selection_weights(state);
      for (std::size_t r = 0; r < w.rows(); ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < w.cols(); ++c) s += w.at(r, c);
        worst = std::max(worst, std::abs(s - 1.0));
        ++rows;
      }
    }
  }
  return {worst <= 1e-6, std::to_string(rows) + " rows over 1000 configs, max |sum - 1| = " + fmt(worst, 12)};
}

Verdict decodes_preserve_input() {
  Rng rng(4);
  std::size_t violations = 0;
  std::size_t insertions = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto cfg = random_config(rng);
    cfg.max_len = static_cast<std::size_t>(rng.integer(4, 32));
    VsnitModel model(cfg);
    // Random head biases so that decoding actually inserts.
    for (auto& v : model.parameters().get("head.out.b").value().data()) v = rng.uniform(-3.0, 3.0);
    const auto day = random_day(rng, 10);
    const auto r = recover(day, model, static_cast<std::size_t>(rng.integer(0, 6)));
    insertions += r.sequence.size() - std::min(r.sequence.size(), day.size());
    std::size_t observed = 0;
    for (const auto& a : r.sequence.activities) observed += a.observed;
    std::size_t observed_in = 0;
    for (const auto& a : day.activities) observed_in += a.observed;
    const bool kept = is_subsequence(day.labels(), r.sequence.labels()) && observed == observed_in &&
                      r.sequence.size() >= day.size();
    violations += kept ? 0 : 1;
  }
  return {violations == 0, "1000 decodes, " + std::to_string(insertions) + " insertions, " +
                               std::to_string(violations) + " subsequence violations"};
}

Verdict metrics_match_oracle() {
  Rng rng(5);
  std::size_t mismatches = 0;
  std::vector<metrics::Triple> all;
  std::vector<oracle::OracleTriple> all_oracle;
  auto same = [](double a, double b) { return std::abs(a - b) <= 1e-12; };
  auto agree = [&](const metrics::MetricsReport& r, const oracle::OracleCounts& o) {
    return r.total_inserted == o.inserted && r.total_removed == o.removed &&
           r.correct_inserted == o.label_location_correct && r.oi_correct == o.oi_correct &&
           same(r.avg_correct_location_pct, o.avg_location_pct) &&
           same(r.avg_correct_location_pct_missing_only, o.avg_location_pct_missing) &&
           same(r.precision, o.precision) && same(r.recall, o.recall) && same(r.f1, o.f1) &&
           same(r.oi_precision, o.oi_precision) && same(r.oi_recall, o.oi_recall) && same(r.oi_f1, o.oi_f1);
  };
  for (int trial = 0; trial < 500; ++trial) {
    const int alphabet = static_cast<int>(rng.integer(1, 9));
    const auto full_len = static_cast<std::size_t>(rng.integer(0, 6));
    std::vector<Activity> complete;
    for (std::size_t i = 0; i < full_len; ++i) complete.push_back(static_cast<Activity>(rng.integer(0, alphabet - 1)));
    std::vector<Activity> incomplete;
    for (auto a : complete)
      if (rng.bernoulli(0.6)) incomplete.push_back(a);
    auto hyp = incomplete;
    const auto extra = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(6 - incomplete.size())));
    for (std::size_t i = 0; i < extra; ++i) {
      const auto pos = static_cast<std::ptrdiff_t>(rng.integer(0, static_cast<std::int64_t>(hyp.size())));
      hyp.insert(hyp.begin() + pos, static_cast<Activity>(rng.integer(0, alphabet - 1)));
    }
    const metrics::Triple t{incomplete, complete, hyp};
    const oracle::OracleTriple ot{incomplete, complete, hyp};
    all.push_back(t);
    all_oracle.push_back(ot);
    const std::vector<metrics::Triple> one{t};
    if (!agree(metrics::evaluate(one), oracle::brute_force_metrics({ot}))) ++mismatches;
  }
  const bool aggregate = agree(metrics::evaluate(all), oracle::brute_force_metrics(all_oracle));
  return {mismatches == 0 && aggregate, "500 triples, " + std::to_string(mismatches) + " per-triple mismatches, " +
                                            "aggregate " + (aggregate ? "matches" : "differs")};
}

Verdict overfit_small_set(const fs::path& dir) {
  const auto data = dir / "data" / "tiny.jsonl";
  const auto ckpt = dir / "model" / "tiny.ckpt";
  const auto hyp = dir / "out" / "tiny.hyp.jsonl";
  if (cli_run({"gen", "--out", data.string(), "--population", "32", "--seed", "6"}) != 0) return {false, "gen failed"};
  if (cli_run({"train", "--data", data.string(), "--out", ckpt.string(), "--max-steps", "500", "--batch-size", "32",
               "--seed", "6"}) != 0)
    return {false, "train failed"};
  if (cli_run({"recover", "--model", ckpt.string(), "--data", data.string(), "--out", hyp.string()}) != 0)
    return {false, "recover failed"};
  const auto report = read_json(dir / "model" / "tiny.report.json");
  const double first = report["initial_loss"].get<double>();
  const double last = report["final_loss"].get<double>();
  const auto samples = io::read_samples(data);
  const auto hyps = io::read_sequences(hyp);
  std::size_t exact = 0;
  for (std::size_t i = 0; i < samples.size() && i < hyps.size(); ++i)
    exact += hyps[i].labels() == samples[i].complete.labels();
  const double rate = static_cast<double>(exact) / static_cast<double>(samples.size());
  const bool ok = last < 0.1 * first && rate >= 0.9;
  return {ok, "loss " + fmt(first) + " -> " + fmt(last) + " (" + fmt(100.0 * last / first, 2) + "% of initial), exact " +
                  std::to_string(exact) + "/" + std::to_string(samples.size())};
}

Verdict vsnit_beats_baseline(const fs::path& dir) {
  const auto started = std::chrono::steady_clock::now();
  const std::uint64_t seeds[] = {11, 12, 13};
  double oi_vsnit = 0.0, oi_base = 0.0, wins_vsnit = 0.0, wins_base = 0.0;
  for (auto seed : seeds) {
    const auto run = dir / ("seed" + std::to_string(seed));
    const auto data = run / "samples.jsonl";
    const std::string s = std::to_string(seed);
    if (cli_run({"gen", "--out", data.string(), "--population", "2500", "--seed", s, "--split"}) != 0)
      return {false, "gen failed"};
    for (const std::string flavor : {"vsnit", "baseline"}) {
      const auto ckpt = run / (flavor + ".ckpt");
      if (cli_run({"train", "--data", (run / "samples.train.jsonl").string(), "--flavor", flavor, "--out",
                   ckpt.string(), "--epochs", "10", "--batch-size", "32", "--d-model", "64", "--seed", s}) != 0)
        return {false, "train failed"};
      if (cli_run({"recover", "--model", ckpt.string(), "--data", (run / "samples.test.jsonl").string(), "--out",
                   (run / (flavor + ".hyp.jsonl")).string()}) != 0)
        return {false, "recover failed"};
    }
    if (cli_run({"compare", "--data", (run / "samples.test.jsonl").string(), "--hyp-a",
                 (run / "vsnit.hyp.jsonl").string(), "--hyp-b", (run / "baseline.hyp.jsonl").string(), "--out",
                 (run / "compare.json").string()}) != 0)
      return {false, "compare failed"};
    const auto cmp = read_json(run / "compare.json");
    oi_vsnit += cmp["vsnit"]["oi_f1"].get<double>() / 3.0;
    oi_base += cmp["baseline"]["oi_f1"].get<double>() / 3.0;
    wins_vsnit += cmp["wins"]["vsnit"].get<double>() / 3.0;
    wins_base += cmp["wins"]["baseline"].get<double>() / 3.0;
  }
  const double minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count() / 60.0;
  const bool ok = oi_vsnit >= oi_base + 0.10 && wins_vsnit > wins_base && minutes < 30.0;
  return {ok, "mean OI-F1 vsnit " + fmt(oi_vsnit) + " vs baseline " + fmt(oi_base) + ", mean cells won " +
                  fmt(wins_vsnit, 1) + " vs " + fmt(wins_base, 1) + " of 162, " + fmt(minutes, 1) + " min"};
}

// Same labels, covariates scrambled: shuffled across positions and redrawn day-level fields.
DaySequence scramble_covariates(const DaySequence& d, Rng& rng) {
  DaySequence out = d;
  std::vector<ActivityRecord> records = d.activities;
  rng.shuffle(records.begin(), records.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto label = out.activities[i].label;
    out.activities[i] = records[i];
    out.activities[i].label = label;
  }
  out.weekday = static_cast<int>(rng.integer(1, 7));
  out.holiday = !d.holiday;
  for (auto& c : out.static_codes) c = static_cast<int>(rng.integer(1, kStaticLevels));
  return out;
}

Verdict baseline_ignores_covariates() {
  Rng rng(8);
  auto cfg = ModelConfig::baseline();
  cfg.d_model = 16;
  cfg.layers = 1;
  VsnitModel model(cfg);
  std::size_t differing = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto day = random_day(rng, 12);
    const auto other = scramble_covariates(day, rng);
    const auto a = model.forward(DecoderState::from_sequence(day)).logits.value();
    const auto b = model.forward(DecoderState::from_sequence(other)).logits.value();
    differing += a == b ? 0 : 1;
  }

  auto g = GeneratorConfig::defaults();
  g.population = 24;
  const auto data = generate_samples(g, 8);
  std::vector<RecoverySample> scrambled;
  for (const auto& s : data) scrambled.push_back(make_sample(scramble_covariates(s.complete, rng), s.removed_positions));
  train::TrainConfig tc;
  tc.batch_size = 8;
  tc.max_steps = 6;
  const auto ra = train::train(data, cfg, tc);
  const auto rb = train::train(scrambled, cfg, tc);
  const bool trained_same = ra.report.losses == rb.report.losses && ra.report.checksum == rb.report.checksum;
  return {differing == 0 && trained_same, "300 forward passes, " + std::to_string(differing) +
                                              " differing logit tensors; 6 training steps " +
                                              (trained_same ? "identical" : "differ") + " (checksum " +
                                              ra.report.checksum + ")"};
}

Verdict daily_activity_mean() {
  auto c = GeneratorConfig::defaults();
  c.population = 10000;
  const auto days = generate_population(c, c.seed);
  const double mean = metrics::average_daily_activities(std::span<const DaySequence>(days));
  return {std::abs(mean - 4.49) <= 0.3, "10000 person-days, mean " + fmt(mean)};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = io::read_text(e.path());
  return files;
}

Verdict reruns_are_identical(const fs::path& dir) {
  const auto data = dir / "data" / "s.jsonl";
  const auto ckpt = dir / "model" / "m.ckpt";
  const auto hyp = dir / "out" / "h.jsonl";
  const auto report = dir / "out" / "r.json";
  std::vector<std::map<std::string, std::string>> runs;
  for (int run = 0; run < 2; ++run) {
    if (cli_run({"gen", "--out", data.string(), "--population", "60", "--seed", "10", "--split"}) != 0 ||
        cli_run({"train", "--data", (dir / "data" / "s.train.jsonl").string(), "--out", ckpt.string(),
                 "--max-steps", "12", "--batch-size", "8", "--d-model", "16", "--seed", "10"}) != 0 ||
        cli_run({"recover", "--model", ckpt.string(), "--data", (dir / "data" / "s.test.jsonl").string(), "--out",
                 hyp.string()}) != 0 ||
        cli_run({"eval", "--data", (dir / "data" / "s.test.jsonl").string(), "--hyp", hyp.string(), "--out",
                 report.string()}) != 0)
      return {false, "pipeline command failed"};
    runs.push_back(snapshot(dir));
  }
  std::vector<std::string> differing;
  for (const auto& [name, bytes] : runs[0]) {
    auto it = runs[1].find(name);
    if (it == runs[1].end() || it->second != bytes) differing.push_back(name);
  }
  std::string detail = std::to_string(runs[0].size()) + " files compared";
  for (const auto& name : differing) detail += ", differs: " + name;
  return {differing.empty() && runs[0].size() == runs[1].size(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int criterion = 0;
  std::string workdir = (fs::temp_directory_path() / "vsnit_acceptance").string();
  app.add_option("--criterion", criterion, "Criterion number 1-10")->required()->check(CLI::Range(1, 10));
  app.add_option("--workdir", workdir, "Scratch directory for CLI runs");
  CLI11_PARSE(app, argc, argv);

  const fs::path dir(workdir);
  fs::remove_all(dir);
  fs::create_directories(dir);

  Verdict v{false, ""};
  try {
    switch (criterion) {
      case 1: v = table_arithmetic(); break;
      case 2: v = gradient_checks(); break;
      case 3: v = weights_sum_to_one(); break;
      case 4: v = decodes_preserve_input(); break;
      case 5: v = metrics_match_oracle(); break;
      case 6: v = overfit_small_set(dir); break;
      case 7: v = vsnit_beats_baseline(dir); break;
      case 8: v = baseline_ignores_covariates(); break;
      case 9: v = daily_activity_mean(); break;
      case 10: v = reruns_are_identical(dir); break;
    }
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  std::cout << "criterion " << criterion << ": " << (v.pass ? "PASS" : "FAIL") << " " << v.detail << std::endl;
  return v.pass ? 0 : 1;
}
