#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "vsnit/alignment.hpp"
#include "vsnit/checkpoint.hpp"
#include "vsnit/config_io.hpp"
#include "vsnit/dataset_io.hpp"
#include "vsnit/decoding.hpp"
#include "vsnit/error.hpp"
#include "vsnit/generator.hpp"
#include "vsnit/metrics.hpp"
#include "vsnit/report.hpp"
#include "vsnit/trainer.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace vsnit::cli {

namespace {

// Raised when the program's own output would violate an invariant.
struct InternalBreach : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path sibling(const fs::path& out, const std::string& suffix) {
  fs::path p = out;
  p.replace_extension();
  p += suffix;
  return p;
}

void require_file(const std::string& path, const char* what) {
  if (!fs::exists(path)) throw ConfigError(std::string(what) + " not found: " + path);
}

void ensure_parent(const fs::path& out) {
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
}

ojson raw(const std::string& text) { return ojson::parse(text); }

ojson distribution_json(const metrics::Distribution& d) {
  ojson j;
  for (std::size_t a = 0; a < kNumActivities; ++a) j[std::string(kActivityNames[a])] = d[a];
  return j;
}

// ---- gen ----

struct GenOptions {
  std::string config;
  std::string out = "data/samples.jsonl";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> population;
  std::optional<double> p_remove;
  bool split = false;
};

int cmd_gen(const GenOptions& o, std::ostream& log) {
  GeneratorConfig config = GeneratorConfig::defaults();
  if (!o.config.empty()) {
    require_file(o.config, "generator config");
    config = config::load_generator_config(o.config);
  }
  if (o.seed) config.seed = *o.seed;
  if (o.population) config.population = *o.population;
  if (o.p_remove) config.p_remove = *o.p_remove;
  validate(config);

  const auto samples = generate_samples(config, config.seed);
  const fs::path out = o.out;
  ensure_parent(out);
  io::write_samples(out, samples);

  std::size_t complete_tokens = 0, incomplete_tokens = 0;
  std::vector<DaySequence> completes;
  completes.reserve(samples.size());
  for (const auto& s : samples) {
    complete_tokens += s.complete.size();
    incomplete_tokens += s.incomplete.size();
    completes.push_back(s.complete);
  }
  const double n = samples.empty() ? 1.0 : static_cast<double>(samples.size());

  ojson summary;
  summary["samples"] = samples.size();
  summary["mean_daily_activities"] = static_cast<double>(complete_tokens) / n;
  summary["mean_incomplete_activities"] = static_cast<double>(incomplete_tokens) / n;
  summary["total_removed"] = complete_tokens - incomplete_tokens;
  summary["distribution"] = distribution_json(metrics::activity_distribution(std::span<const DaySequence>(completes)));

  if (o.split) {
    // 80/10/10 by position; samples are already independent draws.
    const std::size_t n_train = samples.size() * 8 / 10;
    const std::size_t n_val = samples.size() / 10;
    const std::span<const RecoverySample> all(samples);
    io::write_samples(sibling(out, ".train.jsonl"), all.subspan(0, n_train));
    io::write_samples(sibling(out, ".val.jsonl"), all.subspan(n_train, n_val));
    io::write_samples(sibling(out, ".test.jsonl"), all.subspan(n_train + n_val));
    summary["split"] = {{"train", n_train}, {"val", n_val}, {"test", samples.size() - n_train - n_val}};
  }
  summary["config"] = raw(config::to_json(config));
  io::write_text(sibling(out, ".summary.json"), summary.dump(2) + "\n");
  log << "gen: " << samples.size() << " samples, mean daily activities "
      << summary["mean_daily_activities"].get<double>() << " -> " << out.string() << "\n";
  return kExitOk;
}

// ---- train ----

struct TrainOptions {
  std::string data;
  std::string flavor = "vsnit";
  std::string out = "model/vsnit.ckpt";
  std::string config;
  std::string resume;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> max_steps;
  std::optional<std::size_t> batch_size;
  std::optional<double> lr;
  std::optional<std::size_t> d_model;
  std::optional<std::size_t> layers;
  std::optional<std::size_t> heads;
  std::optional<double> dropout;
  std::size_t log_every = 0;
};

int cmd_train(const TrainOptions& o, std::ostream& log) {
  require_file(o.data, "dataset");
  if (o.flavor != "vsnit" && o.flavor != "baseline") throw ConfigError("unknown flavor '" + o.flavor + "'");

  ModelConfig model = o.flavor == "baseline" ? ModelConfig::baseline() : ModelConfig{};
  train::TrainConfig tc;
  if (!o.config.empty()) {
    require_file(o.config, "train config");
    const auto doc = ojson::parse(io::read_text(o.config), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw ConfigError(o.config + ": expected a JSON object");
    for (const auto& [key, value] : doc.items()) {
      if (key == "model") {
        model = config::parse_model_config(value.dump(), model);
      } else if (key == "train") {
        tc = config::parse_train_config(value.dump(), tc);
      } else {
        throw ConfigError(o.config + ": unknown section '" + key + "'");
      }
    }
  }
  model.use_vsn = o.flavor == "vsnit";
  if (o.d_model) model.d_model = *o.d_model;
  if (o.layers) model.layers = *o.layers;
  if (o.heads) model.heads = *o.heads;
  if (o.dropout) model.dropout = *o.dropout;
  if (o.seed) {
    tc.seed = *o.seed;
    model.init_seed = *o.seed;
  }
  if (o.epochs) tc.epochs = *o.epochs;
  if (o.max_steps) tc.max_steps = *o.max_steps;
  if (o.batch_size) tc.batch_size = *o.batch_size;
  if (o.lr) tc.lr = *o.lr;
  validate(model);
  train::validate(tc);

  const auto data = io::read_samples(o.data);
  if (data.empty()) throw ConfigError("dataset is empty: " + o.data);

  const fs::path out = o.out;
  ensure_parent(out);

  std::optional<train::Trainer> trainer;
  if (!o.resume.empty()) {
    require_file(o.resume, "checkpoint");
    trainer.emplace(train::Trainer::resume(o.resume, tc));
    if (!(trainer->model().config().use_vsn == model.use_vsn)) {
      throw CompatibilityError("resume checkpoint flavor differs from --flavor");
    }
    model = trainer->model().config();
  } else {
    trainer.emplace(VsnitModel(model), tc);
  }

  const auto started = std::chrono::steady_clock::now();
  const std::size_t start_step = trainer->current_step();
  const std::size_t last = trainer->total_steps(data.size());
  std::vector<double> losses;
  while (trainer->current_step() < last) {
    losses.push_back(trainer->step(data));
    if (o.log_every > 0 && trainer->current_step() % o.log_every == 0) {
      log << "step " << trainer->current_step() << "/" << last << " loss " << losses.back() << "\n";
    }
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  trainer->save(out);

  ojson report;
  report["flavor"] = o.flavor;
  report["samples"] = data.size();
  report["start_step"] = start_step;
  report["final_step"] = trainer->current_step();
  report["skipped_steps"] = trainer->skipped_steps();
  report["checksum"] = ckpt::parameter_checksum(trainer->model().parameters());
  report["initial_loss"] = losses.empty() ? 0.0 : losses.front();
  report["final_loss"] = losses.empty() ? 0.0 : losses.back();
  report["losses"] = losses;
  report["model"] = raw(config::to_json(model));
  report["train"] = raw(config::to_json(tc));
  io::write_text(sibling(out, ".report.json"), report.dump(2) + "\n");
  log << "train: " << o.flavor << " steps " << start_step << "->" << trainer->current_step() << " in " << seconds
      << " s -> " << out.string() << "\n";
  return kExitOk;
}

// ---- recover ----

struct RecoverOptions {
  std::string model;
  std::string data;
  std::string out = "out/hypotheses.jsonl";
  std::optional<std::size_t> max_rounds;
};

int cmd_recover(const RecoverOptions& o, std::ostream& log) {
  require_file(o.model, "checkpoint");
  require_file(o.data, "input samples");
  const auto loaded = ckpt::load_checkpoint(o.model);
  const VsnitModel& model = loaded.model;
  const std::size_t rounds = o.max_rounds.value_or(model.config().max_rounds);
  const auto samples = io::read_samples(o.data, /*allow_plain=*/true);

  std::vector<DaySequence> hypotheses;
  hypotheses.reserve(samples.size());
  std::map<std::size_t, std::size_t> round_histogram;
  std::size_t truncated = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto result = recover(samples[i].incomplete, model, rounds);
    if (!is_subsequence(samples[i].incomplete.labels(), result.sequence.labels())) {
      throw InternalBreach("hypothesis " + std::to_string(i) + " does not preserve its input " +
                           to_string(samples[i].incomplete.labels()));
    }
    ++round_histogram[result.rounds];
    truncated += result.truncated ? 1 : 0;
    hypotheses.push_back(std::move(result.sequence));
  }

  const fs::path out = o.out;
  ensure_parent(out);
  io::write_sequences(out, hypotheses);

  ojson meta;
  meta["checkpoint_checksum"] = ckpt::parameter_checksum(model.parameters());
  meta["flavor"] = model.config().use_vsn ? "vsnit" : "baseline";
  meta["samples"] = samples.size();
  meta["max_rounds"] = rounds;
  meta["truncated"] = truncated;
  ojson hist = ojson::object();
  for (auto [r, n] : round_histogram) hist[std::to_string(r)] = n;
  meta["rounds"] = std::move(hist);
  io::write_text(sibling(out, ".meta.json"), meta.dump(2) + "\n");
  log << "recover: " << samples.size() << " hypotheses -> " << out.string() << "\n";
  return kExitOk;
}

// ---- eval / compare ----

std::vector<metrics::Triple> load_triples(const std::string& data, const std::string& hyp) {
  require_file(data, "samples");
  require_file(hyp, "hypotheses");
  const auto samples = io::read_samples(data, /*allow_plain=*/true);
  const auto hypotheses = io::read_sequences(hyp);
  if (samples.size() != hypotheses.size()) {
    throw ContractError(data + " has " + std::to_string(samples.size()) + " samples but " + hyp + " has " +
                        std::to_string(hypotheses.size()) + " hypotheses");
  }
  return metrics::make_triples(samples, hypotheses);
}

ojson metrics_object(const metrics::MetricsReport& r) { return raw(report::metrics_json(r)); }

struct EvalOptions {
  std::string data;
  std::string hyp;
  std::string out = "out/report.json";
  std::size_t top_k = 20;
};

int cmd_eval(const EvalOptions& o, std::ostream& log) {
  const auto triples = load_triples(o.data, o.hyp);
  const auto r = metrics::evaluate(triples);

  std::vector<std::vector<Activity>> hyp, tgt, inc;
  for (const auto& t : triples) {
    hyp.push_back(t.hypothesis);
    tgt.push_back(t.complete);
    inc.push_back(t.incomplete);
  }
  const fs::path out = o.out;
  ensure_parent(out);

  ojson doc;
  doc["samples"] = triples.size();
  doc["metrics"] = metrics_object(r);
  io::write_text(out, doc.dump(2) + "\n");
  io::write_text(sibling(out, ".distribution.csv"),
                 report::distribution_csv({{"hypothesis", metrics::activity_distribution(hyp)},
                                           {"target", metrics::activity_distribution(tgt)},
                                           {"incomplete", metrics::activity_distribution(inc)}}));
  io::write_text(sibling(out, ".patterns.csv"), report::patterns_csv(metrics::insertion_pattern_topk(triples, o.top_k)));
  io::write_text(sibling(out, ".transitions.csv"), report::transitions_csv(metrics::transition_analysis(triples)));
  log << "eval: P " << r.precision << " R " << r.recall << " F1 " << r.f1 << " | OI F1 " << r.oi_f1 << "\n";
  return kExitOk;
}

struct CompareOptions {
  std::string data;
  std::string hyp_a;
  std::string hyp_b;
  std::string name_a = "vsnit";
  std::string name_b = "baseline";
  std::string out = "out/compare.json";
};

int cmd_compare(const CompareOptions& o, std::ostream& log) {
  const auto a = load_triples(o.data, o.hyp_a);
  const auto b = load_triples(o.data, o.hyp_b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].incomplete != b[i].incomplete) throw ContractError("hypothesis files are not aligned at " + std::to_string(i));
  }
  const auto cmp = metrics::compare_transitions(metrics::transition_analysis(a), metrics::transition_analysis(b));

  const fs::path out = o.out;
  ensure_parent(out);
  ojson doc;
  doc["samples"] = a.size();
  doc["models"] = {o.name_a, o.name_b};
  doc[o.name_a] = metrics_object(metrics::evaluate(a));
  doc[o.name_b] = metrics_object(metrics::evaluate(b));
  doc["transition_cells"] = cmp.cells.size();
  doc["wins"] = {{o.name_a, cmp.wins_a}, {o.name_b, cmp.wins_b}, {"tie", cmp.ties}};
  io::write_text(out, doc.dump(2) + "\n");
  io::write_text(sibling(out, ".cells.csv"), report::comparison_csv(cmp));
  log << "compare: " << o.name_a << " " << cmp.wins_a << ", " << o.name_b << " " << cmp.wins_b << ", tie "
      << cmp.ties << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& log, std::ostream& err) {
  CLI::App app{"VSN-fused insertion transformer for activity sequence recovery", "vsnit"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic recovery dataset");
  g->add_option("--config", gen.config, "Generator config JSON");
  g->add_option("--out", gen.out, "Samples JSONL");
  g->add_option("--seed", gen.seed, "Master seed");
  g->add_option("--population", gen.population, "Number of person-days");
  g->add_option("--p-remove", gen.p_remove, "Removal probability");
  g->add_flag("--split", gen.split, "Also write 80/10/10 train/val/test files");

  TrainOptions tr;
  auto* t = app.add_subcommand("train", "Train a VSNIT or baseline checkpoint");
  t->add_option("--data", tr.data, "Training samples JSONL")->required();
  t->add_option("--flavor", tr.flavor, "vsnit or baseline")->check(CLI::IsMember({"vsnit", "baseline"}));
  t->add_option("--out", tr.out, "Checkpoint manifest path");
  t->add_option("--config", tr.config, "JSON with optional \"model\" and \"train\" sections");
  t->add_option("--resume", tr.resume, "Continue from this checkpoint");
  t->add_option("--seed", tr.seed, "Seed for initialisation, shuffling and dropout");
  t->add_option("--epochs", tr.epochs);
  t->add_option("--max-steps", tr.max_steps);
  t->add_option("--batch-size", tr.batch_size);
  t->add_option("--lr", tr.lr);
  t->add_option("--d-model", tr.d_model);
  t->add_option("--layers", tr.layers);
  t->add_option("--heads", tr.heads);
  t->add_option("--dropout", tr.dropout);
  t->add_option("--log-every", tr.log_every, "Print the loss every N steps");

  RecoverOptions rc;
  auto* r = app.add_subcommand("recover", "Recover complete sequences from incomplete ones");
  r->add_option("--model", rc.model, "Checkpoint manifest")->required();
  r->add_option("--data", rc.data, "Samples or plain sequences JSONL")->required();
  r->add_option("--out", rc.out, "Hypotheses JSONL");
  r->add_option("--max-rounds", rc.max_rounds, "Override the decoding round limit");

  EvalOptions ev;
  auto* e = app.add_subcommand("eval", "Score hypotheses against their samples");
  e->add_option("--data", ev.data, "Samples JSONL")->required();
  e->add_option("--hyp", ev.hyp, "Hypotheses JSONL")->required();
  e->add_option("--out", ev.out, "Report JSON; CSV tables are written next to it");
  e->add_option("--top-k", ev.top_k, "Insertion patterns to list");

  CompareOptions cp;
  auto* c = app.add_subcommand("compare", "Compare two models' hypotheses");
  c->add_option("--data", cp.data, "Samples JSONL")->required();
  c->add_option("--hyp-a", cp.hyp_a, "Hypotheses of model A")->required();
  c->add_option("--hyp-b", cp.hyp_b, "Hypotheses of model B")->required();
  c->add_option("--name-a", cp.name_a);
  c->add_option("--name-b", cp.name_b);
  c->add_option("--out", cp.out, "Comparison JSON");

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    log << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "vsnit: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*g) return cmd_gen(gen, log);
    if (*t) return cmd_train(tr, log);
    if (*r) return cmd_recover(rc, log);
    if (*e) return cmd_eval(ev, log);
    if (*c) return cmd_compare(cp, log);
  } catch (const ConfigError& ex) {
    err << "vsnit: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& ex) {
    err << "vsnit: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const ContractError& ex) {
    err << "vsnit: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const CompatibilityError& ex) {
    err << "vsnit: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const VocabularyError& ex) {
    err << "vsnit: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const InternalBreach& ex) {
    err << "vsnit: internal error: " << ex.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& ex) {
    err << "vsnit: internal error: " << ex.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace vsnit::cli
