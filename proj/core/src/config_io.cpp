#include "vsnit/config_io.hpp"

#include <set>

#include "json_support.hpp"
#include "vsnit/dataset_io.hpp"
#include "vsnit/error.hpp"

namespace vsnit {

namespace detail {

namespace {

constexpr std::array<const char*, kNumRegimes> kRegimeNames{"weekday", "weekend", "holiday"};

// Reads keys from an object, remembering which were consumed so leftovers can be reported.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected a JSON object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + "." + key + ": wrong type");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

}  // namespace

json parse_document(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

ordered_json model_config_json(const ModelConfig& c) {
  ordered_json j;
  j["d_model"] = c.d_model;
  j["heads"] = c.heads;
  j["d_attn"] = c.d_attn;
  j["d_val"] = c.d_val;
  j["layers"] = c.layers;
  j["use_vsn"] = c.use_vsn;
  j["dropout"] = c.dropout;
  j["max_rounds"] = c.max_rounds;
  j["max_len"] = c.max_len;
  j["static_covariates"] = c.static_covariates;
  j["known_covariates"] = c.known_covariates;
  j["unknown_covariates"] = c.unknown_covariates;
  j["init_seed"] = c.init_seed;
  return j;
}

ModelConfig model_config_from(const json& j, ModelConfig c) {
  Reader r(j, "model");
  r.read("d_model", c.d_model);
  r.read("heads", c.heads);
  r.read("d_attn", c.d_attn);
  r.read("d_val", c.d_val);
  r.read("layers", c.layers);
  r.read("use_vsn", c.use_vsn);
  r.read("dropout", c.dropout);
  r.read("max_rounds", c.max_rounds);
  r.read("max_len", c.max_len);
  r.read("static_covariates", c.static_covariates);
  r.read("known_covariates", c.known_covariates);
  r.read("unknown_covariates", c.unknown_covariates);
  r.read("init_seed", c.init_seed);
  r.finish();
  validate(c);
  return c;
}

ordered_json generator_config_json(const GeneratorConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  j["population"] = c.population;
  j["days_per_person"] = c.days_per_person;
  j["month_days"] = c.month_days;
  j["first_weekday"] = c.first_weekday;
  j["holiday_dates"] = c.holiday_dates;
  j["p_remove"] = c.p_remove;
  j["target_mean_activities"] = c.target_mean_activities;
  j["max_activities"] = c.max_activities;
  ordered_json regimes;
  for (std::size_t r = 0; r < kNumRegimes; ++r) {
    ordered_json m;
    m["initial"] = c.regimes[r].initial;
    m["transitions"] = c.regimes[r].transitions;
    regimes[kRegimeNames[r]] = std::move(m);
  }
  j["regimes"] = std::move(regimes);
  ordered_json durations;
  for (std::size_t a = 0; a < kNumActivities; ++a) {
    durations[std::string(kActivityNames[a])] = {c.durations[a].min_bins, c.durations[a].max_bins};
  }
  j["durations"] = std::move(durations);
  return j;
}

GeneratorConfig generator_config_from(const json& j, GeneratorConfig c) {
  Reader r(j, "generator");
  r.read("seed", c.seed);
  r.read("population", c.population);
  r.read("days_per_person", c.days_per_person);
  r.read("month_days", c.month_days);
  r.read("first_weekday", c.first_weekday);
  r.read("holiday_dates", c.holiday_dates);
  r.read("p_remove", c.p_remove);
  r.read("target_mean_activities", c.target_mean_activities);
  r.read("max_activities", c.max_activities);
  if (const json* regimes = r.child("regimes")) {
    Reader rr(*regimes, "generator.regimes");
    for (std::size_t k = 0; k < kNumRegimes; ++k) {
      if (const json* m = rr.child(kRegimeNames[k])) {
        Reader mr(*m, std::string("generator.regimes.") + kRegimeNames[k]);
        mr.read("initial", c.regimes[k].initial);
        mr.read("transitions", c.regimes[k].transitions);
        mr.finish();
      }
    }
    rr.finish();
  }
  if (const json* durations = r.child("durations")) {
    Reader dr(*durations, "generator.durations");
    for (std::size_t a = 0; a < kNumActivities; ++a) {
      std::array<int, 2> range{c.durations[a].min_bins, c.durations[a].max_bins};
      dr.read(std::string(kActivityNames[a]).c_str(), range);
      c.durations[a] = {range[0], range[1]};
    }
    dr.finish();
  }
  r.finish();
  validate(c);
  return c;
}

ordered_json train_config_json(const train::TrainConfig& c) {
  ordered_json j;
  j["lr"] = c.lr;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["eps"] = c.eps;
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["max_steps"] = c.max_steps;
  j["clip_norm"] = c.clip_norm;
  j["seed"] = c.seed;
  j["checkpoint_interval"] = c.checkpoint_interval;
  j["checkpoint_path"] = c.checkpoint_path;
  j["partial_state_prob"] = c.partial_state_prob;
  j["pad_batches"] = c.pad_batches;
  return j;
}

train::TrainConfig train_config_from(const json& j, train::TrainConfig c) {
  Reader r(j, "train");
  r.read("lr", c.lr);
  r.read("beta1", c.beta1);
  r.read("beta2", c.beta2);
  r.read("eps", c.eps);
  r.read("batch_size", c.batch_size);
  r.read("epochs", c.epochs);
  r.read("max_steps", c.max_steps);
  r.read("clip_norm", c.clip_norm);
  r.read("seed", c.seed);
  r.read("checkpoint_interval", c.checkpoint_interval);
  r.read("checkpoint_path", c.checkpoint_path);
  r.read("partial_state_prob", c.partial_state_prob);
  r.read("pad_batches", c.pad_batches);
  r.finish();
  train::validate(c);
  return c;
}

}  // namespace detail

namespace config {

std::string to_json(const GeneratorConfig& c) { return detail::generator_config_json(c).dump(2); }
std::string to_json(const ModelConfig& c) { return detail::model_config_json(c).dump(2); }
std::string to_json(const train::TrainConfig& c) { return detail::train_config_json(c).dump(2); }

GeneratorConfig parse_generator_config(std::string_view text, GeneratorConfig base) {
  return detail::generator_config_from(detail::parse_document(text, "generator config"), std::move(base));
}

ModelConfig parse_model_config(std::string_view text, ModelConfig base) {
  return detail::model_config_from(detail::parse_document(text, "model config"), base);
}

train::TrainConfig parse_train_config(std::string_view text, train::TrainConfig base) {
  return detail::train_config_from(detail::parse_document(text, "train config"), std::move(base));
}

GeneratorConfig load_generator_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("generator config not found: " + path.string());
  return parse_generator_config(io::read_text(path));
}

}  // namespace config

}  // namespace vsnit
