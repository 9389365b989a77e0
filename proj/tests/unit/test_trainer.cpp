#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <limits>

#include "test_util.hpp"
#include "vsnit/checkpoint.hpp"
#include "vsnit/dataset_io.hpp"
#include "vsnit/error.hpp"
#include "vsnit/generator.hpp"
#include "vsnit/optimizer.hpp"
#include "vsnit/trainer.hpp"

using namespace vsnit;
using testutil::day;
using testutil::seq;

namespace {

ModelConfig tiny(bool vsn = true) {
  ModelConfig c;
  c.d_model = 8;
  c.heads = 2;
  c.d_attn = 4;
  c.d_val = 4;
  c.layers = 1;
  c.dropout = 0.1;
  c.use_vsn = vsn;
  return c;
}

std::vector<RecoverySample> small_data(std::size_t n, std::uint64_t seed) {
  auto g = GeneratorConfig::defaults();
  g.population = n;
  g.max_activities = 8;
  return generate_samples(g, seed);
}

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "vsnit_unit_trainer";
  std::filesystem::create_directories(dir);
  return dir;
}

nn::ParameterStore one_param(double value, double grad) {
  nn::ParameterStore s;
  auto& p = s.add("w", nn::Tensor({2}, {value, value}));
  p.grad().fill(grad);
  return s;
}

}  // namespace

TEST_CASE("Adam leaves parameters alone for a zero gradient") {
  auto s = one_param(0.5, 0.0);
  auto st = optim::AdamState::zeros(s);
  CHECK(optim::adam_step(s, st, {}));
  CHECK(s[0].value()[0] == doctest::Approx(0.5));
  CHECK(st.t == 1);
}

TEST_CASE("the first Adam step moves each weight by about lr") {
  auto s = one_param(0.5, 3.0);
  auto st = optim::AdamState::zeros(s);
  optim::AdamConfig cfg;
  cfg.lr = 0.01;
  CHECK(optim::adam_step(s, st, cfg));
  CHECK(s[0].value()[0] == doctest::Approx(0.49).epsilon(1e-6));
  s[0].grad().fill(-3.0);
  CHECK(optim::adam_step(s, st, cfg));
  CHECK(s[0].value()[1] > 0.49 - 0.01);
}

TEST_CASE("non-finite gradients skip the update") {
  auto s = one_param(0.5, std::numeric_limits<double>::quiet_NaN());
  auto st = optim::AdamState::zeros(s);
  CHECK_FALSE(optim::adam_step(s, st, {}));
  CHECK(s[0].value()[0] == 0.5);
  CHECK(st.t == 0);
  CHECK(st.m[0][0] == 0.0);
}

TEST_CASE("global norm clipping") {
  auto s = one_param(0.0, 3.0);
  s.add("b", nn::Tensor({1}, {0.0})).grad().fill(4.0);
  // |(3, 3, 4)| = sqrt(34)
  CHECK(optim::global_grad_norm(s) == doctest::Approx(std::sqrt(34.0)));
  const double before = optim::clip_global_norm(s, 1.0);
  CHECK(before == doctest::Approx(std::sqrt(34.0)));
  CHECK(optim::global_grad_norm(s) == doctest::Approx(1.0));
  CHECK(s[1].grad()[0] == doctest::Approx(4.0 / std::sqrt(34.0)));
  optim::clip_global_norm(s, 5.0);
  CHECK(optim::global_grad_norm(s) == doctest::Approx(1.0));
}

TEST_CASE("training configuration validation") {
  train::TrainConfig c;
  CHECK_NOTHROW(train::validate(c));
  auto bad = c;
  bad.lr = 0.0;
  CHECK_THROWS_AS(train::validate(bad), ConfigError);
  bad = c;
  bad.batch_size = 0;
  CHECK_THROWS_AS(train::validate(bad), ConfigError);
  bad = c;
  bad.beta2 = 1.0;
  CHECK_THROWS_AS(train::validate(bad), ConfigError);
  bad = c;
  bad.epochs = 0;
  CHECK_THROWS_AS(train::validate(bad), ConfigError);
  bad.max_steps = 4;
  CHECK_NOTHROW(train::validate(bad));
}

TEST_CASE("an empty dataset is a configuration error") {
  const std::vector<RecoverySample> none;
  CHECK_THROWS_AS(train::train(none, tiny(), {}), ConfigError);
}

TEST_CASE("make_example targets the labels still missing") {
  const auto sample = make_sample(day("HSWEH"), {1, 3});
  const auto plain = train::make_example(sample, {});
  CHECK(plain.state.labels() == seq("HWH"));
  REQUIRE(plain.targets.size() == 4);
  CHECK(plain.targets[1] == seq("S"));
  CHECK(plain.targets[2] == seq("E"));
  CHECK(plain.targets[0].empty());

  const std::vector<std::size_t> back{1};
  const auto partial = train::make_example(sample, back);
  CHECK(partial.state.labels() == seq("HSWH"));
  CHECK_FALSE(partial.state.covariates[2].observed);
  CHECK(partial.state.covariates[3].observed);
  CHECK(partial.targets[2].empty());
  CHECK(partial.targets[3] == seq("E"));
}

TEST_CASE("draw_example without partial states uses the incomplete sequence") {
  const auto sample = make_sample(day("HSWEH"), {1, 3});
  Rng rng(3);
  for (int i = 0; i < 10; ++i) {
    const auto ex = train::draw_example(sample, 0.0, rng);
    CHECK(ex.state.labels() == seq("HWH"));
  }
  bool saw_partial = false;
  for (int i = 0; i < 50; ++i) saw_partial |= train::draw_example(sample, 1.0, rng).state.labels().size() > 3;
  CHECK(saw_partial);
}

TEST_CASE("batch indices cover each epoch exactly once") {
  train::TrainConfig c;
  c.batch_size = 4;
  train::Trainer t(VsnitModel(tiny()), c);
  CHECK(t.total_steps(10) == 30);
  std::vector<int> seen(10, 0);
  for (std::size_t s = 0; s < 3; ++s)
    for (auto i : t.batch_indices(10, s)) ++seen[i];
  for (int v : seen) CHECK(v == 1);
  CHECK(t.batch_indices(10, 2).size() == 2);
  CHECK(t.batch_indices(10, 3) != t.batch_indices(10, 0));
}

TEST_CASE("training is deterministic for a fixed seed") {
  const auto data = small_data(24, 4);
  train::TrainConfig c;
  c.batch_size = 8;
  c.max_steps = 6;
  const auto a = train::train(data, tiny(), c);
  const auto b = train::train(data, tiny(), c);
  CHECK(a.report.losses == b.report.losses);
  CHECK(a.report.checksum == b.report.checksum);
  c.seed = 8;
  CHECK(train::train(data, tiny(), c).report.checksum != a.report.checksum);
}

TEST_CASE("loss falls on a degenerate dataset") {
  // Every sample lost the same WorkForPay between two homes.
  std::vector<RecoverySample> data(8, make_sample(day("HWH"), {1}));
  train::TrainConfig c;
  c.batch_size = 4;
  c.max_steps = 60;
  c.lr = 5e-3;
  const auto r = train::train(data, tiny(), c);
  double head = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    head += r.report.losses[i];
    tail += r.report.losses[r.report.losses.size() - 1 - i];
  }
  CHECK(tail < 0.5 * head);
  CHECK(r.report.skipped_steps == 0);
}

TEST_CASE("resuming continues the step counter and the loss curve") {
  const auto data = small_data(16, 5);
  train::TrainConfig c;
  c.batch_size = 8;
  c.max_steps = 8;
  train::Trainer straight(VsnitModel(tiny()), c);
  const auto full = straight.run(data);

  auto half = c;
  half.max_steps = 4;
  train::Trainer first(VsnitModel(tiny()), half);
  first.run(data);
  const auto path = temp_dir() / "resume.ckpt";
  first.save(path);

  auto resumed = train::Trainer::resume(path, c);
  CHECK(resumed.current_step() == 4);
  CHECK(resumed.optimizer_state().t == 4);
  const auto rest = resumed.run(data);
  CHECK(rest.start_step == 4);
  CHECK(rest.final_step == 8);
  REQUIRE(rest.losses.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(rest.losses[i] == doctest::Approx(full.losses[4 + i]).epsilon(1e-3));
}

TEST_CASE("checkpoint save, load, save is byte identical") {
  const auto dir = temp_dir();
  VsnitModel m(tiny());
  const auto a = dir / "a.ckpt";
  const auto b = dir / "b.ckpt";
  ckpt::save_checkpoint(a, m);
  const auto loaded = ckpt::load_checkpoint(a);
  CHECK_FALSE(loaded.counters);
  ckpt::save_checkpoint(b, loaded.model);
  CHECK(io::read_text(ckpt::blob_path(a)) == io::read_text(ckpt::blob_path(b)));
  CHECK(ckpt::parameter_checksum(loaded.model.parameters()) == ckpt::parameter_checksum(m.parameters()));
  CHECK(loaded.model.config() == m.config());
}

TEST_CASE("loading into a different width names the mismatching field") {
  const auto path = temp_dir() / "width.ckpt";
  ckpt::save_checkpoint(path, VsnitModel(tiny()));
  auto expected = tiny();
  expected.d_model = 16;
  try {
    ckpt::load_checkpoint(path, expected);
    FAIL("expected CompatibilityError");
  } catch (const CompatibilityError& e) {
    CHECK(std::string(e.what()).find("d_model") != std::string::npos);
  }
  CHECK_NOTHROW(ckpt::load_checkpoint(path, tiny()));
}

TEST_CASE("a missing or foreign checkpoint is rejected") {
  CHECK_THROWS_AS(ckpt::load_checkpoint(temp_dir() / "nope.ckpt"), ConfigError);
  const auto path = temp_dir() / "foreign.ckpt";
  io::write_text(path, R"({"format":"something-else"})");
  CHECK_THROWS_AS(ckpt::load_checkpoint(path), CompatibilityError);
}

TEST_CASE("the report checksum is the checkpoint checksum") {
  const auto data = small_data(8, 6);
  train::TrainConfig c;
  c.batch_size = 4;
  c.max_steps = 2;
  const auto r = train::train(data, tiny(false), c);
  CHECK(r.report.checksum == ckpt::parameter_checksum(r.model.parameters()));
  const auto path = temp_dir() / "sum.ckpt";
  ckpt::save_checkpoint(path, r.model);
  CHECK(ckpt::parameter_checksum(ckpt::load_checkpoint(path).model.parameters()) == r.report.checksum);
}
