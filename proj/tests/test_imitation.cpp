#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "test_util.hpp"
#include "viprom/eval/imitation.hpp"

using namespace viprom;
namespace fs = std::filesystem;

namespace {

nn::Checkpoint small_ckpt(std::uint64_t seed = 5) {
  nn::EncoderConfig cfg;
  cfg.embedding_dim = 32;
  cfg.in_h = cfg.in_w = 16;
  cfg.width = 4;
  return nn::init_encoder(cfg, seed);
}

eval::BCConfig quick_cfg() {
  eval::BCConfig cfg;
  cfg.toy = true;
  cfg.steps = 600;
  cfg.eval_every = 300;
  cfg.eval_episodes = 10;
  cfg.n_demos = 3;
  return cfg;
}

}  // namespace

TEST_CASE("frozen-encoder invariance: parameter bytes and outputs unchanged by BC") {
  auto ck = small_ckpt();
  eval::EncoderFeatures features(ck);
  std::string before = features.encoder.param_hash();

  env::RenderConfig rc{16, 16};
  auto spec = env::TaskSpec::make(env::Task::Reach);
  auto demos = env::collect_demos(spec, 3, 42, rc);

  core::FrameImage probe_frame = demos[0].steps[0].obs;
  auto out_before = features.features(probe_frame, demos[0].steps[0].state);

  auto res = eval::bc_train(features, demos, spec, quick_cfg(), 7, rc);
  CHECK(features.encoder.param_hash() == before);
  auto out_after = features.features(probe_frame, demos[0].steps[0].state);
  CHECK(out_before == out_after);
  CHECK(res.trace.size() > 0);
}

TEST_CASE("unfrozen control run changes the parameter hash") {
  auto ck = small_ckpt();
  eval::EncoderFeatures features(ck);
  std::string before = features.encoder.param_hash();

  env::RenderConfig rc{16, 16};
  auto spec = env::TaskSpec::make(env::Task::Reach);
  auto demos = env::collect_demos(spec, 2, 42, rc);
  auto cfg = quick_cfg();
  cfg.steps = 60;
  cfg.eval_every = 60;
  cfg.eval_episodes = 2;
  eval::bc_train(features, demos, spec, cfg, 7, rc, /*unfreeze_control=*/true);
  CHECK(features.encoder.param_hash() != before);
}

TEST_CASE("bc_train: descent on demo actions, empty demos rejected") {
  auto ck = small_ckpt();
  eval::EncoderFeatures features(ck);
  env::RenderConfig rc{16, 16};
  auto spec = env::TaskSpec::make(env::Task::Reach);
  auto demos = env::collect_demos(spec, 3, 11, rc);

  auto cfg = quick_cfg();
  cfg.steps = 800;
  auto res = eval::bc_train(features, demos, spec, cfg, 3, rc);
  REQUIRE(res.trace.size() >= 2);
  CHECK(res.trace.back().mse < res.trace.front().mse);

  std::vector<env::Demonstration> empty;
  CHECK_THROWS(eval::bc_train(features, empty, spec, cfg, 3, rc));
}

TEST_CASE("oracle features: reach best success >= 0.9") {
  eval::OracleFeatures features;
  env::RenderConfig rc{16, 16};
  auto spec = env::TaskSpec::make(env::Task::Reach);
  eval::BCConfig cfg;
  cfg.toy = true;
  cfg.eval_every = 1000;
  cfg.eval_episodes = 20;
  cfg.n_demos = 5;
  auto demos = env::collect_demos(spec, cfg.n_demos, core::fanout(100, "demos:reach"), rc);
  auto res = eval::bc_train(features, demos, spec, cfg, core::fanout(100, "bc:reach"), rc);
  INFO("best ", res.best_success);
  CHECK(res.best_success >= 0.9);
}

TEST_CASE("random policy on push stays at or below the chance baseline") {
  auto ck = small_ckpt(123);
  eval::EncoderFeatures features(ck);
  env::RenderConfig rc{16, 16};
  auto spec = env::TaskSpec::make(env::Task::Push);
  // Untrained policy (fresh init) evaluated over 50 episodes.
  eval::Policy policy = eval::make_policy(features.dim(), 32, 99);
  double rate = eval::evaluate(policy, features, spec, 50, 1234, rc);
  CHECK(rate <= 0.2);
}

TEST_CASE("evaluate: single episode gives 0 or 1; deterministic under seed") {
  auto ck = small_ckpt();
  eval::EncoderFeatures features(ck);
  env::RenderConfig rc{16, 16};
  auto spec = env::TaskSpec::make(env::Task::Reach);
  eval::Policy policy = eval::make_policy(features.dim(), 16, 3);
  double one = eval::evaluate(policy, features, spec, 1, 5, rc);
  CHECK((one == 0.0 || one == 1.0));
  double a = eval::evaluate(policy, features, spec, 10, 77, rc);
  double b = eval::evaluate(policy, features, spec, 10, 77, rc);
  CHECK(a == b);
  CHECK_THROWS(eval::evaluate(policy, features, spec, 0, 5, rc));
}

TEST_CASE("metric definition: aggregate is the mean of per-cell maxima") {
  // Hand-built 2x2 matrix of periodic-success traces.
  std::vector<std::vector<double>> traces = {
      {0.1, 0.5, 0.4}, {0.0, 0.2, 0.2}, {0.9, 0.7, 0.8}, {0.3, 0.3, 0.6}};
  std::vector<double> best;
  for (const auto& t : traces) best.push_back(eval::best_of_trace(t));
  CHECK(best == std::vector<double>{0.5, 0.2, 0.9, 0.6});
  CHECK(eval::aggregate_cells(best) == doctest::Approx((0.5 + 0.2 + 0.9 + 0.6) / 4).epsilon(1e-12));
}

TEST_CASE("run_protocol: default seeds, single-cell aggregate, byte-stable reports") {
  CHECK(eval::kProtocolSeeds == std::vector<std::uint64_t>{100, 125, 150});

  auto ck = small_ckpt();
  auto cfg = quick_cfg();
  fs::path dir = fs::temp_directory_path() / "viprom_protocol_test";
  fs::remove_all(dir);

  auto report = eval::run_protocol(ck, {env::Task::Reach}, {100}, cfg, (dir / "a").string(),
                                   {16, 16});
  REQUIRE(report.cells.size() == 1);
  CHECK(report.aggregate == report.cells[0].best_success);
  CHECK(report.algorithm == "bc");
  CHECK(report.encoder_fingerprint == ck.param_hash());

  auto report2 = eval::run_protocol(ck, {env::Task::Reach}, {100}, cfg, (dir / "b").string(),
                                    {16, 16});
  (void)report2;
  std::ifstream f1(dir / "a" / "report.json", std::ios::binary),
      f2(dir / "b" / "report.json", std::ios::binary);
  std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
  CHECK(!s1.empty());

  auto loaded = eval::EvalReport::load((dir / "a" / "report.json").string());
  CHECK(loaded.to_json().dump() == report.to_json().dump());
  fs::remove_all(dir);
}
