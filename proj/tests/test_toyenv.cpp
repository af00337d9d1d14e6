#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "test_util.hpp"
#include "viprom/env/toyenv.hpp"
#include "viprom/train/probe.hpp"

using namespace viprom;
namespace fs = std::filesystem;

TEST_CASE("reset: seed-deterministic layouts, seed-sensitive, right dimensions") {
  for (auto task : env::all_tasks()) {
    env::ToyEnv e(env::TaskSpec::make(task), {24, 24});
    core::FrameImage o1, o2, o3;
    auto s1 = e.reset(42, &o1);
    auto s2 = e.reset(42, &o2);
    CHECK(o1.chw == o2.chw);
    CHECK(s1.effector == s2.effector);
    CHECK(s1.object == s2.object);
    CHECK(o1.h == 24);
    CHECK(o1.w == 24);

    bool differs = false;
    for (std::uint64_t seed = 43; seed < 48; ++seed) {
      auto s3 = e.reset(seed, &o3);
      (void)s3;
      if (o3.chw != o1.chw) differs = true;
    }
    CHECK(differs);
  }
}

TEST_CASE("step: zero action keeps the effector still; dynamics are deterministic") {
  env::ToyEnv e(env::TaskSpec::make(env::Task::Push), {24, 24});
  auto st = e.reset(7, nullptr);
  auto before = st.effector;
  e.step(st, {0.f, 0.f}, nullptr);
  CHECK(st.effector == before);
  CHECK(st.step_count == 1);

  auto a = e.reset(9, nullptr);
  auto b = e.reset(9, nullptr);
  core::Rng rng(5);
  for (int t = 0; t < 30; ++t) {
    env::Action act{static_cast<float>(rng.range(-1, 1)), static_cast<float>(rng.range(-1, 1))};
    e.step(a, act, nullptr);
    e.step(b, act, nullptr);
  }
  CHECK(a.effector == b.effector);
  CHECK(a.object == b.object);
  auto ra = e.render(a);
  auto rb = e.render(b);
  CHECK(ra.chw == rb.chw);
}

TEST_CASE("step: success latches done; horizon exhaustion sets done without success") {
  env::TaskSpec spec = env::TaskSpec::make(env::Task::Reach);
  env::ToyEnv e(spec, {24, 24});
  auto st = e.reset(3, nullptr);
  bool done = false, success = false;
  for (int t = 0; t < spec.horizon && !done; ++t) {
    auto r = e.step(st, env::scripted_expert(st, spec), nullptr);
    done = r.done;
    success = r.success;
  }
  CHECK(done);
  CHECK(success);

  auto st2 = e.reset(3, nullptr);
  env::StepResult last;
  for (int t = 0; t < spec.horizon; ++t) last = e.step(st2, {0.f, 0.f}, nullptr);
  CHECK(last.done);
  CHECK(!last.success);
  CHECK(st2.step_count == spec.horizon);
}

TEST_CASE("scripted expert: 100% success over 100 seeds per task, bounded length") {
  for (auto task : env::all_tasks()) {
    env::TaskSpec spec = env::TaskSpec::make(task);
    env::ToyEnv e(spec, {16, 16});
    int successes = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      auto st = e.reset(seed, nullptr);
      for (int t = 0; t < spec.horizon; ++t) {
        auto r = e.step(st, env::scripted_expert(st, spec), nullptr);
        if (r.done) break;
      }
      if (st.success) ++successes;
      CHECK(st.step_count <= spec.horizon);
    }
    INFO("task ", env::task_name(task));
    CHECK(successes == 100);
  }
}

TEST_CASE("scripted expert: near-zero action at the goal") {
  env::TaskSpec spec = env::TaskSpec::make(env::Task::Reach);
  env::ToyEnv e(spec, {16, 16});
  auto st = e.reset(11, nullptr);
  st.effector = st.goal;
  auto a = env::scripted_expert(st, spec);
  CHECK(std::fabs(a[0]) < 1e-5);
  CHECK(std::fabs(a[1]) < 1e-5);
}

TEST_CASE("collect_demos: deterministic files, success by construction, bounded") {
  env::TaskSpec spec = env::TaskSpec::make(env::Task::Push);
  auto demos = env::collect_demos(spec, 5, 77, {16, 16});
  CHECK(demos.size() == 5);
  for (const auto& d : demos) {
    CHECK(d.success);
    CHECK(static_cast<int>(d.steps.size()) <= spec.horizon);
  }

  fs::path dir = fs::temp_directory_path() / "viprom_demo_test";
  fs::create_directories(dir);
  env::save_demos(demos, (dir / "a.demos").string());
  auto demos2 = env::collect_demos(spec, 5, 77, {16, 16});
  env::save_demos(demos2, (dir / "b.demos").string());
  std::ifstream f1(dir / "a.demos", std::ios::binary), f2(dir / "b.demos", std::ios::binary);
  std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
  CHECK(!s1.empty());

  auto loaded = env::load_demos((dir / "a.demos").string());
  REQUIRE(loaded.size() == demos.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].task == demos[i].task);
    CHECK(loaded[i].success == demos[i].success);
    REQUIRE(loaded[i].steps.size() == demos[i].steps.size());
    for (std::size_t t = 0; t < loaded[i].steps.size(); ++t) {
      CHECK(loaded[i].steps[t].action == demos[i].steps[t].action);
      CHECK(loaded[i].steps[t].obs.chw == demos[i].steps[t].obs.chw);
    }
  }
  CHECK_THROWS(env::collect_demos(spec, 0, 1, {16, 16}));
  fs::remove_all(dir);
}

TEST_CASE("pixel sufficiency: ridge probe regresses object position to <=5% error") {
  env::TaskSpec spec = env::TaskSpec::make(env::Task::Reach);
  env::ToyEnv e(spec, {24, 24});
  int n_train = 300, n_test = 80;
  int d = 3 * 24 * 24;
  core::TensorD x({n_train, d}), y({n_train, 2});
  core::TensorD xt({n_test, d}), yt({n_test, 2});
  for (int i = 0; i < n_train + n_test; ++i) {
    core::FrameImage obs;
    auto st = e.reset(static_cast<std::uint64_t>(1000 + i), &obs);
    auto& X = i < n_train ? x : xt;
    auto& Y = i < n_train ? y : yt;
    int row = i < n_train ? i : i - n_train;
    for (int j = 0; j < d; ++j) X.at2(row, j) = obs.chw[static_cast<std::size_t>(j)];
    Y.at2(row, 0) = st.object[0];
    Y.at2(row, 1) = st.object[1];
  }
  train::DualRidge ridge;
  ridge.fit(x, y, 1e-2);
  auto pred = ridge.predict(xt);
  double err = 0;
  for (int i = 0; i < n_test; ++i) {
    double dx = pred.at2(i, 0) - yt.at2(i, 0);
    double dy = pred.at2(i, 1) - yt.at2(i, 1);
    err += std::sqrt(dx * dx + dy * dy);
  }
  err /= n_test;
  // Workspace is the unit square, so 5% = 0.05.
  CHECK(err <= 0.05);
}

TEST_CASE("action dimension and clipping") {
  env::TaskSpec spec = env::TaskSpec::make(env::Task::Reach);
  env::ToyEnv e(spec, {16, 16});
  auto st = e.reset(1, nullptr);
  auto before = st.effector;
  e.step(st, {100.f, -100.f}, nullptr);  // clipped to [-1,1]
  CHECK(std::fabs(st.effector[0] - before[0]) <= env::kMaxStep + 1e-6);
  CHECK(std::fabs(st.effector[1] - before[1]) <= env::kMaxStep + 1e-6);
  CHECK(st.effector[0] >= 0.05f);
  CHECK(st.effector[1] <= 0.95f);
}
