// toyenv.hpp - deterministic 2D kinematic manipulation suite with pixel
// observations and scripted experts. Tasks: reach, push, open-slider,
// close-slider. Actions are effector velocity commands in [-1,1]^2.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "viprom/core/image.hpp"

namespace viprom::env {

enum class Task { Reach, Push, OpenSlider, CloseSlider };

std::string task_name(Task t);
Task parse_task(const std::string& s);
std::vector<Task> all_tasks();

struct TaskSpec {
  Task id = Task::Reach;
  int horizon = 40;
  float success_radius = 0.08f;  // geometric success tolerance
  static TaskSpec make(Task t);
};

using Vec2 = std::array<float, 2>;
using Action = std::array<float, 2>;

struct EnvState {
  Vec2 effector{0.5f, 0.5f};
  Vec2 object{0.5f, 0.5f};  // block (push) / target (reach); slider handle x in object[0]
  Vec2 goal{0.5f, 0.5f};
  int step_count = 0;
  bool success = false;
  std::uint64_t rng_state = 0;
};

struct StepResult {
  bool success = false;
  bool done = false;
};

struct RenderConfig {
  int h = 24, w = 24;
};

struct ToyEnv {
  TaskSpec spec;
  RenderConfig render_cfg;

  explicit ToyEnv(TaskSpec s, RenderConfig rc = {}) : spec(s), render_cfg(rc) {}

  EnvState reset(std::uint64_t seed, core::FrameImage* obs = nullptr) const;
  StepResult step(EnvState& state, const Action& action, core::FrameImage* obs = nullptr) const;
  core::FrameImage render(const EnvState& state) const;

  bool success_predicate(const EnvState& state) const;
};

// Greedy geometric controller; succeeds within the horizon from any reset.
Action scripted_expert(const EnvState& state, const TaskSpec& spec);

struct DemoStep {
  core::FrameImage obs;
  Action action{0.f, 0.f};
  EnvState state;  // kept in memory for oracle-feature experiments; not serialized
};

struct Demonstration {
  Task task = Task::Reach;
  std::vector<DemoStep> steps;
  bool success = false;
};

std::vector<Demonstration> collect_demos(const TaskSpec& spec, int n, std::uint64_t seed,
                                         RenderConfig rc = {});

// Demo file: binary container, task metadata + per-step RLE frames + actions.
void save_demos(const std::vector<Demonstration>& demos, const std::string& path);
std::vector<Demonstration> load_demos(const std::string& path);

constexpr float kMaxStep = 0.06f;  // effector displacement per unit action

}  // namespace viprom::env
