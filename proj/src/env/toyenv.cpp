#include "viprom/env/toyenv.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "viprom/core/rng.hpp"

namespace viprom::env {

namespace {

constexpr float kBg = 0.10f;
const core::Color kEffectorColor = {0.92f, 0.92f, 0.92f};
const core::Color kTargetColor = {0.90f, 0.15f, 0.15f};
const core::Color kBlockColor = {0.95f, 0.45f, 0.10f};
const core::Color kGoalColor = {0.15f, 0.75f, 0.20f};
const core::Color kHandleColor = {0.20f, 0.35f, 0.95f};
const core::Color kTrackColor = {0.35f, 0.35f, 0.40f};

constexpr float kEffectorR = 0.055f;
constexpr float kBlockHalf = 0.065f;
constexpr float kHandleHalf = 0.055f;
constexpr float kContactR = 0.14f;
constexpr float kGrabR = 0.13f;

constexpr float kTrackX0 = 0.28f;
constexpr float kTrackX1 = 0.72f;
constexpr float kSliderOpenX = 0.65f;
constexpr float kSliderClosedX = 0.35f;

// Proportional-control band: expert action = (target - pos) / kExpertBand,
// clamped. Saturates only far away, so demo actions ramp smoothly.
constexpr float kExpertBand = 0.35f;

// Exploration noise injected into demo actions (the expert corrects for it).
constexpr float kDemoNoise = 0.35f;

inline float dist(const Vec2& a, const Vec2& b) {
  float dx = a[0] - b[0], dy = a[1] - b[1];
  return std::sqrt(dx * dx + dy * dy);
}

inline float clampf(float v, float lo, float hi) { return v < lo ? lo : (v > hi ? hi : v); }

}  // namespace

std::string task_name(Task t) {
  switch (t) {
    case Task::Reach: return "reach";
    case Task::Push: return "push";
    case Task::OpenSlider: return "open-slider";
    case Task::CloseSlider: return "close-slider";
  }
  return "?";
}

Task parse_task(const std::string& s) {
  if (s == "reach") return Task::Reach;
  if (s == "push") return Task::Push;
  if (s == "open-slider") return Task::OpenSlider;
  if (s == "close-slider") return Task::CloseSlider;
  throw std::invalid_argument("unknown task: " + s);
}

std::vector<Task> all_tasks() {
  return {Task::Reach, Task::Push, Task::OpenSlider, Task::CloseSlider};
}

TaskSpec TaskSpec::make(Task t) {
  TaskSpec s;
  s.id = t;
  switch (t) {
    case Task::Reach:
      s.horizon = 60;
      s.success_radius = 0.07f;
      break;
    case Task::Push:
      s.horizon = 80;
      s.success_radius = 0.10f;
      break;
    case Task::OpenSlider:
    case Task::CloseSlider:
      s.horizon = 70;
      s.success_radius = 0.0f;  // threshold on handle x instead
      break;
  }
  return s;
}

EnvState ToyEnv::reset(std::uint64_t seed, core::FrameImage* obs) const {
  core::Rng rng(core::fanout(seed, "env:" + task_name(spec.id)));
  EnvState st;
  // Moderate per-task layout bands (a handful of demos can cover them);
  // success tolerances still demand resolving the in-band variation.
  st.effector = {static_cast<float>(rng.range(0.10, 0.40)),
                 static_cast<float>(rng.range(0.15, 0.85))};
  switch (spec.id) {
    case Task::Reach: {
      st.object = {static_cast<float>(rng.range(0.50, 0.88)),
                   static_cast<float>(rng.range(0.18, 0.82))};
      st.goal = st.object;
      break;
    }
    case Task::Push: {
      st.effector = {static_cast<float>(rng.range(0.08, 0.25)),
                     static_cast<float>(rng.range(0.15, 0.85))};
      st.object = {static_cast<float>(rng.range(0.45, 0.70)),
                   static_cast<float>(rng.range(0.30, 0.70))};
      float dx = static_cast<float>(rng.range(0.15, 0.28)) *
                 (rng.bernoulli(0.7) ? 1.f : -1.f);
      float dy = static_cast<float>(rng.range(-0.24, 0.24));
      st.goal = {clampf(st.object[0] + dx, 0.15f, 0.88f),
                 clampf(st.object[1] + dy, 0.15f, 0.88f)};
      break;
    }
    case Task::OpenSlider: {
      // Track height varies per episode; handle rides on it. The effector
      // starts across the field so demos show a full approach.
      float track_y = static_cast<float>(rng.range(0.28, 0.76));
      st.object = {static_cast<float>(rng.range(kTrackX0 + kHandleHalf, 0.45)), track_y};
      // Drag target is the track end, past the open threshold.
      st.goal = {kTrackX1 - kHandleHalf, track_y};
      break;
    }
    case Task::CloseSlider: {
      float track_y = static_cast<float>(rng.range(0.28, 0.76));
      st.object = {static_cast<float>(rng.range(0.55, kTrackX1 - kHandleHalf)), track_y};
      st.goal = {kTrackX0 + kHandleHalf, track_y};
      st.effector = {static_cast<float>(rng.range(0.60, 0.90)),
                     static_cast<float>(rng.range(0.15, 0.85))};
      break;
    }
  }
  st.rng_state = rng.state;
  if (obs) *obs = render(st);
  return st;
}

bool ToyEnv::success_predicate(const EnvState& st) const {
  switch (spec.id) {
    case Task::Reach: return dist(st.effector, st.goal) < spec.success_radius;
    case Task::Push: return dist(st.object, st.goal) < spec.success_radius;
    case Task::OpenSlider: return st.object[0] >= kSliderOpenX;
    case Task::CloseSlider: return st.object[0] <= kSliderClosedX;
  }
  return false;
}

StepResult ToyEnv::step(EnvState& st, const Action& action, core::FrameImage* obs) const {
  Action a{clampf(action[0], -1.f, 1.f), clampf(action[1], -1.f, 1.f)};
  Vec2 before = st.effector;
  // Grab-then-move: contact is decided from the pre-move pose, so a dragging
  // effector keeps its grip while both move by the same delta.
  bool contact = dist(before, st.object) < (spec.id == Task::Push ? kContactR : kGrabR);
  st.effector[0] = clampf(st.effector[0] + a[0] * kMaxStep, 0.05f, 0.95f);
  st.effector[1] = clampf(st.effector[1] + a[1] * kMaxStep, 0.05f, 0.95f);
  Vec2 delta{st.effector[0] - before[0], st.effector[1] - before[1]};

  switch (spec.id) {
    case Task::Reach:
      break;
    case Task::Push:
      if (contact) {
        st.object[0] = clampf(st.object[0] + delta[0], 0.05f, 0.95f);
        st.object[1] = clampf(st.object[1] + delta[1], 0.05f, 0.95f);
      }
      break;
    case Task::OpenSlider:
    case Task::CloseSlider:
      if (contact)
        st.object[0] = clampf(st.object[0] + delta[0], kTrackX0 + kHandleHalf,
                              kTrackX1 - kHandleHalf);
      break;
  }

  ++st.step_count;
  StepResult r;
  if (success_predicate(st)) st.success = true;
  r.success = st.success;
  r.done = st.success || st.step_count >= spec.horizon;
  if (obs) *obs = render(st);
  return r;
}

core::FrameImage ToyEnv::render(const EnvState& st) const {
  core::Canvas cv(render_cfg.h, render_cfg.w);
  cv.fill({kBg, kBg, kBg});
  switch (spec.id) {
    case Task::Reach:
      cv.disc(st.goal[0], st.goal[1], 0.055f, kTargetColor);
      break;
    case Task::Push:
      cv.ring(st.goal[0], st.goal[1], 0.06f, 0.035f, kGoalColor);
      cv.rect(st.object[0], st.object[1], kBlockHalf, kBlockHalf, kBlockColor);
      break;
    case Task::OpenSlider:
    case Task::CloseSlider:
      cv.rect((kTrackX0 + kTrackX1) * 0.5f, st.goal[1], (kTrackX1 - kTrackX0) * 0.5f, 0.012f,
              kTrackColor);
      cv.rect(st.object[0], st.object[1], kHandleHalf, kHandleHalf, kHandleColor);
      break;
  }
  cv.disc(st.effector[0], st.effector[1], kEffectorR, kEffectorColor);
  core::FrameImage f = core::to_float(cv.snapshot());
  f.clip_id = "env:" + task_name(spec.id);
  f.frame_index = st.step_count;
  return f;
}

Action scripted_expert(const EnvState& st, const TaskSpec& spec) {
  // Proportional controller: ramps down inside kExpertBand, saturates outside.
  auto toward = [](const Vec2& delta) {
    Action a{delta[0] / kExpertBand, delta[1] / kExpertBand};
    a[0] = clampf(a[0], -1.f, 1.f);
    a[1] = clampf(a[1], -1.f, 1.f);
    return a;
  };
  // Once in contact the object moves with the effector (frozen offset), so
  // the expert switches to the drag vector at exactly the contact radius.
  switch (spec.id) {
    case Task::Reach:
      return toward({st.goal[0] - st.effector[0], st.goal[1] - st.effector[1]});
    case Task::Push: {
      if (dist(st.effector, st.object) < kContactR)
        return toward({st.goal[0] - st.object[0], st.goal[1] - st.object[1]});
      return toward({st.object[0] - st.effector[0], st.object[1] - st.effector[1]});
    }
    case Task::OpenSlider:
    case Task::CloseSlider: {
      if (dist(st.effector, st.object) < kGrabR)
        return toward({st.goal[0] - st.object[0], st.object[1] - st.effector[1]});
      return toward({st.object[0] - st.effector[0], st.object[1] - st.effector[1]});
    }
  }
  return {0.f, 0.f};
}

std::vector<Demonstration> collect_demos(const TaskSpec& spec, int n, std::uint64_t seed,
                                         RenderConfig rc) {
  if (n < 1) throw std::invalid_argument("collect_demos: n must be >= 1");
  ToyEnv env(spec, rc);
  std::vector<Demonstration> demos;
  demos.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Demonstration d;
    d.task = spec.id;
    core::FrameImage obs;
    EnvState st = env.reset(core::fanout(seed, "demo", static_cast<std::uint64_t>(i)), &obs);
    // Exploration noise perturbs the executed action so demos visit states
    // off the nominal path; the stored supervision target is the expert's
    // clean corrective action at each visited state.
    core::Rng noise(core::fanout(seed, "demo-noise", static_cast<std::uint64_t>(i)));
    for (int t = 0; t < spec.horizon; ++t) {
      DemoStep step;
      step.obs = obs;
      step.state = st;
      step.action = scripted_expert(st, spec);
      Action executed{
          clampf(step.action[0] + static_cast<float>(noise.range(-kDemoNoise, kDemoNoise)), -1.f,
                 1.f),
          clampf(step.action[1] + static_cast<float>(noise.range(-kDemoNoise, kDemoNoise)), -1.f,
                 1.f)};
      auto r = env.step(st, executed, &obs);
      d.steps.push_back(std::move(step));
      if (r.done) {
        d.success = r.success;
        break;
      }
    }
    if (!d.success)
      throw std::runtime_error("collect_demos: scripted expert failed on task " +
                               task_name(spec.id) + " (environment regression)");
    demos.push_back(std::move(d));
  }
  return demos;
}

namespace {
void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f32(std::string& s, float v) {
  char b[4];
  std::memcpy(b, &v, 4);
  s.append(b, 4);
}
}  // namespace

void save_demos(const std::vector<Demonstration>& demos, const std::string& path) {
  std::string buf;
  buf.append("VPDM", 4);
  put_u32(buf, 1);  // version
  put_u32(buf, static_cast<std::uint32_t>(demos.size()));
  for (const auto& d : demos) {
    std::string tn = task_name(d.task);
    put_u32(buf, static_cast<std::uint32_t>(tn.size()));
    buf.append(tn);
    buf.push_back(d.success ? 1 : 0);
    put_u32(buf, static_cast<std::uint32_t>(d.steps.size()));
    for (const auto& s : d.steps) {
      put_f32(buf, s.action[0]);
      put_f32(buf, s.action[1]);
      auto img = core::vpi_bytes(core::quantize(s.obs));
      put_u32(buf, static_cast<std::uint32_t>(img.size()));
      buf.append(reinterpret_cast<const char*>(img.data()), img.size());
    }
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("demos: cannot open for write: " + path);
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::vector<Demonstration> load_demos(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("demos: cannot open: " + path);
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  auto need = [&](std::size_t n) {
    if (pos + n > buf.size()) throw std::runtime_error("demos: truncated file");
  };
  auto u32 = [&]() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + static_cast<std::size_t>(i)])) << (8 * i);
    pos += 4;
    return v;
  };
  auto f32 = [&]() {
    need(4);
    float v;
    std::memcpy(&v, buf.data() + pos, 4);
    pos += 4;
    return v;
  };
  need(4);
  if (std::memcmp(buf.data(), "VPDM", 4) != 0) throw std::runtime_error("demos: bad magic");
  pos = 4;
  if (u32() != 1) throw std::runtime_error("demos: unsupported version");
  std::uint32_t count = u32();
  std::vector<Demonstration> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Demonstration d;
    std::uint32_t tn_len = u32();
    need(tn_len);
    d.task = parse_task(buf.substr(pos, tn_len));
    pos += tn_len;
    need(1);
    d.success = buf[pos++] != 0;
    std::uint32_t steps = u32();
    d.steps.reserve(steps);
    for (std::uint32_t s = 0; s < steps; ++s) {
      DemoStep ds;
      ds.action[0] = f32();
      ds.action[1] = f32();
      std::uint32_t len = u32();
      need(len);
      std::size_t consumed = 0;
      core::ImageU8 img = core::vpi_from_bytes(
          reinterpret_cast<const std::uint8_t*>(buf.data()) + pos, len, &consumed);
      pos += len;
      ds.obs = core::to_float(img);
      d.steps.push_back(std::move(ds));
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace viprom::env
