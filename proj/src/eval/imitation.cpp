#include "viprom/eval/imitation.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "viprom/nn/losses.hpp"
#include "viprom/nn/optim.hpp"

namespace fs = std::filesystem;

namespace viprom::eval {

using core::TensorF;

nlohmann::ordered_json BCConfig::to_json() const {
  return {{"steps", steps},         {"batch", batch},
          {"lr", lr},               {"weight_decay", weight_decay},
          {"feature_noise", feature_noise},
          {"n_demos", n_demos},     {"eval_every", eval_every},
          {"eval_episodes", eval_episodes}, {"hidden", hidden},
          {"toy", toy}};
}

BCConfig BCConfig::from_json(const nlohmann::json& j) {
  BCConfig c;
  c.steps = j.value("steps", c.steps);
  c.batch = j.value("batch", c.batch);
  c.lr = j.value("lr", c.lr);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.feature_noise = j.value("feature_noise", c.feature_noise);
  c.n_demos = j.value("n_demos", c.n_demos);
  c.eval_every = j.value("eval_every", c.eval_every);
  c.eval_episodes = j.value("eval_episodes", c.eval_episodes);
  c.hidden = j.value("hidden", c.hidden);
  c.toy = j.value("toy", c.toy);
  c.validate();
  return c;
}

void BCConfig::validate() const {
  if (steps <= 0 || batch <= 0 || n_demos <= 0 || eval_every <= 0 || eval_episodes <= 0 ||
      hidden <= 0 || !(lr > 0) || weight_decay < 0)
    throw std::invalid_argument("bc config: all fields must be positive");
}

std::vector<float> EncoderFeatures::features(const core::FrameImage& obs,
                                             const env::EnvState& state) {
  (void)state;
  TensorF e = encoder.encode(std::vector<core::FrameImage>{obs}, false);
  std::vector<float> out(static_cast<std::size_t>(e.dim(1)));
  for (int j = 0; j < e.dim(1); ++j) out[static_cast<std::size_t>(j)] = e.at2(0, j);
  return out;
}

std::vector<float> OracleFeatures::features(const core::FrameImage& obs,
                                            const env::EnvState& state) {
  (void)obs;
  return {state.effector[0], state.effector[1], state.object[0],
          state.object[1], state.goal[0],     state.goal[1]};
}

Policy make_policy(int in_dim, int hidden, std::uint64_t seed) {
  Policy p;
  p.in_dim = in_dim;
  p.net = nn::make_head<float>(nn::HeadKind::Policy, in_dim, hidden, 2);
  core::Rng rng(core::fanout(seed, "policy-init"));
  p.net.init(rng);
  return p;
}

double evaluate(Policy& policy, FeatureExtractor& features, const env::TaskSpec& spec,
                int episodes, std::uint64_t seed, env::RenderConfig rc) {
  if (episodes < 1) throw std::invalid_argument("evaluate: episodes must be >= 1");
  env::ToyEnv e(spec, rc);
  int hits = 0;
  for (int ep = 0; ep < episodes; ++ep) {
    core::FrameImage obs;
    env::EnvState st = e.reset(core::fanout(seed, "episode", static_cast<std::uint64_t>(ep)), &obs);
    for (int t = 0; t < spec.horizon; ++t) {
      auto f = features.features(obs, st);
      TensorF x({1, static_cast<int>(f.size())});
      for (std::size_t j = 0; j < f.size(); ++j) x.at(static_cast<std::int64_t>(j)) = f[j];
      TensorF a = policy.act(x);
      auto r = e.step(st, {a.at2(0, 0), a.at2(0, 1)}, &obs);
      if (r.done) break;
    }
    if (st.success) ++hits;
  }
  return static_cast<double>(hits) / episodes;
}

BCResult bc_train(FeatureExtractor& features, const std::vector<env::Demonstration>& demos,
                  const env::TaskSpec& spec, const BCConfig& cfg, std::uint64_t seed,
                  env::RenderConfig rc, bool unfreeze_control) {
  cfg.validate();
  if (demos.empty()) throw std::invalid_argument("bc_train: no demonstrations");

  auto* enc_features = dynamic_cast<EncoderFeatures*>(&features);
  if (unfreeze_control && !enc_features)
    throw std::invalid_argument("bc_train: unfreeze control requires encoder features");

  // Flatten demo steps.
  std::vector<const env::DemoStep*> pairs;
  for (const auto& d : demos)
    for (const auto& s : d.steps) pairs.push_back(&s);
  int n = static_cast<int>(pairs.size());
  if (n == 0) throw std::invalid_argument("bc_train: demonstrations have no steps");

  int dim = features.dim();
  // Demo features; the frozen path trains on this cache directly.
  TensorF feats({n, dim});
  for (int i = 0; i < n; ++i) {
    auto f = features.features(pairs[static_cast<std::size_t>(i)]->obs,
                               pairs[static_cast<std::size_t>(i)]->state);
    for (int j = 0; j < dim; ++j) feats.at2(i, j) = f[static_cast<std::size_t>(j)];
  }

  Policy policy = make_policy(dim, cfg.hidden, seed);
  // Standardize inputs with demo statistics; the policy applies the same
  // transform at evaluation time.
  policy.in_mean.assign(static_cast<std::size_t>(dim), 0.f);
  policy.in_scale.assign(static_cast<std::size_t>(dim), 1.f);
  for (int j = 0; j < dim; ++j) {
    double mu = 0;
    for (int i = 0; i < n; ++i) mu += feats.at2(i, j);
    mu /= n;
    double var = 0;
    for (int i = 0; i < n; ++i) var += (feats.at2(i, j) - mu) * (feats.at2(i, j) - mu);
    var /= n;
    policy.in_mean[static_cast<std::size_t>(j)] = static_cast<float>(mu);
    policy.in_scale[static_cast<std::size_t>(j)] =
        1.0f / std::max(1e-3f, static_cast<float>(std::sqrt(var)));
  }
  auto params = policy.net.params("policy.");
  std::vector<nn::ParamRef<float>> enc_params;
  if (unfreeze_control) {
    enc_params = enc_features->encoder.net.params("enc.");
    params.insert(params.end(), enc_params.begin(), enc_params.end());
  }
  nn::Adam<float> opt(params);
  core::Rng rng(core::fanout(seed, "bc-order"));

  int steps = cfg.effective_steps();
  int batch = std::min(cfg.batch, n);
  BCResult res;
  std::uint64_t eval_seed = core::fanout(seed, "bc-eval:" + env::task_name(spec.id));

  for (int step = 0; step < steps; ++step) {
    std::vector<int> idx(static_cast<std::size_t>(batch));
    for (auto& v : idx) v = rng.uniform_int(n);

    TensorF x({batch, dim});
    TensorF target({batch, 2});
    std::vector<core::FrameImage> batch_frames;
    if (unfreeze_control) {
      batch_frames.reserve(static_cast<std::size_t>(batch));
      for (int i = 0; i < batch; ++i)
        batch_frames.push_back(pairs[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])]->obs);
      x = enc_features->encoder.net.forward(nn::batch_from_frames<float>(batch_frames), true);
    } else {
      for (int i = 0; i < batch; ++i)
        for (int j = 0; j < dim; ++j)
          x.at2(i, j) = feats.at2(idx[static_cast<std::size_t>(i)], j);
    }
    x = policy.standardize(x);
    if (cfg.feature_noise > 0 && !unfreeze_control)
      for (std::int64_t ii = 0; ii < x.size(); ++ii)
        x.at(ii) += static_cast<float>(rng.normal()) * cfg.feature_noise;
    for (int i = 0; i < batch; ++i) {
      const auto* p = pairs[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
      target.at2(i, 0) = p->action[0];
      target.at2(i, 1) = p->action[1];
    }

    policy.net.zero_grad();
    if (unfreeze_control) enc_features->encoder.net.zero_grad();
    TensorF pred = policy.net.forward(x, true);
    auto out = nn::mse_loss<float>(pred, target);
    TensorF dx = policy.net.backward(out.grad);
    if (unfreeze_control) {
      // Undo the standardization scale before pushing into the encoder.
      for (int i = 0; i < dx.dim(0); ++i)
        for (int j = 0; j < dim; ++j)
          dx.at2(i, j) *= policy.in_scale[static_cast<std::size_t>(j)];
      enc_features->encoder.net.backward(dx);
    }
    opt.step(params, cfg.lr);
    if (cfg.weight_decay > 0)
      for (auto& p : params)
        for (auto& w : *p.w) w -= cfg.lr * cfg.weight_decay * w;

    bool do_eval = (step + 1) % cfg.eval_every == 0 || step + 1 == steps;
    BCTracePoint tp;
    tp.step = step + 1;
    tp.mse = out.value;
    if (do_eval) {
      tp.success = evaluate(policy, features, spec, cfg.eval_episodes, eval_seed, rc);
      res.best_success = std::max(res.best_success, tp.success);
      res.trace.push_back(tp);
    } else if ((step + 1) % 50 == 0) {
      res.trace.push_back(tp);
    }
  }
  res.policy = std::move(policy);
  return res;
}

double best_of_trace(const std::vector<double>& periodic_success) {
  double best = 0.0;
  for (double v : periodic_success) best = std::max(best, v);
  return best;
}

double aggregate_cells(const std::vector<double>& best_per_cell) {
  if (best_per_cell.empty()) return 0.0;
  double s = 0.0;
  for (double v : best_per_cell) s += v;
  return s / static_cast<double>(best_per_cell.size());
}

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["encoder_fingerprint"] = encoder_fingerprint;
  j["algorithm"] = algorithm;
  j["seeds"] = seeds;
  j["config_fingerprint"] = config_fingerprint;
  auto cj = nlohmann::ordered_json::array();
  for (const auto& c : cells)
    cj.push_back({{"task", c.task},
                  {"seed", c.seed},
                  {"best_success", c.best_success},
                  {"trace_path", c.trace_path}});
  j["cells"] = std::move(cj);
  j["aggregate"] = aggregate;
  return j;
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
  EvalReport r;
  r.encoder_fingerprint = j.at("encoder_fingerprint").get<std::string>();
  r.algorithm = j.at("algorithm").get<std::string>();
  r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  r.config_fingerprint = j.at("config_fingerprint").get<std::string>();
  for (const auto& cj : j.at("cells")) {
    EvalCell c;
    c.task = cj.at("task").get<std::string>();
    c.seed = cj.at("seed").get<std::uint64_t>();
    c.best_success = cj.at("best_success").get<double>();
    c.trace_path = cj.at("trace_path").get<std::string>();
    r.cells.push_back(std::move(c));
  }
  r.aggregate = j.at("aggregate").get<double>();
  return r;
}

void EvalReport::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("eval report: cannot open for write: " + path);
  f << to_json().dump(2) << "\n";
}

EvalReport EvalReport::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("eval report: cannot open: " + path);
  return from_json(nlohmann::json::parse(f));
}

EvalReport run_protocol(const nn::Checkpoint& ckpt, const std::vector<env::Task>& tasks,
                        const std::vector<std::uint64_t>& seeds, const BCConfig& cfg,
                        const std::string& out_dir, env::RenderConfig rc) {
  if (tasks.empty() || seeds.empty())
    throw std::invalid_argument("run_protocol: tasks and seeds must be non-empty");
  fs::create_directories(fs::path(out_dir) / "traces");

  EvalReport report;
  report.encoder_fingerprint = ckpt.param_hash();
  report.seeds = seeds;
  report.config_fingerprint = core::content_fingerprint(cfg.to_json().dump());

  EncoderFeatures features(ckpt);
  if (rc.h != ckpt.config.in_h || rc.w != ckpt.config.in_w) {
    rc.h = ckpt.config.in_h;
    rc.w = ckpt.config.in_w;
  }

  std::vector<double> bests;
  for (const auto& task : tasks) {
    env::TaskSpec spec = env::TaskSpec::make(task);
    for (std::uint64_t seed : seeds) {
      auto demos = env::collect_demos(
          spec, cfg.n_demos, core::fanout(seed, "demos:" + env::task_name(task)), rc);
      auto res = bc_train(features, demos, spec, cfg,
                          core::fanout(seed, "bc:" + env::task_name(task)), rc);

      std::string trace_rel =
          "traces/" + env::task_name(task) + "_" + std::to_string(seed) + ".trace.jsonl";
      {
        std::ofstream tf(fs::path(out_dir) / trace_rel, std::ios::binary);
        for (const auto& tp : res.trace) {
          nlohmann::ordered_json rec = {{"step", tp.step}, {"mse", tp.mse}};
          if (tp.success >= 0) rec["success"] = tp.success;
          tf << rec.dump() << "\n";
        }
      }

      EvalCell cell;
      cell.task = env::task_name(task);
      cell.seed = seed;
      cell.best_success = res.best_success;
      cell.trace_path = trace_rel;
      report.cells.push_back(std::move(cell));
      bests.push_back(res.best_success);
    }
  }
  report.aggregate = aggregate_cells(bests);
  report.save((fs::path(out_dir) / "report.json").string());
  return report;
}

}  // namespace viprom::eval
