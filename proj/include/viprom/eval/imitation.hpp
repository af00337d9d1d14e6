// imitation.hpp - behavior cloning on frozen encoder features with a
// two-layer perceptron policy, plus the seed-averaged best-success-rate
// evaluation protocol.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "viprom/env/toyenv.hpp"
#include "viprom/nn/checkpoint.hpp"
#include "viprom/nn/heads.hpp"

namespace viprom::eval {

struct BCConfig {
  int steps = 20000;  // paper-faithful default
  int batch = 32;
  float lr = 1e-3f;
  float weight_decay = 1e-3f;  // decoupled L2 on the policy
  float feature_noise = 0.0f;  // train-time noise on standardized features
  int n_demos = 5;
  int eval_every = 1000;
  int eval_episodes = 20;
  int hidden = 256;
  bool toy = false;  // shrinks steps to <= 5000

  int effective_steps() const { return toy ? std::min(steps, 5000) : steps; }
  nlohmann::ordered_json to_json() const;
  static BCConfig from_json(const nlohmann::json& j);
  void validate() const;
};

struct FeatureExtractor {
  virtual ~FeatureExtractor() = default;
  virtual int dim() const = 0;
  virtual std::vector<float> features(const core::FrameImage& obs, const env::EnvState& state) = 0;
};

// Frozen-encoder features from pixels.
struct EncoderFeatures final : FeatureExtractor {
  nn::Encoder encoder;
  explicit EncoderFeatures(const nn::Checkpoint& ck) : encoder(nn::Encoder::from_checkpoint(ck)) {}
  int dim() const override { return encoder.cfg.embedding_dim; }
  std::vector<float> features(const core::FrameImage& obs, const env::EnvState& state) override;
};

// Ground-truth state features (upper-bound control).
struct OracleFeatures final : FeatureExtractor {
  int dim() const override { return 6; }
  std::vector<float> features(const core::FrameImage& obs, const env::EnvState& state) override;
};

struct Policy {
  nn::Sequential<float> net;  // two affine layers, tanh between
  int in_dim = 0, out_dim = 2;
  // Input standardization fitted on demo features (identity when empty).
  std::vector<float> in_mean, in_scale;

  core::TensorF standardize(const core::TensorF& feats) const {
    if (in_mean.empty()) return feats;
    core::TensorF out = feats;
    for (int i = 0; i < out.dim(0); ++i)
      for (int j = 0; j < out.dim(1); ++j)
        out.at2(i, j) = (out.at2(i, j) - in_mean[static_cast<std::size_t>(j)]) *
                        in_scale[static_cast<std::size_t>(j)];
    return out;
  }

  core::TensorF act(const core::TensorF& feats) { return net.forward(standardize(feats), false); }
};

Policy make_policy(int in_dim, int hidden, std::uint64_t seed);

struct BCTracePoint {
  int step = 0;
  float mse = 0.f;
  double success = -1.0;  // set at evaluation snapshots
};

struct BCResult {
  Policy policy;
  double best_success = 0.0;
  std::vector<BCTracePoint> trace;
};

// Minimizes mean squared action error over demo pairs with Adam; the encoder
// behind `features` is never updated (unfreeze_control exists only as a
// negative control for the freeze contract tests).
BCResult bc_train(FeatureExtractor& features, const std::vector<env::Demonstration>& demos,
                  const env::TaskSpec& spec, const BCConfig& cfg, std::uint64_t seed,
                  env::RenderConfig rc = {}, bool unfreeze_control = false);

double evaluate(Policy& policy, FeatureExtractor& features, const env::TaskSpec& spec,
                int episodes, std::uint64_t seed, env::RenderConfig rc = {});

struct EvalCell {
  std::string task;
  std::uint64_t seed = 0;
  double best_success = 0.0;
  std::string trace_path;
};

struct EvalReport {
  std::string encoder_fingerprint;
  std::string algorithm = "bc";
  std::vector<std::uint64_t> seeds;
  std::string config_fingerprint;
  std::vector<EvalCell> cells;
  double aggregate = 0.0;

  nlohmann::ordered_json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static EvalReport load(const std::string& path);
};

// Paper metric: mean over the task x seed matrix of per-run maxima.
double best_of_trace(const std::vector<double>& periodic_success);
double aggregate_cells(const std::vector<double>& best_per_cell);

inline const std::vector<std::uint64_t> kProtocolSeeds = {100, 125, 150};

EvalReport run_protocol(const nn::Checkpoint& ckpt, const std::vector<env::Task>& tasks,
                        const std::vector<std::uint64_t>& seeds, const BCConfig& cfg,
                        const std::string& out_dir, env::RenderConfig rc = {});

}  // namespace viprom::eval
