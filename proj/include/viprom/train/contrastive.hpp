// contrastive.hpp - stage-1 momentum-contrastive pre-training with the
// InfoNCE objective. Query tower: encoder + projection + prediction heads;
// key tower: momentum copies of encoder + projection, never touched by the
// optimizer, only by EMA updates.
#pragma once

#include <cstdint>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "viprom/data/augment.hpp"
#include "viprom/data/framestore.hpp"
#include "viprom/io/metrics.hpp"
#include "viprom/nn/checkpoint.hpp"
#include "viprom/nn/heads.hpp"
#include "viprom/nn/losses.hpp"
#include "viprom/nn/optim.hpp"

namespace viprom::train {

struct ContrastiveConfig {
  int epochs = 10;
  int batch = 64;
  float tau = 0.2f;
  float momentum = 0.99f;
  float lr = 1e-3f;
  float warmup_frac = 0.1f;
  int proj_hidden = 128;
  int proj_dim = 64;
  int pred_hidden = 128;
  std::uint64_t seed = 1;
  data::AugmentConfig aug;

  nlohmann::ordered_json to_json() const;
  static ContrastiveConfig from_json(const nlohmann::json& j);
};

struct ContrastiveState {
  nn::EncoderConfig enc_cfg;
  float tau = 0.2f;
  float momentum = 0.99f;
  std::int64_t step = 0;

  nn::Sequential<float> q_enc, q_proj, q_pred;
  nn::L2NormRows<float> q_l2{"l2"};
  nn::Sequential<float> k_enc, k_proj;
  nn::L2NormRows<float> k_l2{"l2"};
  std::unique_ptr<nn::Adam<float>> opt;

  std::vector<nn::ParamRef<float>> q_all;  // optimizer targets (enc+proj+pred)
  std::vector<nn::ParamRef<float>> q_ema;  // enc+proj, aligned with k_all
  std::vector<nn::ParamRef<float>> k_all;
};

struct ContrastiveMetrics {
  float loss = 0.f;
  float pos_sim = 0.f;
};

ContrastiveState init_contrastive(const nn::EncoderConfig& enc_cfg, const ContrastiveConfig& cfg);

// One optimizer update on the query tower with the symmetrized InfoNCE loss,
// then one momentum update of the key tower.
ContrastiveMetrics contrastive_step(ContrastiveState& state,
                                    const std::vector<core::FrameImage>& views_a,
                                    const std::vector<core::FrameImage>& views_b, float lr);

nn::Checkpoint train_contrastive(const data::Corpus& corpus, const nn::EncoderConfig& enc_cfg,
                                 const ContrastiveConfig& cfg,
                                 io::MetricsWriter* metrics = nullptr);

}  // namespace viprom::train
