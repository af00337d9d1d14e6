#include "viprom/train/contrastive.hpp"

#include <cmath>
#include <stdexcept>

namespace viprom::train {

using core::TensorF;

nlohmann::ordered_json ContrastiveConfig::to_json() const {
  return {{"epochs", epochs},
          {"batch", batch},
          {"tau", tau},
          {"momentum", momentum},
          {"lr", lr},
          {"warmup_frac", warmup_frac},
          {"proj_hidden", proj_hidden},
          {"proj_dim", proj_dim},
          {"pred_hidden", pred_hidden},
          {"seed", seed},
          {"aug",
           {{"min_scale", aug.min_scale},
            {"max_scale", aug.max_scale},
            {"flip_prob", aug.flip_prob},
            {"brightness", aug.brightness},
            {"contrast", aug.contrast},
            {"channel", aug.channel},
            {"blur_prob", aug.blur_prob}}}};
}

ContrastiveConfig ContrastiveConfig::from_json(const nlohmann::json& j) {
  ContrastiveConfig c;
  c.epochs = j.value("epochs", c.epochs);
  c.batch = j.value("batch", c.batch);
  c.tau = j.value("tau", c.tau);
  c.momentum = j.value("momentum", c.momentum);
  c.lr = j.value("lr", c.lr);
  c.warmup_frac = j.value("warmup_frac", c.warmup_frac);
  c.proj_hidden = j.value("proj_hidden", c.proj_hidden);
  c.proj_dim = j.value("proj_dim", c.proj_dim);
  c.pred_hidden = j.value("pred_hidden", c.pred_hidden);
  c.seed = j.value("seed", c.seed);
  if (j.contains("aug")) {
    const auto& a = j.at("aug");
    c.aug.min_scale = a.value("min_scale", c.aug.min_scale);
    c.aug.max_scale = a.value("max_scale", c.aug.max_scale);
    c.aug.flip_prob = a.value("flip_prob", c.aug.flip_prob);
    c.aug.brightness = a.value("brightness", c.aug.brightness);
    c.aug.contrast = a.value("contrast", c.aug.contrast);
    c.aug.channel = a.value("channel", c.aug.channel);
    c.aug.blur_prob = a.value("blur_prob", c.aug.blur_prob);
  }
  return c;
}

ContrastiveState init_contrastive(const nn::EncoderConfig& enc_cfg, const ContrastiveConfig& cfg) {
  if (!(cfg.tau > 0)) throw std::invalid_argument("contrastive: tau must be > 0");
  if (cfg.momentum < 0 || cfg.momentum > 1)
    throw std::invalid_argument("contrastive: momentum must be in [0,1]");

  ContrastiveState st;
  st.enc_cfg = enc_cfg;
  st.tau = cfg.tau;
  st.momentum = cfg.momentum;

  st.q_enc = nn::make_encoder<float>(enc_cfg);
  st.q_proj = nn::make_head<float>(nn::HeadKind::Projection, enc_cfg.embedding_dim,
                                   cfg.proj_hidden, cfg.proj_dim);
  st.q_pred =
      nn::make_head<float>(nn::HeadKind::Prediction, cfg.proj_dim, cfg.pred_hidden, cfg.proj_dim);
  st.k_enc = nn::make_encoder<float>(enc_cfg);
  st.k_proj = nn::make_head<float>(nn::HeadKind::Projection, enc_cfg.embedding_dim,
                                   cfg.proj_hidden, cfg.proj_dim);

  core::Rng rng(core::fanout(cfg.seed, "contrastive-init"));
  st.q_enc.init(rng);
  st.q_proj.init(rng);
  st.q_pred.init(rng);

  st.q_all = st.q_enc.params("enc.");
  {
    auto p = st.q_proj.params("proj.");
    st.q_all.insert(st.q_all.end(), p.begin(), p.end());
    auto pr = st.q_pred.params("pred.");
    st.q_all.insert(st.q_all.end(), pr.begin(), pr.end());
  }
  st.q_ema = st.q_enc.params("enc.");
  {
    auto p = st.q_proj.params("proj.");
    st.q_ema.insert(st.q_ema.end(), p.begin(), p.end());
  }
  st.k_all = st.k_enc.params("enc.");
  {
    auto p = st.k_proj.params("proj.");
    st.k_all.insert(st.k_all.end(), p.begin(), p.end());
  }

  // Key tower starts as an exact copy of the query encoder + projection.
  nn::copy_params(st.k_all, st.q_ema);

  st.opt = std::make_unique<nn::Adam<float>>(st.q_all);
  return st;
}

namespace {

TensorF key_forward(ContrastiveState& st, const std::vector<core::FrameImage>& views) {
  TensorF emb = st.k_enc.forward(nn::batch_from_frames<float>(views), false);
  TensorF p = st.k_proj.forward(emb, false);
  TensorF z;
  st.k_l2.forward(p, z, false);
  return z;
}

// Forward + backward of one query branch; returns (loss, pos_sim numerator).
std::pair<float, float> query_branch(ContrastiveState& st,
                                     const std::vector<core::FrameImage>& views,
                                     const TensorF& keys, float grad_scale) {
  TensorF emb = st.q_enc.forward(nn::batch_from_frames<float>(views), true);
  TensorF p = st.q_proj.forward(emb, true);
  TensorF q = st.q_pred.forward(p, true);
  TensorF z;
  st.q_l2.forward(q, z, true);

  auto out = nn::info_nce<float>(z, keys, st.tau);
  float pos = 0.f;
  int b = z.dim(0), d = z.dim(1);
  for (int i = 0; i < b; ++i) {
    float s = 0.f;
    for (int j = 0; j < d; ++j) s += z.at2(i, j) * keys.at2(i, j);
    pos += s;
  }
  pos /= static_cast<float>(b);

  TensorF dz = out.grad;
  for (std::int64_t i = 0; i < dz.size(); ++i) dz.at(i) *= grad_scale;
  TensorF dq;
  st.q_l2.backward(dz, dq);
  TensorF dp = st.q_pred.backward(dq);
  TensorF demb = st.q_proj.backward(dp);
  st.q_enc.backward(demb);
  return {out.value, pos};
}

}  // namespace

ContrastiveMetrics contrastive_step(ContrastiveState& st,
                                    const std::vector<core::FrameImage>& views_a,
                                    const std::vector<core::FrameImage>& views_b, float lr) {
  if (views_a.size() != views_b.size() || views_a.size() < 2)
    throw std::invalid_argument("contrastive_step: need matched view lists of size >= 2");

  st.q_enc.zero_grad();
  st.q_proj.zero_grad();
  st.q_pred.zero_grad();

  TensorF ka = key_forward(st, views_a);
  TensorF kb = key_forward(st, views_b);

  auto [la, pa] = query_branch(st, views_a, kb, 0.5f);
  auto [lb, pb] = query_branch(st, views_b, ka, 0.5f);

  ContrastiveMetrics m;
  m.loss = 0.5f * (la + lb);
  m.pos_sim = 0.5f * (pa + pb);
  if (!std::isfinite(m.loss))
    throw std::runtime_error("contrastive_step: non-finite loss at step " +
                             std::to_string(st.step));

  st.opt->step(st.q_all, lr);
  nn::momentum_update(st.k_all, st.q_ema, st.momentum);
  ++st.step;
  return m;
}

nn::Checkpoint train_contrastive(const data::Corpus& corpus, const nn::EncoderConfig& enc_cfg,
                                 const ContrastiveConfig& cfg, io::MetricsWriter* metrics) {
  const auto& manifest = corpus.manifest;
  if (manifest.clips.empty()) throw std::invalid_argument("train_contrastive: empty manifest");

  // All retained frame refs (clip index, position within clip).
  std::vector<std::pair<int, int>> refs;
  for (int ci = 0; ci < static_cast<int>(manifest.clips.size()); ++ci) {
    const auto& clip = manifest.clips[static_cast<std::size_t>(ci)];
    for (std::size_t r = 0; r < clip.retained_frame_indices.size(); ++r) {
      int pos = static_cast<int>(r) * manifest.downsample_factor;
      refs.emplace_back(ci, pos);
    }
  }
  if (refs.size() < 2) throw std::invalid_argument("train_contrastive: need at least 2 frames");

  int batch = std::min<int>(cfg.batch, static_cast<int>(refs.size()));
  if (batch < 2) batch = 2;
  std::int64_t steps_per_epoch = static_cast<std::int64_t>(refs.size()) / batch;
  if (steps_per_epoch == 0) steps_per_epoch = 1;
  std::int64_t total_steps = steps_per_epoch * cfg.epochs;
  std::int64_t warmup = static_cast<std::int64_t>(std::llround(cfg.warmup_frac * total_steps));

  ContrastiveState st = init_contrastive(enc_cfg, cfg);
  core::Rng order_rng(core::fanout(cfg.seed, "contrastive-order"));

  std::vector<core::FrameImage> va(static_cast<std::size_t>(batch)),
      vb(static_cast<std::size_t>(batch));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    order_rng.shuffle(refs);
    for (std::int64_t s = 0; s < steps_per_epoch; ++s) {
      // Parallel view prep: each element derives from its own seed, so batch
      // composition is identical to the sequential order.
#pragma omp parallel for schedule(static) if (core::parallel_kernels())
      for (int i = 0; i < batch; ++i) {
        auto [ci, pos] = refs[static_cast<std::size_t>(s * batch + i)];
        const auto& clip = manifest.clips[static_cast<std::size_t>(ci)];
        core::FrameImage frame = corpus.store.frame(clip, pos);
        auto pair = data::augment_pair(
            frame, core::fanout(cfg.seed, "aug", static_cast<std::uint64_t>(st.step) * 100000 +
                                                     static_cast<std::uint64_t>(i)),
            cfg.aug);
        va[static_cast<std::size_t>(i)] = std::move(pair.first);
        vb[static_cast<std::size_t>(i)] = std::move(pair.second);
      }
      float lr = nn::warmup_cosine_lr(st.step, total_steps, warmup, cfg.lr);
      auto m = contrastive_step(st, va, vb, lr);
      if (metrics)
        metrics->write(st.step, {{"loss", m.loss}, {"lr", lr}, {"pos_sim", m.pos_sim}});
    }
  }

  nn::Checkpoint ck;
  ck.config = enc_cfg;
  ck.stage = nn::Stage::Contrastive;
  ck.config_fingerprint = nn::config_fingerprint_of(enc_cfg, nn::Stage::Contrastive);
  ck.rng_state = {order_rng.state, static_cast<std::uint64_t>(st.step)};
  auto refs_out = st.q_enc.params("enc.");
  ck.params = nn::snapshot_params(refs_out);
  return ck;
}

}  // namespace viprom::train
