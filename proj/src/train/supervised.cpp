#include "viprom/train/supervised.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "viprom/nn/losses.hpp"
#include "viprom/nn/optim.hpp"

namespace viprom::train {

using core::TensorF;

void save_pseudo_labels(const std::vector<PseudoLabelRecord>& records, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("pseudo-labels: cannot open for write: " + path);
  for (const auto& r : records) {
    nlohmann::ordered_json j = {{"clip_id", r.clip_id},
                                {"frame_index", r.frame_index},
                                {"label", r.label},
                                {"confidence", r.confidence},
                                {"teacher_id", r.teacher_id}};
    f << j.dump() << "\n";
  }
}

std::vector<PseudoLabelRecord> load_pseudo_labels(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("pseudo-labels: cannot open: " + path);
  std::vector<PseudoLabelRecord> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    PseudoLabelRecord r;
    r.clip_id = j.at("clip_id").get<std::string>();
    r.frame_index = j.at("frame_index").get<int>();
    r.label = j.at("label").get<int>();
    r.confidence = j.at("confidence").get<float>();
    r.teacher_id = j.at("teacher_id").get<std::string>();
    out.push_back(std::move(r));
  }
  return out;
}

OracleTeacher::OracleTeacher(const data::ClipManifest& manifest) {
  classes = manifest.meta.n_classes;
  for (const auto& clip : manifest.clips) {
    if (!clip.label_hint)
      throw std::invalid_argument("oracle teacher: clip " + clip.clip_id + " has no label_hint");
    hints[clip.clip_id] = *clip.label_hint;
    classes = std::max(classes, *clip.label_hint + 1);
  }
  if (classes < 2) throw std::invalid_argument("oracle teacher: fewer than 2 classes");
}

void OracleTeacher::classify(const std::vector<core::FrameImage>& frames,
                             std::vector<int>& labels, std::vector<float>& confidences) {
  labels.resize(frames.size());
  confidences.resize(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    auto it = hints.find(frames[i].clip_id);
    if (it == hints.end())
      throw std::invalid_argument("oracle teacher: unknown clip " + frames[i].clip_id);
    labels[i] = it->second;
    confidences[i] = 1.0f;
  }
}

void TeacherBundle::classify(const std::vector<core::FrameImage>& frames,
                             std::vector<int>& labels, std::vector<float>& confidences) {
  labels.resize(frames.size());
  confidences.resize(frames.size());
  TensorF emb = encoder.encode(frames, false);
  TensorF logits = head.forward(emb, false);
  int c = logits.dim(1);
  for (int i = 0; i < logits.dim(0); ++i) {
    int best = 0;
    float mx = logits.at2(i, 0);
    for (int j = 1; j < c; ++j)
      if (logits.at2(i, j) > mx) {
        mx = logits.at2(i, j);
        best = j;
      }
    float sum = 0.f;
    for (int j = 0; j < c; ++j) sum += std::exp(logits.at2(i, j) - mx);
    labels[static_cast<std::size_t>(i)] = best;
    confidences[static_cast<std::size_t>(i)] = 1.0f / sum;
  }
}

nn::Checkpoint TeacherBundle::to_checkpoint() const {
  nn::Checkpoint ck;
  ck.config = encoder.cfg;
  ck.stage = nn::Stage::Supervised;
  ck.config_fingerprint = nn::config_fingerprint_of(encoder.cfg, nn::Stage::Supervised);
  auto enc_refs = const_cast<TeacherBundle*>(this)->encoder.net.params("enc.");
  ck.params = nn::snapshot_params(enc_refs);
  auto head_refs = const_cast<TeacherBundle*>(this)->head.params("head.");
  auto head_params = nn::snapshot_params(head_refs);
  ck.params.insert(ck.params.end(), head_params.begin(), head_params.end());
  return ck;
}

TeacherBundle TeacherBundle::from_checkpoint(const nn::Checkpoint& ck) {
  TeacherBundle tb;
  tb.encoder.cfg = ck.config;
  tb.encoder.net = nn::make_encoder<float>(ck.config);
  auto enc_refs = tb.encoder.net.params("enc.");
  nn::restore_params(enc_refs, ck.params, "enc.");

  int hidden = -1, classes = -1;
  for (const auto& [name, data] : ck.params) {
    if (name == "head.fc1.b") hidden = static_cast<int>(data.size());
    if (name == "head.fc2.b") classes = static_cast<int>(data.size());
  }
  if (hidden <= 0 || classes <= 0)
    throw std::runtime_error("teacher bundle: checkpoint has no head parameters");
  tb.classes = classes;
  tb.head = nn::make_head<float>(nn::HeadKind::ClassifierSemantics, ck.config.embedding_dim,
                                 hidden, classes);
  auto head_refs = tb.head.params("head.");
  nn::restore_params(head_refs, ck.params, "head.");
  tb.bundle_id = "fit-classifier:" + ck.param_hash();
  return tb;
}

namespace {

TensorF encode_frames_batched(nn::Sequential<float>& enc, const std::vector<core::FrameImage>& frames,
                              int batch, int emb_dim) {
  TensorF out({static_cast<int>(frames.size()), emb_dim});
  for (std::size_t start = 0; start < frames.size(); start += static_cast<std::size_t>(batch)) {
    std::size_t end = std::min(frames.size(), start + static_cast<std::size_t>(batch));
    std::vector<core::FrameImage> chunk(frames.begin() + static_cast<std::ptrdiff_t>(start),
                                        frames.begin() + static_cast<std::ptrdiff_t>(end));
    TensorF e = enc.forward(nn::batch_from_frames<float>(chunk), false);
    for (int i = 0; i < e.dim(0); ++i)
      for (int j = 0; j < emb_dim; ++j)
        out.at2(static_cast<int>(start) + i, j) = e.at2(i, j);
  }
  return out;
}

}  // namespace

TeacherBundle train_teacher(const data::Corpus& corpus, const nn::EncoderConfig& enc_cfg,
                            const TeacherFitConfig& cfg, io::MetricsWriter* metrics) {
  const auto& manifest = corpus.manifest;
  if (manifest.clips.empty()) throw std::invalid_argument("train_teacher: empty manifest");
  int classes = 0;
  std::vector<std::pair<int, int>> refs;  // (clip idx, pos)
  for (int ci = 0; ci < static_cast<int>(manifest.clips.size()); ++ci) {
    const auto& clip = manifest.clips[static_cast<std::size_t>(ci)];
    if (!clip.label_hint)
      throw std::invalid_argument("train_teacher: clip " + clip.clip_id + " has no label_hint");
    classes = std::max(classes, *clip.label_hint + 1);
    for (std::size_t r = 0; r < clip.retained_frame_indices.size(); ++r)
      refs.emplace_back(ci, static_cast<int>(r) * manifest.downsample_factor);
  }
  if (classes < 2) throw std::invalid_argument("train_teacher: need at least 2 classes");

  TeacherBundle tb;
  tb.classes = classes;
  tb.encoder.cfg = enc_cfg;
  tb.encoder.net = nn::make_encoder<float>(enc_cfg);
  tb.head =
      nn::make_head<float>(nn::HeadKind::ClassifierSemantics, enc_cfg.embedding_dim, cfg.hidden,
                           classes);
  core::Rng init_rng(core::fanout(cfg.seed, "teacher-init"));
  tb.encoder.net.init(init_rng);
  tb.head.init(init_rng);

  auto params = tb.encoder.net.params("enc.");
  {
    auto hp = tb.head.params("head.");
    params.insert(params.end(), hp.begin(), hp.end());
  }
  nn::Adam<float> opt(params);
  core::Rng rng(core::fanout(cfg.seed, "teacher-order"));

  int batch = std::min<int>(cfg.batch, static_cast<int>(refs.size()));
  for (int step = 0; step < cfg.steps; ++step) {
    std::vector<core::FrameImage> frames;
    std::vector<int> labels;
    frames.reserve(static_cast<std::size_t>(batch));
    for (int i = 0; i < batch; ++i) {
      auto [ci, pos] = refs[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(refs.size())))];
      const auto& clip = manifest.clips[static_cast<std::size_t>(ci)];
      frames.push_back(corpus.store.frame(clip, pos));
      labels.push_back(*clip.label_hint);
    }
    tb.encoder.net.zero_grad();
    tb.head.zero_grad();
    TensorF emb = tb.encoder.net.forward(nn::batch_from_frames<float>(frames), true);
    TensorF logits = tb.head.forward(emb, true);
    auto out = nn::cross_entropy<float>(logits, labels);
    TensorF demb = tb.head.backward(out.grad);
    tb.encoder.net.backward(demb);
    opt.step(params, cfg.lr);
    if (metrics) metrics->write(step, {{"loss", out.value}});
  }
  tb.bundle_id = "fit-classifier:" + tb.to_checkpoint().param_hash();
  return tb;
}

std::vector<PseudoLabelRecord> generate_pseudo_labels(Teacher& teacher,
                                                      const data::ClipManifest& manifest,
                                                      const data::FrameStore& store) {
  std::vector<PseudoLabelRecord> out;
  for (const auto& clip : manifest.clips) {
    std::vector<core::FrameImage> frames;
    frames.reserve(clip.retained_frame_indices.size());
    for (std::size_t r = 0; r < clip.retained_frame_indices.size(); ++r)
      frames.push_back(store.frame(clip, static_cast<int>(r) * manifest.downsample_factor));
    if (frames.empty()) continue;
    std::vector<int> labels;
    std::vector<float> conf;
    teacher.classify(frames, labels, conf);
    for (std::size_t i = 0; i < frames.size(); ++i) {
      PseudoLabelRecord r;
      r.clip_id = clip.clip_id;
      r.frame_index = clip.retained_frame_indices[i];
      r.label = labels[i];
      r.confidence = conf[i];
      r.teacher_id = teacher.id();
      out.push_back(std::move(r));
    }
  }
  return out;
}

nlohmann::ordered_json JointConfig::to_json() const {
  return {{"lambda", lambda},
          {"n_frames", n_frames},
          {"steps", steps},
          {"batch_vs", batch_vs},
          {"td_clips", td_clips},
          {"lr", lr},
          {"head_hidden", head_hidden},
          {"use_vs", use_vs},
          {"use_td", use_td},
          {"td_context", td_context},
          {"allow_scratch", allow_scratch},
          {"holdout_frac", holdout_frac},
          {"eval_every", eval_every},
          {"eval_order_samples", eval_order_samples},
          {"seed", seed}};
}

JointConfig JointConfig::from_json(const nlohmann::json& j) {
  JointConfig c;
  c.lambda = j.value("lambda", c.lambda);
  c.n_frames = j.value("n_frames", c.n_frames);
  c.steps = j.value("steps", c.steps);
  c.batch_vs = j.value("batch_vs", c.batch_vs);
  c.td_clips = j.value("td_clips", c.td_clips);
  c.lr = j.value("lr", c.lr);
  c.head_hidden = j.value("head_hidden", c.head_hidden);
  c.use_vs = j.value("use_vs", c.use_vs);
  c.use_td = j.value("use_td", c.use_td);
  c.td_context = j.value("td_context", c.td_context);
  c.allow_scratch = j.value("allow_scratch", c.allow_scratch);
  c.holdout_frac = j.value("holdout_frac", c.holdout_frac);
  c.eval_every = j.value("eval_every", c.eval_every);
  c.eval_order_samples = j.value("eval_order_samples", c.eval_order_samples);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

void JointConfig::validate() const {
  if (lambda < 0) throw std::invalid_argument("joint config: lambda must be >= 0");
  if (n_frames < 2) throw std::invalid_argument("joint config: n_frames must be >= 2");
  if (!use_vs && !use_td)
    throw std::invalid_argument("joint config: at least one of use_vs/use_td required");
}

bool is_holdout_clip(int clip_index, float holdout_frac) {
  if (holdout_frac <= 0.0f) return false;
  int k = std::max(2, static_cast<int>(std::lround(1.0 / holdout_frac)));
  return clip_index % k == k - 1;
}

namespace {

struct SupervisedHeads {
  nn::Sequential<float> h1;  // semantics
  nn::Sequential<float> h2;  // order
};

SupervisedEval eval_supervised(nn::Sequential<float>& enc, SupervisedHeads& heads,
                               const data::Corpus& corpus,
                               const std::map<std::pair<std::string, int>, int>& label_of,
                               const std::vector<int>& holdout_clips, const JointConfig& cfg,
                               int emb_dim) {
  SupervisedEval ev;
  const auto& manifest = corpus.manifest;

  // Pseudo-label agreement over held-out retained frames.
  std::vector<core::FrameImage> frames;
  std::vector<int> labels;
  for (int ci : holdout_clips) {
    const auto& clip = manifest.clips[static_cast<std::size_t>(ci)];
    for (std::size_t r = 0; r < clip.retained_frame_indices.size(); ++r) {
      frames.push_back(corpus.store.frame(clip, static_cast<int>(r) * manifest.downsample_factor));
      labels.push_back(label_of.at({clip.clip_id, clip.retained_frame_indices[r]}));
    }
  }
  if (!frames.empty()) {
    TensorF emb = encode_frames_batched(enc, frames, 64, emb_dim);
    TensorF logits = heads.h1.forward(emb, false);
    int correct = 0;
    for (int i = 0; i < logits.dim(0); ++i) {
      int best = 0;
      for (int j = 1; j < logits.dim(1); ++j)
        if (logits.at2(i, j) > logits.at2(i, best)) best = j;
      if (best == labels[static_cast<std::size_t>(i)]) ++correct;
    }
    ev.vs_acc = static_cast<double>(correct) / logits.dim(0);
  }

  // Frame-order accuracy over held-out clips.
  int n = cfg.n_frames;
  std::int64_t total = 0, correct = 0;
  for (int ci : holdout_clips) {
    const auto& clip = manifest.clips[static_cast<std::size_t>(ci)];
    for (int s = 0; s < cfg.eval_order_samples; ++s) {
      auto sample = data::make_order_sample(
          corpus.store, clip, n,
          core::fanout(cfg.seed, "eval-order", static_cast<std::uint64_t>(ci) * 1000 +
                                                   static_cast<std::uint64_t>(s)));
      TensorF emb = enc.forward(nn::batch_from_frames<float>(sample.frames), false);
      TensorF h2in;
      if (cfg.td_context) {
        h2in = TensorF({n, 2 * emb_dim});
        std::vector<float> mean(static_cast<std::size_t>(emb_dim), 0.f);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < emb_dim; ++j) mean[static_cast<std::size_t>(j)] += emb.at2(i, j);
        for (auto& v : mean) v /= static_cast<float>(n);
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < emb_dim; ++j) {
            h2in.at2(i, j) = emb.at2(i, j);
            h2in.at2(i, emb_dim + j) = mean[static_cast<std::size_t>(j)];
          }
        }
      } else {
        h2in = emb;
      }
      TensorF logits = heads.h2.forward(h2in, false);
      for (int i = 0; i < n; ++i) {
        int best = 0;
        for (int j = 1; j < logits.dim(1); ++j)
          if (logits.at2(i, j) > logits.at2(i, best)) best = j;
        if (best == sample.labels[static_cast<std::size_t>(i)]) ++correct;
        ++total;
      }
    }
  }
  ev.td_acc = total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  return ev;
}

}  // namespace

SupervisedResult train_supervised(const nn::Checkpoint& input, const data::Corpus& corpus,
                                  const std::vector<PseudoLabelRecord>& labels,
                                  const JointConfig& cfg, io::MetricsWriter* metrics) {
  cfg.validate();
  if (input.stage == nn::Stage::Supervised)
    throw std::invalid_argument("train_supervised: input checkpoint is already supervised");
  if (input.stage == nn::Stage::Scratch && !cfg.allow_scratch)
    throw std::invalid_argument(
        "train_supervised: input stage must be contrastive (or scratch with allow_scratch)");

  const auto& manifest = corpus.manifest;
  if (manifest.clips.empty()) throw std::invalid_argument("train_supervised: empty manifest");

  std::map<std::pair<std::string, int>, int> label_of;
  int classes = 0;
  for (const auto& r : labels) {
    label_of[{r.clip_id, r.frame_index}] = r.label;
    classes = std::max(classes, r.label + 1);
  }
  if (classes < 2) throw std::invalid_argument("train_supervised: need at least 2 label classes");

  // Every retained frame must have a pseudo-label.
  for (const auto& clip : manifest.clips)
    for (int fi : clip.retained_frame_indices)
      if (!label_of.count({clip.clip_id, fi}))
        throw std::invalid_argument("train_supervised: missing pseudo-label for " + clip.clip_id +
                                    " frame " + std::to_string(fi));

  std::vector<int> train_clips, holdout_clips;
  for (int ci = 0; ci < static_cast<int>(manifest.clips.size()); ++ci) {
    if (is_holdout_clip(ci, cfg.holdout_frac))
      holdout_clips.push_back(ci);
    else
      train_clips.push_back(ci);
  }
  if (train_clips.empty()) throw std::invalid_argument("train_supervised: no training clips");

  std::vector<std::pair<int, int>> vs_refs;  // (clip idx, pos)
  for (int ci : train_clips) {
    const auto& clip = manifest.clips[static_cast<std::size_t>(ci)];
    for (std::size_t r = 0; r < clip.retained_frame_indices.size(); ++r)
      vs_refs.emplace_back(ci, static_cast<int>(r) * manifest.downsample_factor);
  }

  int emb_dim = input.config.embedding_dim;
  nn::Encoder enc = nn::Encoder::from_checkpoint(input);
  SupervisedHeads heads;
  heads.h1 = nn::make_head<float>(nn::HeadKind::ClassifierSemantics, emb_dim, cfg.head_hidden,
                                  classes);
  int h2_in = cfg.td_context ? 2 * emb_dim : emb_dim;
  heads.h2 = nn::make_head<float>(nn::HeadKind::ClassifierOrder, h2_in, cfg.head_hidden,
                                  cfg.n_frames);
  core::Rng init_rng(core::fanout(cfg.seed, "supervised-init"));
  heads.h1.init(init_rng);
  heads.h2.init(init_rng);

  auto params = enc.net.params("enc.");
  {
    auto p1 = heads.h1.params("h1.");
    params.insert(params.end(), p1.begin(), p1.end());
    auto p2 = heads.h2.params("h2.");
    params.insert(params.end(), p2.begin(), p2.end());
  }
  nn::Adam<float> opt(params);
  core::Rng rng(core::fanout(cfg.seed, "supervised-order"));

  int n = cfg.n_frames;
  float td_weight = cfg.use_vs ? cfg.lambda : 1.0f;

  SupervisedEval last_eval;
  for (int step = 0; step < cfg.steps; ++step) {
    enc.net.zero_grad();
    heads.h1.zero_grad();
    heads.h2.zero_grad();
    float lvs = 0.f, ltd = 0.f;

    if (cfg.use_vs) {
      int batch = std::min<int>(cfg.batch_vs, static_cast<int>(vs_refs.size()));
      std::vector<core::FrameImage> frames;
      std::vector<int> ys;
      frames.reserve(static_cast<std::size_t>(batch));
      for (int i = 0; i < batch; ++i) {
        auto [ci, pos] =
            vs_refs[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(vs_refs.size())))];
        const auto& clip = manifest.clips[static_cast<std::size_t>(ci)];
        frames.push_back(corpus.store.frame(clip, pos));
        ys.push_back(label_of.at(
            {clip.clip_id, clip.raw_frame_indices[static_cast<std::size_t>(pos)]}));
      }
      TensorF emb = enc.net.forward(nn::batch_from_frames<float>(frames), true);
      TensorF logits = heads.h1.forward(emb, true);
      auto out = nn::loss_vs<float>(logits, ys);
      lvs = out.value;
      TensorF demb = heads.h1.backward(out.grad);
      enc.net.backward(demb);
    }

    if (cfg.use_td) {
      int k = std::min<int>(cfg.td_clips, static_cast<int>(train_clips.size()));
      std::vector<data::OrderSample> samples;
      std::vector<core::FrameImage> frames;
      std::vector<int> ys;
      samples.reserve(static_cast<std::size_t>(k));
      for (int s = 0; s < k; ++s) {
        int ci = train_clips[static_cast<std::size_t>(
            rng.uniform_int(static_cast<int>(train_clips.size())))];
        auto sample = data::make_order_sample(
            corpus.store, manifest.clips[static_cast<std::size_t>(ci)], n,
            core::fanout(cfg.seed, "order",
                         static_cast<std::uint64_t>(step) * 1000 + static_cast<std::uint64_t>(s)));
        for (const auto& f : sample.frames) frames.push_back(f);
        for (int l : sample.labels) ys.push_back(l);
        samples.push_back(std::move(sample));
      }
      int rows = k * n;
      TensorF emb = enc.net.forward(nn::batch_from_frames<float>(frames), true);
      TensorF h2in;
      if (cfg.td_context) {
        h2in = TensorF({rows, 2 * emb_dim});
        for (int s = 0; s < k; ++s) {
          std::vector<float> mean(static_cast<std::size_t>(emb_dim), 0.f);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < emb_dim; ++j)
              mean[static_cast<std::size_t>(j)] += emb.at2(s * n + i, j);
          for (auto& v : mean) v /= static_cast<float>(n);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < emb_dim; ++j) {
              h2in.at2(s * n + i, j) = emb.at2(s * n + i, j);
              h2in.at2(s * n + i, emb_dim + j) = mean[static_cast<std::size_t>(j)];
            }
        }
      } else {
        h2in = emb;
      }
      TensorF logits = heads.h2.forward(h2in, true);
      auto out = nn::cross_entropy<float>(logits, ys);
      ltd = out.value;
      // lambda scales the TD branch; at lambda=0 the order head receives
      // exactly zero gradient.
      TensorF dlogits = out.grad;
      for (std::int64_t i = 0; i < dlogits.size(); ++i) dlogits.at(i) *= td_weight;
      TensorF dh2in = heads.h2.backward(dlogits);
      TensorF demb({rows, emb_dim});
      if (cfg.td_context) {
        for (int s = 0; s < k; ++s) {
          std::vector<float> dctx(static_cast<std::size_t>(emb_dim), 0.f);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < emb_dim; ++j)
              dctx[static_cast<std::size_t>(j)] += dh2in.at2(s * n + i, emb_dim + j);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < emb_dim; ++j)
              demb.at2(s * n + i, j) =
                  dh2in.at2(s * n + i, j) + dctx[static_cast<std::size_t>(j)] / static_cast<float>(n);
        }
      } else {
        demb = dh2in;
      }
      enc.net.backward(demb);
    }

    float total = nn::joint_loss(lvs, ltd, cfg.use_vs ? cfg.lambda : 1.0f);
    if (!std::isfinite(total))
      throw std::runtime_error("train_supervised: non-finite loss at step " +
                               std::to_string(step));
    opt.step(params, cfg.lr);

    bool do_eval = !holdout_clips.empty() && cfg.eval_every > 0 &&
                   ((step + 1) % cfg.eval_every == 0 || step + 1 == cfg.steps);
    if (do_eval)
      last_eval = eval_supervised(enc.net, heads, corpus, label_of, holdout_clips, cfg, emb_dim);
    if (metrics) {
      nlohmann::ordered_json rec = {{"loss_vs", lvs}, {"loss_td", ltd}, {"loss_total", total},
                                    {"lr", cfg.lr}};
      if (do_eval) {
        rec["vs_acc"] = last_eval.vs_acc;
        rec["td_acc"] = last_eval.td_acc;
      }
      metrics->write(step, rec);
    }
  }

  if (!holdout_clips.empty() && cfg.eval_every <= 0)
    last_eval = eval_supervised(enc.net, heads, corpus, label_of, holdout_clips, cfg, emb_dim);

  SupervisedResult res;
  res.final_eval = last_eval;
  res.checkpoint.config = input.config;
  res.checkpoint.stage = nn::Stage::Supervised;
  res.checkpoint.config_fingerprint =
      nn::config_fingerprint_of(input.config, nn::Stage::Supervised);
  res.checkpoint.rng_state = {rng.state, static_cast<std::uint64_t>(cfg.steps)};
  auto enc_refs = enc.net.params("enc.");
  res.checkpoint.params = nn::snapshot_params(enc_refs);
  return res;
}

}  // namespace viprom::train
