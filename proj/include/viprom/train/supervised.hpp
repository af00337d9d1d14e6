// supervised.hpp - stage-2 joint fine-tuning: pseudo-label visual-semantics
// loss plus frame-order temporal-dynamics loss, combined as
// L_vs + lambda * L_td. Also hosts teacher provisioning (oracle fixture and
// the desk-scale fit classifier) and pseudo-label generation.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "viprom/data/framestore.hpp"
#include "viprom/data/sampling.hpp"
#include "viprom/io/metrics.hpp"
#include "viprom/nn/checkpoint.hpp"
#include "viprom/nn/heads.hpp"

namespace viprom::train {

struct PseudoLabelRecord {
  std::string clip_id;
  int frame_index = 0;  // absolute (raw) frame index
  int label = 0;
  float confidence = 1.0f;
  std::string teacher_id;
};

void save_pseudo_labels(const std::vector<PseudoLabelRecord>& records, const std::string& path);
std::vector<PseudoLabelRecord> load_pseudo_labels(const std::string& path);

struct Teacher {
  virtual ~Teacher() = default;
  virtual int n_classes() const = 0;
  virtual std::string id() const = 0;
  // labels = argmax class per frame, confidence = softmax max.
  virtual void classify(const std::vector<core::FrameImage>& frames, std::vector<int>& labels,
                        std::vector<float>& confidences) = 0;
};

// Fixture teacher: returns the synthetic corpus ground-truth label_hint.
struct OracleTeacher final : Teacher {
  std::map<std::string, int> hints;
  int classes = 0;

  explicit OracleTeacher(const data::ClipManifest& manifest);
  int n_classes() const override { return classes; }
  std::string id() const override { return "oracle:label_hint"; }
  void classify(const std::vector<core::FrameImage>& frames, std::vector<int>& labels,
                std::vector<float>& confidences) override;
};

// Desk-scale stand-in for the large supervised teacher: encoder + classifier
// head trained on ground-truth hints; persisted as a checkpoint whose param
// table carries both "enc.*" and "head.*" entries.
struct TeacherBundle final : Teacher {
  nn::Encoder encoder;
  nn::Sequential<float> head;
  int classes = 0;
  std::string bundle_id;

  int n_classes() const override { return classes; }
  std::string id() const override { return bundle_id; }
  void classify(const std::vector<core::FrameImage>& frames, std::vector<int>& labels,
                std::vector<float>& confidences) override;

  nn::Checkpoint to_checkpoint() const;
  static TeacherBundle from_checkpoint(const nn::Checkpoint& ck);
};

struct TeacherFitConfig {
  int steps = 400;
  int batch = 32;
  float lr = 1e-3f;
  int hidden = 128;
  std::uint64_t seed = 1;
};

TeacherBundle train_teacher(const data::Corpus& corpus, const nn::EncoderConfig& enc_cfg,
                            const TeacherFitConfig& cfg, io::MetricsWriter* metrics = nullptr);

// One record per retained frame, deterministic order.
std::vector<PseudoLabelRecord> generate_pseudo_labels(Teacher& teacher,
                                                      const data::ClipManifest& manifest,
                                                      const data::FrameStore& store);

struct JointConfig {
  float lambda = 0.33f;
  int n_frames = 5;
  int steps = 1500;
  int batch_vs = 24;
  int td_clips = 6;  // order samples per step
  float lr = 1e-3f;
  int head_hidden = 128;
  bool use_vs = true;
  bool use_td = true;
  bool td_context = true;  // h2 sees [frame ; mean of shuffled sequence]
  bool allow_scratch = false;
  float holdout_frac = 0.2f;
  int eval_every = 250;
  int eval_order_samples = 8;  // per holdout clip
  std::uint64_t seed = 1;

  nlohmann::ordered_json to_json() const;
  static JointConfig from_json(const nlohmann::json& j);
  void validate() const;
};

struct SupervisedEval {
  double vs_acc = 0.0;  // held-out pseudo-label agreement
  double td_acc = 0.0;  // held-out frame-order accuracy
};

struct SupervisedResult {
  nn::Checkpoint checkpoint;  // encoder only; heads discarded
  SupervisedEval final_eval;
};

SupervisedResult train_supervised(const nn::Checkpoint& input, const data::Corpus& corpus,
                                  const std::vector<PseudoLabelRecord>& labels,
                                  const JointConfig& cfg, io::MetricsWriter* metrics = nullptr);

// Deterministic train/holdout split by clip position (holdout_frac of clips).
bool is_holdout_clip(int clip_index, float holdout_frac);

}  // namespace viprom::train
