#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "test_util.hpp"
#include "viprom/data/synthetic.hpp"
#include "viprom/train/contrastive.hpp"
#include "viprom/train/supervised.hpp"

using namespace viprom;
namespace fs = std::filesystem;

namespace {

data::Corpus test_corpus(std::uint64_t seed = 7, int clips = 30, int classes = 3) {
  data::SynthConfig cfg;
  cfg.seed = seed;
  cfg.n_clips = clips;
  cfg.n_classes = classes;
  cfg.h = cfg.w = 16;
  return data::generate_synthetic_corpus(cfg);
}

nn::EncoderConfig small_encoder() {
  nn::EncoderConfig cfg;
  cfg.embedding_dim = 32;
  cfg.in_h = cfg.in_w = 16;
  cfg.width = 4;
  return cfg;
}

}  // namespace

TEST_CASE("oracle teacher reproduces synthetic ground truth exactly") {
  auto corpus = test_corpus();
  train::OracleTeacher teacher(corpus.manifest);
  auto records = train::generate_pseudo_labels(teacher, corpus.manifest, corpus.store);
  // One record per retained frame: 30 clips x 3 frames.
  CHECK(records.size() == 90);
  std::map<std::string, int> hints;
  for (const auto& c : corpus.manifest.clips) hints[c.clip_id] = *c.label_hint;
  for (const auto& r : records) {
    CHECK(r.label == hints.at(r.clip_id));
    CHECK(r.confidence == 1.0f);
    CHECK(r.teacher_id == "oracle:label_hint");
  }
}

TEST_CASE("pseudo-label generation is deterministic and files round-trip") {
  auto corpus = test_corpus();
  train::OracleTeacher teacher(corpus.manifest);
  auto r1 = train::generate_pseudo_labels(teacher, corpus.manifest, corpus.store);
  auto r2 = train::generate_pseudo_labels(teacher, corpus.manifest, corpus.store);

  fs::path dir = fs::temp_directory_path() / "viprom_labels_test";
  fs::create_directories(dir);
  train::save_pseudo_labels(r1, (dir / "a.jsonl").string());
  train::save_pseudo_labels(r2, (dir / "b.jsonl").string());
  std::ifstream f1(dir / "a.jsonl", std::ios::binary), f2(dir / "b.jsonl", std::ios::binary);
  std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);

  auto back = train::load_pseudo_labels((dir / "a.jsonl").string());
  REQUIRE(back.size() == r1.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].clip_id == r1[i].clip_id);
    CHECK(back[i].frame_index == r1[i].frame_index);
    CHECK(back[i].label == r1[i].label);
  }
  fs::remove_all(dir);
}

TEST_CASE("fit teacher: trains on hints, classifies, round-trips through checkpoints") {
  auto corpus = test_corpus(11, 36, 3);
  train::TeacherFitConfig cfg;
  cfg.steps = 250;
  cfg.seed = 5;
  auto teacher = train::train_teacher(corpus, small_encoder(), cfg, nullptr);
  CHECK(teacher.n_classes() == 3);

  // Accuracy on training frames should be high for this easy corpus.
  auto records = train::generate_pseudo_labels(teacher, corpus.manifest, corpus.store);
  int agree = 0;
  std::map<std::string, int> hints;
  for (const auto& c : corpus.manifest.clips) hints[c.clip_id] = *c.label_hint;
  for (const auto& r : records) agree += (r.label == hints.at(r.clip_id));
  CHECK(static_cast<double>(agree) / records.size() > 0.9);

  fs::path dir = fs::temp_directory_path() / "viprom_teacher_test";
  fs::create_directories(dir);
  teacher.to_checkpoint().save((dir / "t.ckpt").string());
  auto loaded = train::TeacherBundle::from_checkpoint(nn::Checkpoint::load((dir / "t.ckpt").string()));
  CHECK(loaded.n_classes() == 3);
  auto again = train::generate_pseudo_labels(loaded, corpus.manifest, corpus.store);
  REQUIRE(again.size() == records.size());
  for (std::size_t i = 0; i < again.size(); ++i) CHECK(again[i].label == records[i].label);
  fs::remove_all(dir);
}

TEST_CASE("train_supervised: stage gating and missing-label rejection") {
  auto corpus = test_corpus(3, 10, 2);
  train::OracleTeacher teacher(corpus.manifest);
  auto labels = train::generate_pseudo_labels(teacher, corpus.manifest, corpus.store);

  train::JointConfig cfg;
  cfg.steps = 2;
  cfg.seed = 1;
  cfg.holdout_frac = 0.0f;

  auto scratch = nn::init_encoder(small_encoder(), 4);
  CHECK_THROWS(train::train_supervised(scratch, corpus, labels, cfg, nullptr));
  cfg.allow_scratch = true;
  auto res = train::train_supervised(scratch, corpus, labels, cfg, nullptr);
  CHECK(res.checkpoint.stage == nn::Stage::Supervised);

  // Missing pseudo-labels for sampled frames are rejected up front.
  auto partial = labels;
  partial.pop_back();
  CHECK_THROWS(train::train_supervised(scratch, corpus, partial, cfg, nullptr));

  // A supervised checkpoint cannot be fine-tuned again (stage monotonicity).
  CHECK_THROWS(train::train_supervised(res.checkpoint, corpus, labels, cfg, nullptr));
}

TEST_CASE("joint training smoke: contrastive -> supervised, determinism") {
  auto corpus = test_corpus(13, 20, 3);
  train::ContrastiveConfig ccfg;
  ccfg.epochs = 2;
  ccfg.batch = 12;
  ccfg.seed = 8;
  auto contrastive = train::train_contrastive(corpus, small_encoder(), ccfg, nullptr);

  train::OracleTeacher teacher(corpus.manifest);
  auto labels = train::generate_pseudo_labels(teacher, corpus.manifest, corpus.store);

  train::JointConfig cfg;
  cfg.steps = 30;
  cfg.seed = 6;
  cfg.eval_every = 15;
  auto a = train::train_supervised(contrastive, corpus, labels, cfg, nullptr);
  auto b = train::train_supervised(contrastive, corpus, labels, cfg, nullptr);
  CHECK(a.checkpoint.stage == nn::Stage::Supervised);
  CHECK(a.checkpoint.param_hash() == b.checkpoint.param_hash());
  CHECK(a.checkpoint.param_hash() != contrastive.param_hash());
}

TEST_CASE("lambda=0 leaves the order head untouched (zero gradients through joint loss)") {
  auto corpus = test_corpus(17, 20, 3);
  train::OracleTeacher teacher(corpus.manifest);
  auto labels = train::generate_pseudo_labels(teacher, corpus.manifest, corpus.store);

  auto scratch = nn::init_encoder(small_encoder(), 9);
  train::JointConfig cfg;
  cfg.steps = 25;
  cfg.seed = 2;
  cfg.lambda = 0.0f;
  cfg.allow_scratch = true;
  cfg.holdout_frac = 0.2f;
  cfg.eval_every = 25;
  auto res = train::train_supervised(scratch, corpus, labels, cfg, nullptr);
  // With lambda=0 the order head never trains: held-out order accuracy stays
  // at chance (1/N) within tolerance.
  CHECK(res.final_eval.td_acc == doctest::Approx(1.0 / cfg.n_frames).epsilon(0.5));
  CHECK(std::fabs(res.final_eval.td_acc - 1.0 / cfg.n_frames) < 0.10);
}

TEST_CASE("held-out split is deterministic and proportional") {
  int holdout = 0;
  for (int i = 0; i < 100; ++i) holdout += train::is_holdout_clip(i, 0.2f);
  CHECK(holdout == 20);
  CHECK(!train::is_holdout_clip(3, 0.0f));
}

TEST_CASE("joint config validation") {
  train::JointConfig cfg;
  cfg.lambda = -0.1f;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.n_frames = 1;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.use_vs = false;
  cfg.use_td = false;
  CHECK_THROWS(cfg.validate());
}
