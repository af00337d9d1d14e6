// viprom_main.cpp - unified command-line entry point. Subcommands mirror the
// pipeline stages: build-manifest, synth-corpus, pretrain-contrastive,
// gen-pseudo-labels, pretrain-supervised, collect-demos, bc-eval, bench,
// report. A JSON config file supplies defaults; explicit flags win.
#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "viprom/core/kernels.hpp"
#include "viprom/data/augment.hpp"
#include "viprom/data/manifest.hpp"
#include "viprom/data/synthetic.hpp"
#include "viprom/eval/bench.hpp"
#include "viprom/eval/imitation.hpp"
#include "viprom/io/config.hpp"
#include "viprom/io/metrics.hpp"
#include "viprom/train/contrastive.hpp"
#include "viprom/train/supervised.hpp"

namespace fs = std::filesystem;
using namespace viprom;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::uint64_t seed = 1;
  std::string data_root;
  std::string out_root;
  bool toy = false;
  bool serial_kernels = false;
  json config;  // loaded file, defaults for sections

  void load() {
    if (config_path.empty()) return;
    std::ifstream f(config_path);
    if (!f) throw std::runtime_error("config: cannot open " + config_path);
    config = json::parse(f);
    io::require_keys(config,
                     {"global", "dataset", "contrastive", "supervised", "imitation", "bench"},
                     "config");
    if (config.contains("global")) {
      const auto& g = config.at("global");
      io::require_keys(g, {"seed", "data_root", "out_root", "toy", "precision", "serial_kernels"},
                       "config.global");
    }
  }

  json section(const std::string& name) const {
    if (config.is_object() && config.contains(name)) return config.at(name);
    return json::object();
  }

  template <class T>
  T global_or(const std::string& key, T fallback) const {
    if (config.is_object() && config.contains("global") && config.at("global").contains(key))
      return config.at("global").at(key).get<T>();
    return fallback;
  }
};

std::string artifact_dir_of(const std::string& out) {
  fs::path p(out);
  if (fs::is_directory(p) || p.extension().empty()) return p.string();
  return p.parent_path().empty() ? std::string(".") : p.parent_path().string();
}

std::vector<env::Task> parse_tasks_flag(const std::string& arg) {
  if (arg == "all") return env::all_tasks();
  std::vector<env::Task> out;
  std::string cur;
  for (char c : arg + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(env::parse_task(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (out.empty()) throw std::invalid_argument("no tasks given");
  return out;
}

std::vector<std::uint64_t> parse_seeds_flag(const std::string& arg) {
  std::vector<std::uint64_t> out;
  std::string cur;
  for (char c : arg + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(std::stoull(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (out.empty()) throw std::invalid_argument("no seeds given");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"viprom: cascade visual pre-training laboratory for robot manipulation"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "JSON config file (defaults; flags win)");
  app.add_option("--seed", g.seed, "global seed (fans out to per-component streams)");
  app.add_option("--data-root", g.data_root, "data root (or VIPROM_DATA_ROOT)");
  app.add_option("--out-root", g.out_root, "output root");
  app.add_flag("--toy", g.toy, "desk-scale budgets (shrinks BC steps)");
  app.add_flag("--serial-kernels", g.serial_kernels, "disable OpenMP kernels");

  // ---- build-manifest ----
  auto* cmd_manifest = app.add_subcommand("build-manifest", "build a clip manifest from annotations");
  std::string bm_annotations, bm_out;
  int bm_fps = 30, bm_downsample = 10;
  double bm_duration = 1.0;
  cmd_manifest->add_option("--annotations", bm_annotations, "annotations JSON")->required();
  cmd_manifest->add_option("--fps", bm_fps, "frames per second");
  cmd_manifest->add_option("--duration", bm_duration, "clip duration seconds");
  cmd_manifest->add_option("--downsample", bm_downsample, "uniform down-sampling factor");
  cmd_manifest->add_option("--out", bm_out, "output manifest path")->required();

  // ---- synth-corpus ----
  auto* cmd_synth = app.add_subcommand("synth-corpus", "generate the synthetic labeled corpus");
  int sc_clips = 240, sc_classes = 4, sc_fps = 30, sc_downsample = 10, sc_hw = 24;
  double sc_duration = 1.0;
  std::string sc_out, sc_variant = "temporal";
  std::uint64_t sc_seed = 0;
  bool sc_seed_given = false;
  cmd_synth->add_option("--seed", sc_seed, "corpus seed")->each([&](const std::string&) { sc_seed_given = true; });
  cmd_synth->add_option("--clips", sc_clips, "number of clips");
  cmd_synth->add_option("--classes", sc_classes, "number of classes");
  cmd_synth->add_option("--fps", sc_fps, "frames per second");
  cmd_synth->add_option("--duration", sc_duration, "clip duration seconds");
  cmd_synth->add_option("--downsample", sc_downsample, "down-sampling factor");
  cmd_synth->add_option("--hw", sc_hw, "image height=width");
  cmd_synth->add_option("--variant", sc_variant, "temporal|static");
  cmd_synth->add_option("--out", sc_out, "output corpus directory")->required();

  // ---- pretrain-contrastive ----
  auto* cmd_con = app.add_subcommand("pretrain-contrastive", "stage-1 momentum contrastive pre-training");
  std::string pc_manifest, pc_arch = "tiny-conv", pc_out;
  int pc_epochs = 10, pc_batch = 64, pc_emb = 64, pc_width = 8;
  float pc_tau = 0.2f, pc_momentum = 0.99f, pc_lr = 1e-3f;
  cmd_con->add_option("--manifest", pc_manifest, "corpus manifest path")->required();
  cmd_con->add_option("--arch", pc_arch, "tiny-conv|res-34|res-50|res-101");
  cmd_con->add_option("--epochs", pc_epochs, "epochs");
  cmd_con->add_option("--batch", pc_batch, "batch size");
  cmd_con->add_option("--tau", pc_tau, "InfoNCE temperature");
  cmd_con->add_option("--momentum", pc_momentum, "key EMA momentum");
  cmd_con->add_option("--lr", pc_lr, "peak learning rate");
  cmd_con->add_option("--embedding-dim", pc_emb, "embedding dimension");
  cmd_con->add_option("--width", pc_width, "base channel width");
  cmd_con->add_option("--out", pc_out, "output checkpoint path")->required();

  // ---- gen-pseudo-labels ----
  auto* cmd_labels = app.add_subcommand("gen-pseudo-labels", "generate pseudo labels per retained frame");
  std::string gl_manifest, gl_teacher = "oracle", gl_out, gl_teacher_out;
  cmd_labels->add_option("--manifest", gl_manifest, "corpus manifest path")->required();
  cmd_labels->add_option("--teacher", gl_teacher, "oracle | fit | <teacher checkpoint path>");
  cmd_labels->add_option("--teacher-out", gl_teacher_out, "save fitted teacher checkpoint here");
  cmd_labels->add_option("--out", gl_out, "output pseudo-label JSONL")->required();

  // ---- pretrain-supervised ----
  auto* cmd_sup = app.add_subcommand("pretrain-supervised", "stage-2 joint pseudo-label + frame-order fine-tuning");
  std::string ps_ckpt, ps_manifest, ps_labels, ps_out;
  float ps_lambda = 0.33f;
  int ps_frames = 5, ps_steps = 1500;
  bool ps_no_vs = false, ps_no_td = false, ps_allow_scratch = false;
  cmd_sup->add_option("--ckpt", ps_ckpt, "input checkpoint (stage contrastive)")->required();
  cmd_sup->add_option("--manifest", ps_manifest, "corpus manifest path")->required();
  cmd_sup->add_option("--labels", ps_labels, "pseudo-label JSONL")->required();
  cmd_sup->add_option("--lambda", ps_lambda, "temporal-dynamics balance coefficient");
  cmd_sup->add_option("--n-frames", ps_frames, "frames per order sample");
  cmd_sup->add_option("--steps", ps_steps, "training steps");
  cmd_sup->add_flag("--no-vs", ps_no_vs, "disable visual-semantics loss");
  cmd_sup->add_flag("--no-td", ps_no_td, "disable temporal-dynamics loss");
  cmd_sup->add_flag("--allow-scratch", ps_allow_scratch, "accept a scratch checkpoint (ablation)");
  cmd_sup->add_option("--out", ps_out, "output checkpoint path")->required();

  // ---- collect-demos ----
  auto* cmd_demos = app.add_subcommand("collect-demos", "collect scripted-expert demonstrations");
  std::string cd_task = "push", cd_out;
  int cd_n = 5, cd_hw = 24;
  cmd_demos->add_option("--task", cd_task, "reach|push|open-slider|close-slider");
  cmd_demos->add_option("--n", cd_n, "number of demonstrations");
  cmd_demos->add_option("--hw", cd_hw, "render height=width");
  cmd_demos->add_option("--out", cd_out, "output demo file")->required();

  // ---- bc-eval ----
  auto* cmd_bc = app.add_subcommand("bc-eval", "frozen-encoder behavior cloning protocol");
  std::string bc_ckpt, bc_tasks = "all", bc_seeds = "100,125,150", bc_out;
  int bc_steps = 0, bc_ndemos = 0, bc_eval_every = 0, bc_eval_episodes = 0;
  cmd_bc->add_option("--ckpt", bc_ckpt, "encoder checkpoint")->required();
  cmd_bc->add_option("--tasks", bc_tasks, "all or comma list");
  cmd_bc->add_option("--seeds", bc_seeds, "comma list (default 100,125,150)");
  cmd_bc->add_option("--steps", bc_steps, "BC steps (default 20000; toy caps at 5000)");
  cmd_bc->add_option("--n-demos", bc_ndemos, "demonstrations per task");
  cmd_bc->add_option("--eval-every", bc_eval_every, "evaluation cadence");
  cmd_bc->add_option("--eval-episodes", bc_eval_episodes, "episodes per evaluation");
  cmd_bc->add_option("--out", bc_out, "output directory")->required();

  // ---- bench ----
  auto* cmd_bench = app.add_subcommand("bench", "benchmark grid runner");
  auto* cmd_bench_run = cmd_bench->add_subcommand("run", "execute a grid spec");
  std::string br_spec, br_out;
  int br_workers = 1;
  cmd_bench_run->add_option("--spec", br_spec, "grid spec JSON")->required();
  cmd_bench_run->add_option("--workers", br_workers, "parallel protocol cells");
  cmd_bench_run->add_option("--out", br_out, "output directory")->required();

  // ---- report ----
  auto* cmd_report = app.add_subcommand("report", "render a bench result");
  std::string rp_result, rp_format = "table-text", rp_out;
  cmd_report->add_option("--result", rp_result, "bench result.json")->required();
  cmd_report->add_option("--format", rp_format, "table-text|delimited|plot");
  cmd_report->add_option("--out", rp_out, "output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    g.load();
    g.seed = g.global_or<std::uint64_t>("seed", g.seed);
    g.toy = g.global_or<bool>("toy", g.toy);
    if (g.global_or<bool>("serial_kernels", false) || g.serial_kernels)
      core::set_parallel_kernels(false);

    if (*cmd_manifest) {
      std::map<std::string, double> durations;
      auto narrations = data::load_narrations(bm_annotations, durations);
      auto manifest = data::build_manifest(narrations, durations, bm_fps, bm_duration, bm_downsample);
      manifest.save(bm_out);
      io::snapshot_config(ordered_json{{"command", "build-manifest"},
                                       {"annotations", bm_annotations},
                                       {"fps", bm_fps},
                                       {"duration", bm_duration},
                                       {"downsample", bm_downsample},
                                       {"out", bm_out}},
                          artifact_dir_of(bm_out));
      std::printf("manifest: %zu clips, %lld retained frames, %lld skipped\n",
                  manifest.clips.size(),
                  static_cast<long long>(manifest.total_retained_frames()),
                  static_cast<long long>(manifest.meta.skipped_out_of_bounds));
      return 0;
    }

    if (*cmd_synth) {
      data::SynthConfig sc;
      const json sec = g.section("dataset");
      io::require_keys(sec, {"seed", "clips", "classes", "fps", "duration", "downsample", "hw", "variant"},
                       "config.dataset");
      sc.seed = sc_seed_given ? sc_seed : sec.value("seed", g.seed);
      sc.n_clips = cmd_synth->count("--clips") ? sc_clips : sec.value("clips", sc_clips);
      sc.n_classes = cmd_synth->count("--classes") ? sc_classes : sec.value("classes", sc_classes);
      sc.fps = cmd_synth->count("--fps") ? sc_fps : sec.value("fps", sc_fps);
      sc.duration_s = cmd_synth->count("--duration") ? sc_duration : sec.value("duration", sc_duration);
      sc.downsample_factor =
          cmd_synth->count("--downsample") ? sc_downsample : sec.value("downsample", sc_downsample);
      sc.h = sc.w = cmd_synth->count("--hw") ? sc_hw : sec.value("hw", sc_hw);
      std::string variant = cmd_synth->count("--variant") ? sc_variant : sec.value("variant", sc_variant);
      if (variant == "temporal")
        sc.variant = data::CorpusVariant::Temporal;
      else if (variant == "static")
        sc.variant = data::CorpusVariant::Static;
      else
        throw std::invalid_argument("synth-corpus: variant must be temporal or static");
      auto corpus = data::generate_synthetic_corpus(sc);
      data::save_corpus(corpus, sc_out);
      io::snapshot_config(ordered_json{{"command", "synth-corpus"},
                                       {"seed", sc.seed},
                                       {"clips", sc.n_clips},
                                       {"classes", sc.n_classes},
                                       {"fps", sc.fps},
                                       {"duration", sc.duration_s},
                                       {"downsample", sc.downsample_factor},
                                       {"hw", sc.h},
                                       {"variant", variant}},
                          sc_out);
      std::printf("corpus: %zu clips written to %s\n", corpus.manifest.clips.size(), sc_out.c_str());
      return 0;
    }

    if (*cmd_con) {
      auto corpus = data::load_corpus(fs::path(pc_manifest).parent_path().string());
      nn::EncoderConfig enc;
      enc.arch = nn::parse_arch(pc_arch);
      enc.embedding_dim = pc_emb;
      enc.width = pc_width;
      enc.in_h = corpus.manifest.meta.image_h > 0 ? corpus.manifest.meta.image_h : 24;
      enc.in_w = corpus.manifest.meta.image_w > 0 ? corpus.manifest.meta.image_w : 24;
      train::ContrastiveConfig cc = train::ContrastiveConfig::from_json(g.section("contrastive"));
      if (cmd_con->count("--epochs")) cc.epochs = pc_epochs;
      if (cmd_con->count("--batch")) cc.batch = pc_batch;
      if (cmd_con->count("--tau")) cc.tau = pc_tau;
      if (cmd_con->count("--momentum")) cc.momentum = pc_momentum;
      if (cmd_con->count("--lr")) cc.lr = pc_lr;
      cc.seed = core::fanout(g.seed, "contrastive");
      io::MetricsWriter metrics(pc_out + ".metrics.jsonl");
      auto ck = train::train_contrastive(corpus, enc, cc, &metrics);
      ck.save(pc_out);
      io::snapshot_config(ordered_json{{"command", "pretrain-contrastive"},
                                       {"encoder", enc.to_json()},
                                       {"contrastive", cc.to_json()},
                                       {"manifest", pc_manifest}},
                          artifact_dir_of(pc_out));
      std::printf("contrastive checkpoint written to %s\n", pc_out.c_str());
      return 0;
    }

    if (*cmd_labels) {
      auto corpus = data::load_corpus(fs::path(gl_manifest).parent_path().string());
      std::unique_ptr<train::Teacher> teacher;
      if (gl_teacher == "oracle") {
        teacher = std::make_unique<train::OracleTeacher>(corpus.manifest);
      } else if (gl_teacher == "fit") {
        nn::EncoderConfig enc;
        enc.in_h = corpus.manifest.meta.image_h;
        enc.in_w = corpus.manifest.meta.image_w;
        train::TeacherFitConfig tc;
        tc.seed = core::fanout(g.seed, "teacher");
        auto bundle = train::train_teacher(corpus, enc, tc);
        if (!gl_teacher_out.empty()) bundle.to_checkpoint().save(gl_teacher_out);
        teacher = std::make_unique<train::TeacherBundle>(std::move(bundle));
      } else {
        auto ck = nn::Checkpoint::load(gl_teacher);
        teacher = std::make_unique<train::TeacherBundle>(train::TeacherBundle::from_checkpoint(ck));
      }
      auto records = train::generate_pseudo_labels(*teacher, corpus.manifest, corpus.store);
      train::save_pseudo_labels(records, gl_out);
      io::snapshot_config(ordered_json{{"command", "gen-pseudo-labels"},
                                       {"manifest", gl_manifest},
                                       {"teacher", gl_teacher},
                                       {"records", records.size()}},
                          artifact_dir_of(gl_out));
      std::printf("%zu pseudo-label records written to %s\n", records.size(), gl_out.c_str());
      return 0;
    }

    if (*cmd_sup) {
      auto input = nn::Checkpoint::load(ps_ckpt);
      auto corpus = data::load_corpus(fs::path(ps_manifest).parent_path().string());
      auto labels = train::load_pseudo_labels(ps_labels);
      train::JointConfig jc = train::JointConfig::from_json(g.section("supervised"));
      if (cmd_sup->count("--lambda")) jc.lambda = ps_lambda;
      if (cmd_sup->count("--n-frames")) jc.n_frames = ps_frames;
      if (cmd_sup->count("--steps")) jc.steps = ps_steps;
      if (ps_no_vs) jc.use_vs = false;
      if (ps_no_td) jc.use_td = false;
      jc.allow_scratch = ps_allow_scratch;
      jc.seed = core::fanout(g.seed, "supervised");
      io::MetricsWriter metrics(ps_out + ".metrics.jsonl");
      auto res = train::train_supervised(input, corpus, labels, jc, &metrics);
      res.checkpoint.save(ps_out);
      io::snapshot_config(ordered_json{{"command", "pretrain-supervised"},
                                       {"supervised", jc.to_json()},
                                       {"input", ps_ckpt},
                                       {"manifest", ps_manifest}},
                          artifact_dir_of(ps_out));
      std::printf("supervised checkpoint written to %s (holdout vs_acc=%.3f td_acc=%.3f)\n",
                  ps_out.c_str(), res.final_eval.vs_acc, res.final_eval.td_acc);
      return 0;
    }

    if (*cmd_demos) {
      auto spec = env::TaskSpec::make(env::parse_task(cd_task));
      env::RenderConfig rc{cd_hw, cd_hw};
      auto demos = env::collect_demos(spec, cd_n, core::fanout(g.seed, "demos:" + cd_task), rc);
      env::save_demos(demos, cd_out);
      io::snapshot_config(ordered_json{{"command", "collect-demos"},
                                       {"task", cd_task},
                                       {"n", cd_n},
                                       {"seed", g.seed},
                                       {"hw", cd_hw}},
                          artifact_dir_of(cd_out));
      std::printf("%zu demonstrations written to %s\n", demos.size(), cd_out.c_str());
      return 0;
    }

    if (*cmd_bc) {
      auto ck = nn::Checkpoint::load(bc_ckpt);
      eval::BCConfig cfg = eval::BCConfig::from_json(g.section("imitation"));
      cfg.toy = g.toy || cfg.toy;
      if (bc_steps > 0) cfg.steps = bc_steps;
      if (bc_ndemos > 0) cfg.n_demos = bc_ndemos;
      if (bc_eval_every > 0) cfg.eval_every = bc_eval_every;
      if (bc_eval_episodes > 0) cfg.eval_episodes = bc_eval_episodes;
      auto tasks = parse_tasks_flag(bc_tasks);
      auto seeds = parse_seeds_flag(bc_seeds);
      env::RenderConfig rc{ck.config.in_h, ck.config.in_w};
      auto report = eval::run_protocol(ck, tasks, seeds, cfg, bc_out, rc);
      io::snapshot_config(ordered_json{{"command", "bc-eval"},
                                       {"ckpt", bc_ckpt},
                                       {"protocol", cfg.to_json()},
                                       {"tasks", bc_tasks},
                                       {"seeds", bc_seeds}},
                          bc_out);
      std::printf("aggregate best success: %.4f (report in %s)\n", report.aggregate,
                  bc_out.c_str());
      return 0;
    }

    if (*cmd_bench_run) {
      auto spec = eval::GridSpec::load(br_spec);
      auto result = eval::run_grid(spec, br_out, br_workers);
      io::snapshot_config(spec.to_json(), br_out);
      std::printf("bench: %zu rows written to %s\n", result.rows.size(), br_out.c_str());
      return 0;
    }
    if (*cmd_bench) {
      std::fprintf(stderr, "bench: expected a subcommand (run)\n");
      return 1;
    }

    if (*cmd_report) {
      auto result = eval::BenchResult::load(rp_result);
      eval::emit_report(result, eval::parse_report_format(rp_format), rp_out);
      std::printf("report written to %s\n", rp_out.c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
