#include "viprom/eval/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include "viprom/io/config.hpp"

namespace fs = std::filesystem;

namespace viprom::eval {

const std::vector<std::string> kMethods = {"scratch", "contrastive", "contrastive+vs",
                                           "contrastive+td", "viprom-full"};

bool is_known_method(const std::string& m) {
  return std::find(kMethods.begin(), kMethods.end(), m) != kMethods.end();
}

nlohmann::ordered_json GridSpec::to_json() const {
  nlohmann::ordered_json j;
  auto cj = nlohmann::ordered_json::array();
  for (const auto& c : corpora)
    cj.push_back({{"id", c.id},
                  {"kind", c.kind},
                  {"n_clips", c.n_clips},
                  {"n_classes", c.n_classes},
                  {"seed", c.seed},
                  {"path", c.path}});
  j["corpora"] = std::move(cj);
  j["architectures"] = architectures;
  j["methods"] = methods;
  j["demos"] = demos_axis();
  j["seeds"] = seeds;
  j["tasks"] = tasks;
  j["seed"] = seed;
  j["embedding_dim"] = embedding_dim;
  j["width"] = width;
  j["image_hw"] = image_hw;
  j["contrastive"] = contrastive.to_json();
  j["supervised"] = supervised.to_json();
  j["teacher"] = {{"steps", teacher.steps},
                  {"batch", teacher.batch},
                  {"lr", teacher.lr},
                  {"hidden", teacher.hidden},
                  {"seed", teacher.seed}};
  j["protocol"] = protocol.to_json();
  return j;
}

GridSpec GridSpec::from_json(const nlohmann::json& j) {
  io::require_keys(j,
                   {"corpora", "architectures", "methods", "demos", "seeds", "tasks", "seed",
                    "embedding_dim", "width", "image_hw", "contrastive", "supervised", "teacher",
                    "protocol"},
                   "grid spec");
  GridSpec s;
  if (j.contains("corpora")) {
    s.corpora.clear();
    for (const auto& cj : j.at("corpora")) {
      io::require_keys(cj, {"id", "kind", "n_clips", "n_classes", "seed", "path"},
                       "grid spec corpus");
      CorpusAxis c;
      c.id = cj.at("id").get<std::string>();
      c.kind = cj.value("kind", c.kind);
      c.n_clips = cj.value("n_clips", c.n_clips);
      c.n_classes = cj.value("n_classes", c.n_classes);
      c.seed = cj.value("seed", c.seed);
      c.path = cj.value("path", c.path);
      s.corpora.push_back(std::move(c));
    }
  }
  if (j.contains("architectures")) s.architectures = j.at("architectures").get<std::vector<std::string>>();
  if (j.contains("methods")) s.methods = j.at("methods").get<std::vector<std::string>>();
  if (j.contains("demos")) s.demos = j.at("demos").get<std::vector<int>>();
  if (j.contains("seeds")) s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("tasks")) s.tasks = j.at("tasks").get<std::vector<std::string>>();
  s.seed = j.value("seed", s.seed);
  s.embedding_dim = j.value("embedding_dim", s.embedding_dim);
  s.width = j.value("width", s.width);
  s.image_hw = j.value("image_hw", s.image_hw);
  if (j.contains("contrastive")) s.contrastive = train::ContrastiveConfig::from_json(j.at("contrastive"));
  if (j.contains("supervised")) s.supervised = train::JointConfig::from_json(j.at("supervised"));
  if (j.contains("teacher")) {
    const auto& tj = j.at("teacher");
    io::require_keys(tj, {"steps", "batch", "lr", "hidden", "seed"}, "grid spec teacher");
    s.teacher.steps = tj.value("steps", s.teacher.steps);
    s.teacher.batch = tj.value("batch", s.teacher.batch);
    s.teacher.lr = tj.value("lr", s.teacher.lr);
    s.teacher.hidden = tj.value("hidden", s.teacher.hidden);
    s.teacher.seed = tj.value("seed", s.teacher.seed);
  }
  if (j.contains("protocol")) s.protocol = BCConfig::from_json(j.at("protocol"));
  s.validate();
  return s;
}

GridSpec GridSpec::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("grid spec: cannot open: " + path);
  return from_json(nlohmann::json::parse(f));
}

void GridSpec::validate() const {
  if (corpora.empty() || architectures.empty() || methods.empty() || seeds.empty() ||
      tasks.empty())
    throw std::invalid_argument("grid spec: empty axis");
  for (const auto& m : methods)
    if (!is_known_method(m)) throw std::invalid_argument("grid spec: unknown method " + m);
  for (const auto& a : architectures) nn::parse_arch(a);
  for (const auto& t : tasks) env::parse_task(t);
  std::set<std::string> ids;
  for (const auto& c : corpora) {
    if (!ids.insert(c.id).second)
      throw std::invalid_argument("grid spec: duplicate corpus id " + c.id);
    if (c.kind != "synthetic-temporal" && c.kind != "synthetic-static" && c.kind != "dir")
      throw std::invalid_argument("grid spec: unknown corpus kind " + c.kind);
  }
}

std::string GridSpec::fingerprint() const { return core::content_fingerprint(to_json().dump()); }

nlohmann::ordered_json BenchResult::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = schema_version;
  j["code_version"] = code_version;
  j["spec_fingerprint"] = spec_fingerprint;
  auto rows_j = nlohmann::ordered_json::array();
  for (const auto& r : rows)
    rows_j.push_back({{"corpus", r.corpus},
                      {"architecture", r.architecture},
                      {"method", r.method},
                      {"n_demos", r.n_demos},
                      {"cell_fingerprint", r.cell_fingerprint},
                      {"aggregate", r.aggregate},
                      {"per_seed_aggregate", r.per_seed_aggregate},
                      {"report_path", r.report_path}});
  j["rows"] = std::move(rows_j);
  return j;
}

BenchResult BenchResult::from_json(const nlohmann::json& j) {
  BenchResult r;
  r.schema_version = j.at("schema_version").get<int>();
  r.code_version = j.at("code_version").get<std::string>();
  r.spec_fingerprint = j.at("spec_fingerprint").get<std::string>();
  for (const auto& rj : j.at("rows")) {
    BenchRow row;
    row.corpus = rj.at("corpus").get<std::string>();
    row.architecture = rj.at("architecture").get<std::string>();
    row.method = rj.at("method").get<std::string>();
    row.n_demos = rj.at("n_demos").get<int>();
    row.cell_fingerprint = rj.at("cell_fingerprint").get<std::string>();
    row.aggregate = rj.at("aggregate").get<double>();
    row.per_seed_aggregate = rj.at("per_seed_aggregate").get<std::vector<double>>();
    row.report_path = rj.at("report_path").get<std::string>();
    r.rows.push_back(std::move(row));
  }
  return r;
}

void BenchResult::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("bench result: cannot open for write: " + path);
  f << to_json().dump(2) << "\n";
}

BenchResult BenchResult::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("bench result: cannot open: " + path);
  return from_json(nlohmann::json::parse(f));
}

namespace {

struct StageContext {
  const GridSpec& spec;
  std::string out_dir;
  // corpus id -> loaded corpus + fingerprint
  std::map<std::string, data::Corpus> corpora;
  std::map<std::string, std::string> corpus_fp;
  std::map<std::string, std::vector<train::PseudoLabelRecord>> labels;  // corpus id -> records
  std::map<std::string, std::string> labels_fp;
};

nn::EncoderConfig encoder_config_for(const GridSpec& spec, const std::string& arch) {
  nn::EncoderConfig cfg;
  cfg.arch = nn::parse_arch(arch);
  cfg.embedding_dim = spec.embedding_dim;
  cfg.width = spec.width;
  cfg.in_h = spec.image_hw;
  cfg.in_w = spec.image_hw;
  return cfg;
}

void ensure_corpus(StageContext& ctx, const CorpusAxis& axis) {
  if (ctx.corpora.count(axis.id)) return;
  if (axis.kind == "dir") {
    ctx.corpora[axis.id] = data::load_corpus(axis.path);
  } else {
    fs::path dir = fs::path(ctx.out_dir) / "corpora" / axis.id;
    data::SynthConfig sc;
    sc.seed = axis.seed;
    sc.n_clips = axis.n_clips;
    sc.n_classes = axis.n_classes;
    sc.h = ctx.spec.image_hw;
    sc.w = ctx.spec.image_hw;
    sc.variant = axis.kind == "synthetic-static" ? data::CorpusVariant::Static
                                                 : data::CorpusVariant::Temporal;
    if (fs::exists(dir / "manifest.json")) {
      ctx.corpora[axis.id] = data::load_corpus(dir.string());
    } else {
      auto corpus = data::generate_synthetic_corpus(sc);
      data::save_corpus(corpus, dir.string());
      ctx.corpora[axis.id] = std::move(corpus);
    }
  }
  ctx.corpus_fp[axis.id] = ctx.corpora[axis.id].manifest.fingerprint();
}

// Stage checkpoints are cached on disk keyed by a fingerprint of everything
// that determines their bytes.
nn::Checkpoint stage_checkpoint(StageContext& ctx, const std::string& corpus_id,
                                const std::string& arch, const std::string& method) {
  const GridSpec& spec = ctx.spec;
  nn::EncoderConfig enc_cfg = encoder_config_for(spec, arch);
  fs::path stages = fs::path(ctx.out_dir) / "stages";
  fs::create_directories(stages);

  auto cache_or = [&](const std::string& fp, auto compute) -> nn::Checkpoint {
    fs::path p = stages / (fp + ".ckpt");
    if (fs::exists(p)) return nn::Checkpoint::load(p.string());
    nn::Checkpoint ck = compute();
    ck.save(p.string());
    return ck;
  };

  std::string scratch_fp = core::content_fingerprint(
      "scratch|" + enc_cfg.to_json().dump() + "|" + std::to_string(spec.seed));
  if (method == "scratch")
    return cache_or(scratch_fp, [&] {
      return nn::init_encoder(enc_cfg, core::fanout(spec.seed, "scratch"));
    });

  const auto& corpus = ctx.corpora.at(corpus_id);
  std::string contrastive_fp = core::content_fingerprint(
      "contrastive|" + ctx.corpus_fp.at(corpus_id) + "|" + enc_cfg.to_json().dump() + "|" +
      spec.contrastive.to_json().dump());
  nn::Checkpoint contrastive_ck = cache_or(contrastive_fp, [&] {
    return train::train_contrastive(corpus, enc_cfg, spec.contrastive, nullptr);
  });
  if (method == "contrastive") return contrastive_ck;

  // Supervised variants need the desk-scale teacher's pseudo-labels.
  if (!ctx.labels.count(corpus_id)) {
    fs::path lp = fs::path(ctx.out_dir) / "corpora" / corpus_id / "pseudo_labels.jsonl";
    if (fs::exists(lp)) {
      ctx.labels[corpus_id] = train::load_pseudo_labels(lp.string());
    } else {
      auto teacher =
          train::train_teacher(corpus, encoder_config_for(spec, "tiny-conv"), spec.teacher);
      ctx.labels[corpus_id] = train::generate_pseudo_labels(teacher, corpus.manifest, corpus.store);
      train::save_pseudo_labels(ctx.labels[corpus_id], lp.string());
    }
    std::string blob;
    for (const auto& r : ctx.labels[corpus_id])
      blob += r.clip_id + ":" + std::to_string(r.frame_index) + ":" + std::to_string(r.label) + ";";
    ctx.labels_fp[corpus_id] = core::content_fingerprint(blob);
  }

  train::JointConfig sup = spec.supervised;
  if (method == "contrastive+vs") sup.use_td = false;
  if (method == "contrastive+td") sup.use_vs = false;
  std::string sup_fp = core::content_fingerprint("supervised|" + contrastive_fp + "|" +
                                                 ctx.labels_fp.at(corpus_id) + "|" +
                                                 sup.to_json().dump());
  return cache_or(sup_fp, [&] {
    auto res = train::train_supervised(contrastive_ck, corpus, ctx.labels.at(corpus_id), sup,
                                       nullptr);
    return res.checkpoint;
  });
}

}  // namespace

BenchResult run_grid(const GridSpec& spec, const std::string& out_dir, int workers) {
  spec.validate();
  fs::create_directories(out_dir);

  StageContext ctx{spec, out_dir, {}, {}, {}, {}};
  for (const auto& axis : spec.corpora) ensure_corpus(ctx, axis);

  std::vector<env::Task> tasks;
  for (const auto& t : spec.tasks) tasks.push_back(env::parse_task(t));

  struct Cell {
    std::string corpus, arch, method;
    int n_demos;
    std::string fp;
    nn::Checkpoint ckpt;
  };

  // Resolve stages serially (shared prefixes computed once), then run
  // independent protocol cells, optionally in parallel.
  std::vector<Cell> cells;
  for (const auto& corpus : spec.corpora)
    for (const auto& arch : spec.architectures)
      for (const auto& method : spec.methods)
        for (int nd : spec.demos_axis()) {
          Cell c;
          c.corpus = corpus.id;
          c.arch = arch;
          c.method = method;
          c.n_demos = nd;
          c.ckpt = stage_checkpoint(ctx, corpus.id, arch, method);
          BCConfig proto = spec.protocol;
          proto.n_demos = nd;
          c.fp = core::content_fingerprint(
              "cell|" + c.ckpt.param_hash() + "|" + proto.to_json().dump() + "|" +
              nlohmann::json(spec.tasks).dump() + "|" + nlohmann::json(spec.seeds).dump());
          cells.push_back(std::move(c));
        }

  BenchResult result;
  result.spec_fingerprint = spec.fingerprint();
  result.rows.resize(cells.size());
  std::mutex mu;

  auto run_cell = [&](std::size_t i) {
    const Cell& c = cells[i];
    fs::path cell_dir = fs::path(out_dir) / "cells" / c.fp;
    BCConfig proto = spec.protocol;
    proto.n_demos = c.n_demos;
    EvalReport report;
    if (fs::exists(cell_dir / "report.json")) {
      report = EvalReport::load((cell_dir / "report.json").string());
    } else {
      fs::create_directories(cell_dir);
      env::RenderConfig rc{spec.image_hw, spec.image_hw};
      report = run_protocol(c.ckpt, tasks, spec.seeds, proto, cell_dir.string(), rc);
    }
    BenchRow row;
    row.corpus = c.corpus;
    row.architecture = c.arch;
    row.method = c.method;
    row.n_demos = c.n_demos;
    row.cell_fingerprint = c.fp;
    row.aggregate = report.aggregate;
    for (std::uint64_t seed : spec.seeds) {
      std::vector<double> per_task;
      for (const auto& cell : report.cells)
        if (cell.seed == seed) per_task.push_back(cell.best_success);
      row.per_seed_aggregate.push_back(aggregate_cells(per_task));
    }
    row.report_path = "cells/" + c.fp + "/report.json";
    std::lock_guard<std::mutex> lock(mu);
    result.rows[i] = std::move(row);
  };

  if (workers <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
  } else {
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex qmu;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          std::size_t i;
          {
            std::lock_guard<std::mutex> lock(qmu);
            if (next >= cells.size()) return;
            i = next++;
          }
          run_cell(i);
        }
      });
    for (auto& t : pool) t.join();
  }

  // Canonical row order regardless of execution order.
  std::sort(result.rows.begin(), result.rows.end(), [](const BenchRow& a, const BenchRow& b) {
    return std::tie(a.corpus, a.architecture, a.method, a.n_demos) <
           std::tie(b.corpus, b.architecture, b.method, b.n_demos);
  });
  result.save((fs::path(out_dir) / "result.json").string());
  return result;
}

ReportFormat parse_report_format(const std::string& s) {
  if (s == "table-text") return ReportFormat::TableText;
  if (s == "delimited") return ReportFormat::Delimited;
  if (s == "plot") return ReportFormat::Plot;
  throw std::invalid_argument("unknown report format: " + s);
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

void emit_table_text(const BenchResult& r, std::ostream& os) {
  os << "corpus               arch       method           demos  aggregate  per-seed\n";
  os << "---------------------------------------------------------------------------\n";
  for (const auto& row : r.rows) {
    char line[256];
    std::string per;
    for (double v : row.per_seed_aggregate) {
      if (!per.empty()) per += "/";
      per += fmt_double(v);
    }
    std::snprintf(line, sizeof(line), "%-20s %-10s %-16s %5d  %9s  %s\n", row.corpus.c_str(),
                  row.architecture.c_str(), row.method.c_str(), row.n_demos,
                  fmt_double(row.aggregate).c_str(), per.c_str());
    os << line;
  }
}

void emit_delimited(const BenchResult& r, std::ostream& os) {
  os << "corpus,architecture,method,n_demos,aggregate";
  std::size_t n_seeds = r.rows.empty() ? 0 : r.rows[0].per_seed_aggregate.size();
  for (std::size_t i = 0; i < n_seeds; ++i) os << ",seed" << i;
  os << "\n";
  for (const auto& row : r.rows) {
    os << row.corpus << "," << row.architecture << "," << row.method << "," << row.n_demos << ","
       << fmt_double(row.aggregate);
    for (double v : row.per_seed_aggregate) os << "," << fmt_double(v);
    os << "\n";
  }
}

// Success-vs-demos curves, one polyline per (corpus, arch, method) series.
void emit_plot(const BenchResult& r, std::ostream& os) {
  constexpr int W = 640, H = 420, ML = 60, MR = 30, MT = 30, MB = 50;
  std::map<std::string, std::map<int, double>> series;
  int dmin = 1 << 30, dmax = 0;
  for (const auto& row : r.rows) {
    series[row.corpus + " | " + row.architecture + " | " + row.method][row.n_demos] =
        row.aggregate;
    dmin = std::min(dmin, row.n_demos);
    dmax = std::max(dmax, row.n_demos);
  }
  if (dmax == dmin) dmax = dmin + 1;
  auto px = [&](double d) { return ML + (d - dmin) / (dmax - dmin) * (W - ML - MR); };
  auto py = [&](double v) { return H - MB - v * (H - MT - MB); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\">\n";
  os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  os << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR << "\" y2=\""
     << H - MB << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML << "\" y2=\"" << H - MB
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << (W / 2) << "\" y=\"" << H - 12
     << "\" text-anchor=\"middle\" font-size=\"13\">demonstrations</text>\n";
  os << "<text x=\"16\" y=\"" << (H / 2)
     << "\" font-size=\"13\" transform=\"rotate(-90 16 " << (H / 2)
     << ")\" text-anchor=\"middle\">aggregate best success</text>\n";
  static const char* colors[] = {"#c0392b", "#2980b9", "#27ae60", "#8e44ad",
                                 "#d35400", "#16a085", "#7f8c8d", "#2c3e50"};
  int ci = 0, legend_y = MT + 6;
  for (const auto& [name, pts] : series) {
    const char* color = colors[ci % 8];
    std::string path;
    for (const auto& [d, v] : pts) {
      char seg[64];
      std::snprintf(seg, sizeof(seg), "%s%.1f,%.1f ", path.empty() ? "" : "", px(d), py(v));
      path += seg;
    }
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\""
       << path << "\"/>\n";
    for (const auto& [d, v] : pts)
      os << "<circle cx=\"" << fmt_double(px(d)) << "\" cy=\"" << fmt_double(py(v))
         << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    os << "<text x=\"" << (ML + 10) << "\" y=\"" << legend_y << "\" font-size=\"11\" fill=\""
       << color << "\">" << name << "</text>\n";
    legend_y += 14;
    ++ci;
  }
  os << "</svg>\n";
}

}  // namespace

void emit_report(const BenchResult& result, ReportFormat format, const std::string& out_path) {
  if (result.rows.empty()) throw std::invalid_argument("emit_report: empty result");
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::runtime_error("emit_report: cannot open for write: " + out_path);
  switch (format) {
    case ReportFormat::TableText: emit_table_text(result, f); break;
    case ReportFormat::Delimited: emit_delimited(result, f); break;
    case ReportFormat::Plot: emit_plot(result, f); break;
  }
}

}  // namespace viprom::eval
