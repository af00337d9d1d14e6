// bench.hpp - grid runner over corpus x architecture x method (x demos), with
// fingerprint-keyed stage caching and table / delimited / plot reports.
#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "viprom/data/synthetic.hpp"
#include "viprom/eval/imitation.hpp"
#include "viprom/train/contrastive.hpp"
#include "viprom/train/supervised.hpp"

namespace viprom::eval {

inline constexpr const char* kCodeVersion = "viprom 0.1.0";

extern const std::vector<std::string> kMethods;  // scratch .. viprom-full
bool is_known_method(const std::string& m);

struct CorpusAxis {
  std::string id;
  std::string kind = "synthetic-temporal";  // synthetic-temporal | synthetic-static | dir
  int n_clips = 240;
  int n_classes = 4;
  std::uint64_t seed = 7;
  std::string path;  // for kind == "dir"
};

struct GridSpec {
  std::vector<CorpusAxis> corpora;
  std::vector<std::string> architectures = {"tiny-conv"};
  std::vector<std::string> methods = {"scratch", "contrastive", "viprom-full"};
  std::vector<int> demos;  // defaults to {protocol.n_demos}
  std::vector<std::uint64_t> seeds = kProtocolSeeds;
  std::vector<std::string> tasks = {"reach", "push", "open-slider", "close-slider"};
  std::uint64_t seed = 1;  // pre-training stage seed
  int embedding_dim = 64;
  int width = 8;
  int image_hw = 24;
  train::ContrastiveConfig contrastive;
  train::JointConfig supervised;
  train::TeacherFitConfig teacher;
  BCConfig protocol;

  nlohmann::ordered_json to_json() const;
  static GridSpec from_json(const nlohmann::json& j);  // rejects unknown keys
  static GridSpec load(const std::string& path);
  void validate() const;
  std::string fingerprint() const;
  std::vector<int> demos_axis() const { return demos.empty() ? std::vector<int>{protocol.n_demos} : demos; }
};

struct BenchRow {
  std::string corpus;
  std::string architecture;
  std::string method;
  int n_demos = 5;
  std::string cell_fingerprint;
  double aggregate = 0.0;
  std::vector<double> per_seed_aggregate;  // mean over tasks, per protocol seed
  std::string report_path;
};

struct BenchResult {
  int schema_version = 1;
  std::string code_version = kCodeVersion;
  std::string spec_fingerprint;
  std::vector<BenchRow> rows;

  nlohmann::ordered_json to_json() const;
  static BenchResult from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static BenchResult load(const std::string& path);
};

// Executes the grid; shared stage checkpoints run once (fingerprint-keyed
// cache under out_dir/stages). Reruns reuse existing cells (append-only,
// dedup by fingerprint). workers>1 runs protocol cells in parallel threads.
BenchResult run_grid(const GridSpec& spec, const std::string& out_dir, int workers = 1);

enum class ReportFormat { TableText, Delimited, Plot };
ReportFormat parse_report_format(const std::string& s);

void emit_report(const BenchResult& result, ReportFormat format, const std::string& out_path);

}  // namespace viprom::eval
