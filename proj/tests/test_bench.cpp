#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "test_util.hpp"
#include "viprom/eval/bench.hpp"

using namespace viprom;
namespace fs = std::filesystem;

namespace {

// A deliberately tiny grid so plumbing tests stay fast.
eval::GridSpec tiny_spec() {
  eval::GridSpec s;
  s.corpora = {{"toy", "synthetic-temporal", 12, 2, 3, ""}};
  s.architectures = {"tiny-conv"};
  s.methods = {"scratch", "viprom-full"};
  s.seeds = {100};
  s.tasks = {"reach"};
  s.embedding_dim = 16;
  s.width = 4;
  s.image_hw = 16;
  s.contrastive.epochs = 2;
  s.contrastive.batch = 8;
  s.supervised.steps = 20;
  s.supervised.holdout_frac = 0.0f;
  s.supervised.eval_every = 0;
  s.teacher.steps = 40;
  s.protocol.toy = true;
  s.protocol.steps = 200;
  s.protocol.eval_every = 100;
  s.protocol.eval_episodes = 4;
  s.protocol.n_demos = 2;
  return s;
}

}  // namespace

TEST_CASE("grid spec: json round-trip, validation, unknown keys rejected") {
  auto s = tiny_spec();
  auto j = s.to_json();
  auto back = eval::GridSpec::from_json(j);
  CHECK(back.to_json().dump() == j.dump());
  CHECK(back.fingerprint() == s.fingerprint());

  auto bad = j;
  bad["unexpected_key"] = 1;
  CHECK_THROWS(eval::GridSpec::from_json(bad));

  auto bad2 = j;
  bad2["methods"] = {"scratch", "made-up"};
  CHECK_THROWS(eval::GridSpec::from_json(bad2));

  auto bad3 = j;
  bad3["tasks"] = nlohmann::json::array();
  CHECK_THROWS(eval::GridSpec::from_json(bad3));
}

TEST_CASE("run_grid: row counting, caching, determinism, report formats") {
  auto spec = tiny_spec();
  fs::path dir = fs::temp_directory_path() / "viprom_bench_test";
  fs::remove_all(dir);

  auto result = eval::run_grid(spec, (dir / "run1").string(), 1);
  // |rows| = |corpora| x |archs| x |methods| x |demos|
  CHECK(result.rows.size() == 2);
  for (const auto& row : result.rows) {
    CHECK(row.n_demos == 2);
    CHECK(row.per_seed_aggregate.size() == 1);
    CHECK(fs::exists(dir / "run1" / row.report_path));
  }
  bool first_row_ok = result.rows[0].method == "contrastive" || result.rows[0].method == "scratch";
  CHECK(first_row_ok);

  // Rerun with the identical spec reuses cells: identical result bytes.
  auto result2 = eval::run_grid(spec, (dir / "run1").string(), 1);
  CHECK(result2.to_json().dump() == result.to_json().dump());

  // A fresh out dir recomputes everything; stage checkpoints are bit-equal.
  auto result3 = eval::run_grid(spec, (dir / "run2").string(), 1);
  CHECK(result3.to_json().at("rows").dump() == result.to_json().at("rows").dump());
  for (const auto& entry : fs::directory_iterator(dir / "run1" / "stages")) {
    fs::path other = dir / "run2" / "stages" / entry.path().filename();
    REQUIRE(fs::exists(other));
    std::ifstream f1(entry.path(), std::ios::binary), f2(other, std::ios::binary);
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
  }

  // Parallel workers produce the same result.
  auto result4 = eval::run_grid(spec, (dir / "run3").string(), 2);
  CHECK(result4.to_json().at("rows").dump() == result.to_json().at("rows").dump());

  SUBCASE("report formats render deterministically and delimited round-trips") {
    eval::emit_report(result, eval::ReportFormat::TableText, (dir / "t.txt").string());
    eval::emit_report(result, eval::ReportFormat::Delimited, (dir / "t.csv").string());
    eval::emit_report(result, eval::ReportFormat::Plot, (dir / "t.svg").string());
    eval::emit_report(result, eval::ReportFormat::Plot, (dir / "t2.svg").string());

    std::ifstream ft(dir / "t.txt");
    std::string table((std::istreambuf_iterator<char>(ft)), std::istreambuf_iterator<char>());
    CHECK(table.find("scratch") != std::string::npos);
    CHECK(table.find("viprom-full") != std::string::npos);

    // Delimited output parses back to the same aggregates.
    std::ifstream fc(dir / "t.csv");
    std::string line;
    std::getline(fc, line);  // header
    int row_idx = 0;
    while (std::getline(fc, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::string cur;
      for (char c : line + ",") {
        if (c == ',') {
          cells.push_back(cur);
          cur.clear();
        } else {
          cur += c;
        }
      }
      REQUIRE(cells.size() >= 5);
      double agg = std::stod(cells[4]);
      CHECK(agg == doctest::Approx(result.rows[static_cast<std::size_t>(row_idx)].aggregate)
                       .epsilon(1e-4));
      ++row_idx;
    }
    CHECK(row_idx == 2);

    std::ifstream s1f(dir / "t.svg", std::ios::binary), s2f(dir / "t2.svg", std::ios::binary);
    std::string svg1((std::istreambuf_iterator<char>(s1f)), std::istreambuf_iterator<char>());
    std::string svg2((std::istreambuf_iterator<char>(s2f)), std::istreambuf_iterator<char>());
    CHECK(!svg1.empty());
    CHECK(svg1 == svg2);
    CHECK(svg1.find("<svg") != std::string::npos);

    CHECK_THROWS(eval::parse_report_format("pdf"));
    eval::BenchResult empty;
    CHECK_THROWS(eval::emit_report(empty, eval::ReportFormat::TableText, (dir / "e.txt").string()));
  }

  // Bench result file round-trip.
  auto loaded = eval::BenchResult::load((dir / "run1" / "result.json").string());
  CHECK(loaded.to_json().dump() == result.to_json().dump());

  fs::remove_all(dir);
}

TEST_CASE("run_grid: ablation methods mirror the four-row structure") {
  auto spec = tiny_spec();
  spec.methods = {"contrastive", "contrastive+vs", "contrastive+td", "viprom-full"};
  fs::path dir = fs::temp_directory_path() / "viprom_bench_abl";
  fs::remove_all(dir);
  auto result = eval::run_grid(spec, dir.string(), 1);
  REQUIRE(result.rows.size() == 4);
  std::set<std::string> methods;
  for (const auto& r : result.rows) methods.insert(r.method);
  std::set<std::string> expected = {"contrastive", "contrastive+vs", "contrastive+td",
                                    "viprom-full"};
  CHECK(methods == expected);
  fs::remove_all(dir);
}

TEST_CASE("run_grid: missing external corpus is rejected naming the cell") {
  auto spec = tiny_spec();
  spec.corpora = {{"ext", "dir", 0, 0, 0, "/nonexistent/corpus/dir"}};
  fs::path dir = fs::temp_directory_path() / "viprom_bench_missing";
  fs::remove_all(dir);
  CHECK_THROWS(eval::run_grid(spec, dir.string(), 1));
  fs::remove_all(dir);
}
