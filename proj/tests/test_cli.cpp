#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace std;
namespace fs = std::filesystem;

namespace {

const string kCli = VIPROM_CLI_PATH;

int run(const string& args, string* out = nullptr) {
  fs::path tmp = fs::temp_directory_path() / "viprom_cli_out.txt";
  string cmd = kCli + " " + args + " > " + tmp.string() + " 2>&1";
  int rc = std::system(cmd.c_str());
  if (out) {
    ifstream f(tmp);
    out->assign((istreambuf_iterator<char>(f)), istreambuf_iterator<char>());
  }
  return WEXITSTATUS(rc);
}

string slurp(const fs::path& p) {
  ifstream f(p, ios::binary);
  return string((istreambuf_iterator<char>(f)), istreambuf_iterator<char>());
}

bool dirs_equal_excluding_metrics(const fs::path& a, const fs::path& b) {
  vector<fs::path> rel;
  for (auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), a));
  for (auto& r : rel) {
    if (r.string().find(".metrics.jsonl") != string::npos) continue;
    if (!fs::exists(b / r)) return false;
    if (slurp(a / r) != slurp(b / r)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("--help lists all subcommands and exits 0") {
  string out;
  int rc = run("--help", &out);
  CHECK(rc == 0);
  for (const char* sub : {"build-manifest", "synth-corpus", "pretrain-contrastive",
                          "gen-pseudo-labels", "pretrain-supervised", "collect-demos", "bc-eval",
                          "bench", "report"})
    CHECK(out.find(sub) != string::npos);
}

TEST_CASE("unknown subcommand and invalid config keys give nonzero exits") {
  string out;
  CHECK(run("explode", &out) != 0);

  fs::path dir = fs::temp_directory_path() / "viprom_cli_cfg";
  fs::create_directories(dir);
  {
    ofstream f(dir / "bad.json");
    f << "{\"global\": {\"seed\": 1, \"bogus_key\": 2}}";
  }
  int rc = run("--config " + (dir / "bad.json").string() + " collect-demos --task reach --n 1 --out " +
                   (dir / "d.demos").string(),
               &out);
  CHECK(rc != 0);
  CHECK(out.find("bogus_key") != string::npos);
  fs::remove_all(dir);
}

TEST_CASE("synth-corpus twice with one seed produces identical artifacts") {
  fs::path dir = fs::temp_directory_path() / "viprom_cli_synth";
  fs::remove_all(dir);
  fs::create_directories(dir);
  string args = "synth-corpus --seed 9 --clips 4 --classes 2 --hw 16 --out ";
  CHECK(run(args + (dir / "a").string()) == 0);
  CHECK(run(args + (dir / "b").string()) == 0);
  CHECK(dirs_equal_excluding_metrics(dir / "a", dir / "b"));
  CHECK(fs::exists(dir / "a" / "manifest.json"));
  CHECK(fs::exists(dir / "a" / "config.resolved.json"));
  CHECK(fs::exists(dir / "a" / "config.fingerprint"));
  fs::remove_all(dir);
}

TEST_CASE("build-manifest consumes annotations and reports skip counts") {
  fs::path dir = fs::temp_directory_path() / "viprom_cli_manifest";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    ofstream f(dir / "ann.json");
    f << R"({"videos":[{"video_id":"v0","duration_s":10.0,
          "narrations":[{"timestamp_s":0.5,"text":"pick"},{"timestamp_s":4.0,"text":"place"},
                        {"timestamp_s":9.8,"text":"out of bounds"}]}]})";
  }
  string out;
  int rc = run("build-manifest --annotations " + (dir / "ann.json").string() +
                   " --fps 30 --duration 1.0 --downsample 10 --out " + (dir / "m.json").string(),
               &out);
  CHECK(rc == 0);
  CHECK(out.find("2 clips") != string::npos);
  CHECK(out.find("1 skipped") != string::npos);
  CHECK(fs::exists(dir / "m.json"));
  fs::remove_all(dir);
}

TEST_CASE("config fingerprint: semantically identical configs agree, seed changes it") {
  fs::path dir = fs::temp_directory_path() / "viprom_cli_fp";
  fs::remove_all(dir);
  fs::create_directories(dir);
  string args = "collect-demos --task reach --n 1 --hw 16 ";
  CHECK(run("--seed 3 " + args + "--out " + (dir / "a" / "d.demos").string()) == 0);
  CHECK(run("--seed 3 " + args + "--out " + (dir / "b" / "d.demos").string()) == 0);
  CHECK(run("--seed 4 " + args + "--out " + (dir / "c" / "d.demos").string()) == 0);
  string fa = slurp(dir / "a" / "config.fingerprint");
  string fb = slurp(dir / "b" / "config.fingerprint");
  string fc = slurp(dir / "c" / "config.fingerprint");
  CHECK(fa == fb);
  CHECK(fa != fc);
  CHECK(slurp(dir / "a" / "d.demos") == slurp(dir / "b" / "d.demos"));
  CHECK(fa.size() == 17);  // 16 hex chars + newline
  fs::remove_all(dir);
}

TEST_CASE("pipeline smoke through the CLI: corpus -> contrastive -> labels -> supervised") {
  fs::path dir = fs::temp_directory_path() / "viprom_cli_pipe";
  fs::remove_all(dir);
  fs::create_directories(dir);
  string corpus = (dir / "corpus").string();
  CHECK(run("synth-corpus --seed 5 --clips 6 --classes 2 --hw 16 --out " + corpus) == 0);
  CHECK(run("pretrain-contrastive --manifest " + corpus +
            "/manifest.json --arch tiny-conv --epochs 1 --batch 6 --width 4 --embedding-dim 16 "
            "--seed 2 --out " +
            (dir / "c.ckpt").string()) == 0);
  CHECK(run("gen-pseudo-labels --manifest " + corpus + "/manifest.json --teacher oracle --out " +
            (dir / "labels.jsonl").string()) == 0);
  CHECK(run("pretrain-supervised --ckpt " + (dir / "c.ckpt").string() + " --manifest " + corpus +
            "/manifest.json --labels " + (dir / "labels.jsonl").string() +
            " --steps 5 --seed 2 --out " + (dir / "s.ckpt").string()) == 0);
  CHECK(fs::exists(dir / "s.ckpt"));

  // report subcommand on a missing result errors out.
  string out;
  CHECK(run("report --result /nonexistent.json --out " + (dir / "r.txt").string(), &out) != 0);
  fs::remove_all(dir);
}
