#include <doctest.h>

#include <algorithm>
#include <set>

#include "cli_golden.hpp"

using namespace otfs;
namespace fs = std::filesystem;

namespace {

// Scratch directory per test case; restores the working directory on exit.
struct Scratch {
  fs::path previous = fs::current_path();
  explicit Scratch(const std::string& name) {
    const fs::path dir = fs::path(OTFS_WORK_DIR) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    fs::current_path(dir);
  }
  ~Scratch() { fs::current_path(previous); }
};

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

void make_toy() {
  REQUIRE(golden::invoke({"synth", "--seed", "3", "-n", "90", "--classes", "3", "--relevant", "2", "--noise", "3",
                          "--duplicates", "1", "--out-dir", "toy", "--quiet"}) == 0);
}

Json read_json(const fs::path& p) { return Json::parse(golden::slurp(p)); }

std::vector<Json> read_jsonl(const fs::path& p) {
  std::istringstream in(golden::slurp(p));
  std::vector<Json> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(Json::parse(line));
  return out;
}

bool has_partial_or(const fs::path& dir, const std::string& name) {
  if (!fs::exists(dir)) return false;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string f = e.path().filename().string();
    if (f == name || f.ends_with(".partial")) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("golden outputs for every command and echoed-config re-runs") {
  const auto outcome = golden::check_all(fs::path(OTFS_WORK_DIR) / "golden", OTFS_GOLDEN_DIR, golden::update_requested());
  for (const auto& f : outcome.failures) INFO(f);
  for (const auto& f : outcome.failures) CHECK_MESSAGE(false, f);
  CHECK(outcome.ok());
}

TEST_CASE("select writes a report with the requested size") {
  Scratch s("select");
  make_toy();
  REQUIRE(golden::invoke({"select", "--data", "toy/synth.csv", "--label", "label", "--criterion", "frobenius",
                          "--strategy", "greedy", "-m", "3", "--seed", "7", "--out-dir", "out", "--quiet"}) == 0);
  const Json r = read_json("out/selection.json");
  CHECK(r["result"]["chosen"].size() == 3);
  CHECK(r["command"] == "select");
  CHECK(r["config"]["seed"] == "7");
  CHECK(r["timing"].contains("wall_seconds"));
  CHECK(r["version"] == kVersion);

  // Two runs agree up to timing fields.
  REQUIRE(golden::invoke({"select", "--data", "toy/synth.csv", "--label", "label", "--criterion", "frobenius",
                          "--strategy", "greedy", "-m", "3", "--seed", "7", "--out-dir", "again", "--quiet"}) == 0);
  Json a = read_json("out/selection.json");
  Json b = read_json("again/selection.json");
  golden::strip_timing(a);
  golden::strip_timing(b);
  a["config"].erase("out-dir");
  b["config"].erase("out-dir");
  a.erase("config_hash");
  b.erase("config_hash");
  CHECK(a == b);

  // Thread count does not change results.
  REQUIRE(golden::invoke({"select", "--data", "toy/synth.csv", "--label", "label", "--criterion", "frobenius",
                          "--strategy", "greedy", "-m", "3", "--seed", "7", "--out-dir", "one", "--threads", "1",
                          "--quiet"}) == 0);
  CHECK(read_json("one/selection.json")["result"]["chosen"] == read_json("out/selection.json")["result"]["chosen"]);
}

TEST_CASE("exit codes") {
  Scratch s("codes");
  make_toy();
  std::string err;
  CHECK(golden::invoke({"select", "--data", "toy/synth.csv", "--label", "label", "--criterion", "mutual_info",
                        "--out-dir", "bad"},
                       &err) == 2);
  CHECK(err.find("Usage") != std::string::npos);
  CHECK_FALSE(has_partial_or("bad", "selection.json"));

  CHECK(golden::invoke({"select", "--data", "toy/synth.csv", "--label", "label", "--bogus"}) == 2);
  CHECK(golden::invoke({"select", "--label", "label"}) == 2);
  CHECK(golden::invoke({}) == 2);
  CHECK(golden::invoke({"select", "--data", "toy/synth.csv", "--label", "label", "-m", "99"}) == 2);
  CHECK(golden::invoke({"select", "--data", "missing.csv", "--label", "label", "--out-dir", "gone"}) == 3);
  CHECK_FALSE(has_partial_or("gone", "selection.json"));
  CHECK(golden::invoke({"select", "--data", "toy/synth.csv", "--label", "nope"}) == 2);
  CHECK(golden::invoke({"gw", "--data", "toy/synth.csv", "--label", "label", "--sets", "99", "--quiet"}) == 2);
  CHECK(golden::invoke({"gw", "--data", "toy/synth.csv", "--label", "label", "--sets", "rel_9", "--quiet"}) == 2);
  CHECK(golden::invoke({"eval", "--data", "toy/synth.csv", "--label", "label", "--methods", "", "--sizes", "1",
                        "--quiet"}) == 2);
  CHECK(golden::invoke({"eval", "--data", "toy/synth.csv", "--label", "label", "--sizes", "3,2", "--quiet"}) == 2);
  CHECK(golden::invoke({"synth", "--classes", "1"}) == 2);
  CHECK(golden::invoke({"select", "--config", "absent.cfg", "--data", "toy/synth.csv"}) == 2);

  write_text("broken.csv", "a,label\n1,x\nnan,y\n");
  CHECK(golden::invoke({"select", "--data", "broken.csv", "--label", "label", "-m", "1", "--quiet"}, &err) == 3);
  CHECK(err.find("line 3") != std::string::npos);
}

TEST_CASE("solver cap is reported with exit 4 and a flagged report") {
  Scratch s("cap");
  make_toy();
  CHECK(golden::invoke({"gw", "--data", "toy/synth.csv", "--label", "label", "--sets", "rel_0", "--max-sinkhorn", "1", "--epsilon",
                        "0.001", "--gw-cap", "30", "--out-dir", "out", "--quiet"}) == 4);
  const auto lines = read_jsonl("out/gw.jsonl");
  REQUIRE(lines.size() == 2);
  CHECK(lines[0]["converged"] == false);
  CHECK(lines[1]["converged"] == false);
}

TEST_CASE("config file sits under command-line options") {
  Scratch s("config");
  make_toy();
  write_text("run.cfg",
             "# comment\ndata=toy/synth.csv\nlabel = label\nsize=2\ncriterion=frobenius\nstrategy=rank\nquiet=true\n");
  REQUIRE(golden::invoke({"select", "--config", "run.cfg", "--out-dir", "a"}) == 0);
  CHECK(read_json("a/selection.json")["result"]["chosen"].size() == 2);
  REQUIRE(golden::invoke({"select", "--config=run.cfg", "-m", "4", "--out-dir", "b"}) == 0);
  CHECK(read_json("b/selection.json")["result"]["chosen"].size() == 4);
  CHECK(read_json("b/selection.json")["config"]["size"] == "4");

  write_text("unknown.cfg", "data=toy/synth.csv\nlabel=label\nfrobnicate=1\n");
  CHECK(golden::invoke({"select", "--config", "unknown.cfg", "--out-dir", "c"}) == 2);
  write_text("garbled.cfg", "data toy/synth.csv\n");
  CHECK(golden::invoke({"select", "--config", "garbled.cfg"}) == 2);

  CHECK(cli::format_config({{"a", "1"}, {"b", "x y"}}) == "a=1\nb=x y\n");
  const auto back = cli::read_config_file("run.cfg");
  REQUIRE(back.size() == 6);
  CHECK(back[1] == std::pair<std::string, std::string>{"label", "label"});
}

TEST_CASE("distmat outputs") {
  Scratch s("distmat");
  make_toy();
  REQUIRE(golden::invoke({"distmat", "--data", "toy/synth.csv", "--label", "label", "--sets", "rel_0", "--out-dir",
                          "one", "--quiet"}) == 0);
  const std::string csv = golden::slurp("one/distmat_0.csv");
  CHECK(csv.starts_with("class,c0,c1,c2\nc0,0,"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

  REQUIRE(golden::invoke({"distmat", "--data", "toy/synth.csv", "--label", "label", "--sets", "rel_0,rel_1",
                          "--relative-to", "rel_0,rel_1", "--out-dir", "rel", "--quiet"}) == 0);
  CHECK(golden::slurp("rel/relchange_0.csv") == "class,c0,c1,c2\nc0,0,0,0\nc1,0,0,0\nc2,0,0,0\n");

  // No set given: one matrix per column.
  REQUIRE(golden::invoke({"distmat", "--data", "toy/synth.csv", "--label", "label", "--out-dir", "all", "--quiet"}) ==
          0);
  CHECK(read_json("all/distmat.json")["matrices"].size() == 6);

  write_text("flat.csv", "a,b,label\n1,0,x\n1,1,x\n1,2,y\n1,3,y\n");
  std::string err;
  CHECK(golden::invoke({"distmat", "--data", "flat.csv", "--label", "label", "--sets", "a", "--scaled", "--out-dir",
                        "flat", "--quiet"},
                       &err) == 3);
  CHECK(err.find("mean") != std::string::npos);
  CHECK_FALSE(has_partial_or("flat", "distmat.json"));
}

TEST_CASE("gw outputs") {
  Scratch s("gw");
  make_toy();
  REQUIRE(golden::invoke({"gw", "--data", "toy/synth.csv", "--label", "label", "--redundancy-of",
                          "rel_0_dup:rel_0,rel_0_dup", "--gw-cap", "40", "--out-dir", "out", "--quiet"}) == 0);
  const auto lines = read_jsonl("out/gw.jsonl");
  REQUIRE(lines.size() == 3);
  CHECK(lines[0]["kind"] == "run");
  CHECK(lines[1]["kind"] == "gw_to_full");
  CHECK(lines[1]["gwd"].get<double>() <= 1e-6);
  CHECK(lines[2]["kind"] == "redundancy");
  CHECK(lines[2]["redundancy"].get<double>() == 1.0 / 1e-9);
}

TEST_CASE("eval outputs") {
  Scratch s("eval");
  REQUIRE(golden::invoke({"synth", "--seed", "1", "-n", "60", "--classes", "2", "--relevant", "1", "--noise", "49",
                          "--out-dir", "wide", "--quiet"}) == 0);
  REQUIRE(golden::invoke({"eval", "--data", "wide/synth.csv", "--label", "label", "--methods", "first,variance_ratio",
                          "--sizes", "10:50:10", "--repeats", "10", "--out-dir", "curve", "--quiet"}) == 0);
  const std::string csv = golden::slurp("curve/curve.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 101);
  CHECK(csv.starts_with("method,size,repeat,accuracy\nfirst,10,0,"));
  const Json summary = read_json("curve/summary.json");
  CHECK(summary["summary"].size() == 10);
  CHECK(summary["repeat_seeds"].size() == 10);

  REQUIRE(golden::invoke({"eval", "--data", "wide/synth.csv", "--label", "label", "--methods", "variance_ratio",
                          "--sizes", "5", "--repeats", "1", "--out-dir", "single", "--quiet"}) == 0);
  const Json one = read_json("single/summary.json");
  REQUIRE(one["summary"].size() == 1);
  CHECK(one["summary"][0]["std"].get<double>() == 0.0);
  CHECK(one["summary"][0]["mean"] == one["summary"][0]["min"]);
}

TEST_CASE("synth outputs") {
  Scratch s("synth");
  REQUIRE(golden::invoke({"synth", "--seed", "5", "--out-dir", "a", "--quiet"}) == 0);
  REQUIRE(golden::invoke({"synth", "--seed", "5", "--out-dir", "b", "--quiet"}) == 0);
  CHECK(golden::slurp("a/synth.csv") == golden::slurp("b/synth.csv"));
  const Dataset ds = load_csv("a/synth.csv", true, std::string("label"));
  CHECK(ds.n_samples() == 500);
  CHECK(ds.n_features() == 10);
  CHECK(ds.n_classes() == 2);
  const Json m = read_json("a/synth_manifest.json");
  CHECK(m["relevant"].size() == 1);
  CHECK(m["noise"].size() == 9);
  CHECK(m["label_column"] == "label");

  // Noise augmentation of an existing file keeps its columns.
  REQUIRE(golden::invoke({"synth", "--data", "a/synth.csv", "--label", "label", "--add-noise", "3", "--out-dir", "aug",
                          "--quiet"}) == 0);
  const Dataset aug = load_csv("aug/synth.csv", true, std::string("label"));
  CHECK(aug.n_features() == 13);
  CHECK(aug.x.leftCols(10) == ds.x);
  CHECK(golden::invoke({"synth", "--data", "a/synth.csv", "--out-dir", "x", "--quiet"}) == 2);

  // Without separation no column is a stable winner.
  std::set<std::size_t> tops;
  for (int seed = 0; seed < 10; ++seed) {
    const std::string dir = "null" + std::to_string(seed);
    REQUIRE(golden::invoke({"synth", "--seed", std::to_string(seed), "--separation", "0", "--out-dir", dir, "--quiet"}) ==
            0);
    tops.insert(rank_by_disparity(load_csv(dir + "/synth.csv", true, std::string("label")), {}).front().feature);
  }
  CHECK(tops.size() > 1);
}
