#include <doctest.h>

#include <sstream>

#include "narrative/cli.hpp"
#include "narrative/corpus.hpp"
#include "narrative/synthetic.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace narrative;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  auto r = run({"stats", "--data", "x.jsonl", "--bogus"});
  CHECK(r.code == 2);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(run({"stats"}).code == 2);  // --data is required
  CHECK(run({"cv", "--data", "x", "--k", "1"}).code == 2);
  auto help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("augment-exp") != std::string::npos);
}

TEST_CASE("runtime errors exit with 1 and a message") {
  auto r = run({"stats", "--data", "/nonexistent/file.jsonl"});
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error: ", 0) == 0);
}

TEST_CASE("stats prints the class distribution row") {
  testing::TempDir dir;
  save_jsonl(count_replay_corpus(testing::kFdCounts, {}), dir / "fd.jsonl");
  auto r = run({"stats", "--data", (dir / "fd.jsonl").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("| fd.jsonl | 26(6%) | 116(27%) | 37(9%) | 7(2%) | 108(25%) | 134(31%) | 0(0%) | 428 |") !=
        std::string::npos);
}

TEST_CASE("synth, train, classify and cv") {
  testing::TempDir dir;
  const auto data = (dir / "syn.jsonl").string();
  const auto ckpt = (dir / "m.ckpt").string();
  REQUIRE(run({"synth", "--out", data, "--per-class", "12", "--seed", "3"}).code == 0);
  CHECK(load_dataset(data).documents.size() == 84);

  const auto cfg = testing::write_file(
      dir / "cfg.json", R"({"cantm": {"topics": 6, "class_topics": 3, "encoder": {"dim": 8}}})");
  auto t = run({"train", "--data", data, "--checkpoint", ckpt, "--config", cfg.string(),
                "--epochs", "2"});
  REQUIRE(t.code == 0);
  CHECK(t.out.find("epoch 2") != std::string::npos);

  auto c = run({"classify", "--checkpoint", ckpt, "--text", "c00w01 c00w02 c00w03"});
  REQUIRE(c.code == 0);
  CHECK(c.out.rfind("text\t", 0) == 0);
  CHECK(c.out.find("AnimalVac=") != std::string::npos);
  auto e = run({"classify", "--checkpoint", ckpt, "--text", "c00w01 c00w02", "--explain"});
  CHECK(e.code == 0);
  CHECK(e.out.size() > c.out.size());
  CHECK(run({"classify", "--checkpoint", ckpt}).code == 1);

  auto cv1 = run({"cv", "--data", data, "--model", "bow_lr", "--k", "3", "--seed", "1"});
  auto cv2 = run({"cv", "--data", data, "--model", "bow_lr", "--k", "3", "--seed", "1"});
  REQUIRE(cv1.code == 0);
  CHECK(cv1.out == cv2.out);
  CHECK(nlohmann::json::parse(cv1.out)["n_runs"] == 3);

  auto md = run({"cv", "--data", data, "--model", "bow_lr", "--k", "3", "--out",
                 (dir / "cv.md").string()});
  CHECK(md.code == 0);
  CHECK(std::filesystem::exists(dir / "cv.json"));
}

TEST_CASE("match and dedup") {
  testing::TempDir dir;
  const std::vector<Document> posts = {testing::doc("a", "The deep state wants this vaccine"),
                                       testing::doc("b", "The weather is nice"),
                                       testing::doc("c", "The weather is nice")};
  save_jsonl(posts, dir / "posts.jsonl");
  auto m = run({"match", "--data", (dir / "posts.jsonl").string(), "--out",
                (dir / "queue.csv").string()});
  REQUIRE(m.code == 0);
  CHECK(m.out.find("1 candidates of 3 documents") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "queue.csv"));
  auto d = run({"dedup", "--data", (dir / "posts.jsonl").string()});
  CHECK(d.out == "kept 2, removed 1 duplicates\n");
}
