#include <doctest.h>

#include <map>
#include <numeric>
#include <random>
#include <set>

#include "narrative/corpus.hpp"
#include "narrative/error.hpp"
#include "narrative/synthetic.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace narrative;
using testing::TempDir;
using testing::write_file;

namespace {

constexpr auto& kFd = testing::kFdCounts;
constexpr auto& kAugmented = testing::kAugmentedCounts;
using testing::added_counts;

void check_stratified(std::span<const Document> docs, const FoldAssignment& folds) {
  const auto k = static_cast<std::size_t>(folds.k);
  std::set<std::size_t> seen;
  std::vector<std::array<int, kNumClasses>> per_fold(k);
  for (std::size_t f = 0; f < k; ++f) {
    for (std::size_t i : folds.folds[f]) {
      CHECK(seen.insert(i).second);
      ++per_fold[f][label_index(*docs[i].label)];
      CHECK(folds.fold_of.at(docs[i].id) == static_cast<int>(f));
    }
  }
  CHECK(seen.size() == docs.size());
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    int lo = 1 << 30, hi = 0;
    for (const auto& f : per_fold) {
      lo = std::min(lo, f[c]);
      hi = std::max(hi, f[c]);
    }
    CHECK(hi - lo <= 1);
  }
  std::size_t lo = docs.size(), hi = 0;
  for (const auto& f : folds.folds) {
    lo = std::min(lo, f.size());
    hi = std::max(hi, f.size());
  }
  CHECK(hi - lo <= 1);
}

}  // namespace

TEST_CASE("load_dataset reads JSONL rows in order") {
  TempDir tmp;
  const auto path = write_file(
      tmp / "d.jsonl",
      R"({"id":"a","text":"first","platform":"twitter","label":"Cons","origin":"fd","alt_text":null}
{"id":"b","text":"second","platform":"facebook","label":null,"origin":"unlabeled","alt_text":null}

{"id":"c","text":"","platform":"instagram","label":"sen","alt_text":"picture words"}
)");
  const LoadResult r = load_dataset(path);
  REQUIRE(r.documents.size() == 3);
  CHECK(r.documents[0].id == "a");
  CHECK(r.documents[0].label == Label::Cons);
  CHECK(r.documents[0].platform == Platform::twitter);
  CHECK_FALSE(r.documents[1].label);
  CHECK(r.documents[1].origin == Origin::unlabeled);
  CHECK(r.documents[2].label == Label::SEN);
  CHECK(r.documents[2].origin == Origin::fd);
  CHECK(r.documents[2].content() == "picture words");
  CHECK(r.skipped_empty == 0);
}

TEST_CASE("load_dataset errors name the row") {
  TempDir tmp;
  const auto bad_label = write_file(tmp / "l.jsonl",
                                    "{\"id\":\"a\",\"text\":\"x\",\"label\":\"Cons\"}\n"
                                    "{\"id\":\"b\",\"text\":\"y\",\"label\":\"Vaccine\"}\n");
  try {
    load_dataset(bad_label);
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("l.jsonl:2") != std::string::npos);
    CHECK(msg.find("Vaccine") != std::string::npos);
  }
  CHECK_THROWS_AS(load_dataset(write_file(tmp / "m.jsonl", "{\"id\":\"a\",\n")), Error);
  CHECK_THROWS_AS(load_dataset(write_file(tmp / "p.jsonl",
                                          "{\"id\":\"a\",\"text\":\"x\",\"platform\":\"tiktok\"}\n")),
                  Error);
  CHECK_THROWS_AS(load_dataset(write_file(tmp / "dup.jsonl",
                                          "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"a\",\"text\":\"y\"}\n")),
                  Error);
  CHECK_THROWS_AS(load_dataset(tmp / "missing.jsonl"), Error);
}

TEST_CASE("video-only rows are skipped and counted") {
  TempDir tmp;
  const auto path = write_file(tmp / "v.jsonl",
                               "{\"id\":\"a\",\"text\":\"   \",\"alt_text\":null}\n"
                               "{\"id\":\"b\",\"text\":\"kept\"}\n");
  const LoadResult r = load_dataset(path);
  CHECK(r.documents.size() == 1);
  CHECK(r.skipped_empty == 1);
}

TEST_CASE("CSV ingestion with empty strings as null") {
  TempDir tmp;
  const auto path = write_file(tmp / "d.csv",
                               "id,text,platform,label,origin,alt_text\n"
                               "1,\"hello, world\",twitter,DPA,,\n"
                               "2,,news,,unlabeled,alt only\n");
  const LoadResult r = load_dataset(path);
  REQUIRE(r.documents.size() == 2);
  CHECK(r.documents[0].text == "hello, world");
  CHECK(r.documents[0].label == Label::DPA);
  CHECK(r.documents[0].origin == Origin::fd);
  CHECK(r.documents[1].content() == "alt only");
  CHECK_FALSE(r.documents[1].label);

  CHECK_THROWS_AS(load_dataset(write_file(tmp / "h.csv", "id,text\n1,x\n")), Error);
  CHECK_THROWS_AS(load_dataset(write_file(tmp / "n.csv",
                                          "id,text,platform,label,origin,alt_text\n1,x,twitter\n")),
                  Error);
}

TEST_CASE("JSONL save and load round-trip") {
  TempDir tmp;
  std::vector<Document> docs = {testing::doc("x", "some \"quoted\" text", Label::PE),
                                testing::doc("y", "caf\xC3\xA9")};
  docs[1].alt_text = "alt";
  docs[1].platform = Platform::news;
  save_jsonl(docs, tmp / "out.jsonl");
  const auto back = load_dataset(tmp / "out.jsonl").documents;
  REQUIRE(back.size() == 2);
  CHECK(back[0].text == docs[0].text);
  CHECK(back[0].label == Label::PE);
  CHECK(back[1].alt_text == "alt");
  CHECK(back[1].platform == Platform::news);
  CHECK(back[1].origin == Origin::unlabeled);
}

TEST_CASE("deduplicate compares cleaned, case-folded content") {
  const std::vector<Document> docs = {testing::doc("1", "Vaccines work! #x"),
                                      testing::doc("2", "vaccines work!"),
                                      testing::doc("3", "something else"),
                                      testing::doc("4", "Vaccines work! #x")};
  const DedupResult r = deduplicate(docs);
  REQUIRE(r.documents.size() == 2);
  CHECK(r.documents[0].id == "1");
  CHECK(r.documents[1].id == "3");
  CHECK(r.removed == 2);
  const DedupResult again = deduplicate(r.documents);
  CHECK(again.removed == 0);
  CHECK(again.documents.size() == r.documents.size());
}

TEST_CASE("class distribution replays the published counts") {
  const auto fd = distribution_from_counts(kFd);
  CHECK(fd.total == 428);
  CHECK(fd.rounded_percent() == std::array<int, kNumClasses>{6, 27, 9, 2, 25, 31, 0});
  const auto aug = distribution_from_counts(kAugmented);
  CHECK(aug.total == 805);
  CHECK(aug.rounded_percent() == std::array<int, kNumClasses>{13, 14, 12, 19, 13, 17, 12});
  CHECK(std::accumulate(aug.proportions.begin(), aug.proportions.end(), 0.0) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // Same numbers through documents.
  const auto docs = count_replay_corpus(kFd, added_counts());
  const auto dist = class_distribution(docs);
  CHECK(dist.counts == kAugmented);

  const auto single = class_distribution(std::vector<Document>{testing::doc("s", "t", Label::SEN)});
  CHECK(single.proportions[label_index(Label::SEN)] == 1.0);
  CHECK_THROWS_AS(class_distribution(std::vector<Document>{testing::doc("u", "t")}), Error);
}

TEST_CASE("stratified folds on the augmented counts") {
  const auto docs = count_replay_corpus(kFd, added_counts());
  REQUIRE(docs.size() == 805);
  const FoldAssignment folds = stratified_kfold(docs, 5, 1);
  for (const auto& f : folds.folds) CHECK(f.size() == 161);
  check_stratified(docs, folds);

  const FoldAssignment again = stratified_kfold(docs, 5, 1);
  CHECK(again.fold_of == folds.fold_of);
  const FoldAssignment other = stratified_kfold(docs, 5, 2);
  CHECK(other.fold_of != folds.fold_of);
}

TEST_CASE("stratified folds: divisible class and tiny classes") {
  std::vector<Document> ten;
  for (int i = 0; i < 10; ++i) ten.push_back(testing::doc("d" + std::to_string(i), "x", Label::LF));
  const FoldAssignment f = stratified_kfold(ten, 5, 9);
  for (const auto& fold : f.folds) CHECK(fold.size() == 2);

  std::vector<Document> tiny;
  for (int i = 0; i < 3; ++i) tiny.push_back(testing::doc("m" + std::to_string(i), "x", Label::MRE));
  const FoldAssignment t = stratified_kfold(tiny, 5, 1);
  std::set<int> used;
  for (const auto& d : tiny) used.insert(t.fold_of.at(d.id));
  CHECK(used.size() == 3);

  CHECK_THROWS_AS(stratified_kfold(ten, 1, 1), Error);
}

TEST_CASE("stratification property on random label multisets") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Document> docs;
    const std::size_t n = 5 + rng() % 200;
    for (std::size_t i = 0; i < n; ++i) {
      docs.push_back(testing::doc("r" + std::to_string(i), "x", label_from_index(rng() % kNumClasses)));
    }
    const int k = 2 + static_cast<int>(rng() % 6);
    check_stratified(docs, stratified_kfold(docs, k, rng()));
  }
}
