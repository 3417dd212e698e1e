#include <doctest.h>

#include <numeric>

#include <json.hpp>

#include "clickbait/analytics.hpp"
#include "clickbait/error.hpp"
#include "test_support.hpp"

using namespace clickbait;
using clickbait::testing::record;

namespace {

std::size_t sum(const std::vector<std::size_t>& v) { return std::accumulate(v.begin(), v.end(), std::size_t{0}); }

}  // namespace

TEST_CASE("class counts add up") {
  auto ds = testing::random_dataset(300, 1);
  auto c = class_counts(ds);
  CHECK(c.total == 300);
  CHECK(c.clickbait + c.no_clickbait == c.total);
  std::size_t cb = 0;
  for (const auto& r : ds.records) cb += r.truth.class_label == ClassLabel::Clickbait;
  CHECK(c.clickbait == cb);
}

TEST_CASE("median levels") {
  CHECK(median_level_index(0.0) == 0);
  CHECK(median_level_index(0.33333) == 1);
  CHECK(median_level_index(2.0 / 3.0) == 2);
  CHECK(median_level_index(1.0) == 3);
  CHECK_THROWS_AS(median_level_index(0.5), DataError);
}

TEST_CASE("median-label table marginals match class counts") {
  auto ds = testing::random_dataset(400, 2);
  auto t = median_label_table(ds);
  auto c = class_counts(ds);
  std::size_t cb = 0, ncb = 0;
  for (std::size_t l = 0; l < 4; ++l) {
    cb += t.at(l, ClassLabel::Clickbait);
    ncb += t.at(l, ClassLabel::NoClickbait);
  }
  CHECK(cb == c.clickbait);
  CHECK(ncb == c.no_clickbait);
  // With consistent labels the lower levels are never clickbait.
  CHECK(t.at(0, ClassLabel::Clickbait) == 0);
  CHECK(t.at(1, ClassLabel::Clickbait) == 0);
  CHECK(t.at(2, ClassLabel::NoClickbait) == 0);
  CHECK(t.at(3, ClassLabel::NoClickbait) == 0);
}

TEST_CASE("median-label table keeps contradicting records") {
  LabeledDataset ds;
  auto r = record("a", "x", {1, 1, 1, 1, 1});
  r.truth.class_label = ClassLabel::NoClickbait;
  ds.records.push_back(r);
  CHECK(median_label_table(ds).at(3, ClassLabel::NoClickbait) == 1);
}

TEST_CASE("Tukey box statistics") {
  auto b = tukey_box({5, 1, 3, 2, 4});
  CHECK(b.min == 1);
  CHECK(b.q1 == 2);
  CHECK(b.median == 3);
  CHECK(b.q3 == 4);
  CHECK(b.max == 5);

  auto even = tukey_box({1, 2, 3, 4});
  CHECK(even.q1 == 1.5);
  CHECK(even.median == 2.5);
  CHECK(even.q3 == 3.5);

  auto one = tukey_box({0.4});
  CHECK(one.min == 0.4);
  CHECK(one.q1 == 0.4);
  CHECK(one.median == 0.4);
  CHECK(one.q3 == 0.4);
  CHECK(one.max == 0.4);

  CHECK_THROWS_AS(tukey_box({}), UsageError);
}

TEST_CASE("score box statistics are ordered per class") {
  auto ds = testing::random_dataset(250, 3);
  auto s = score_box_stats(ds);
  for (const auto& b : {s.clickbait, s.no_clickbait}) {
    CHECK(b.min <= b.q1);
    CHECK(b.q1 <= b.median);
    CHECK(b.median <= b.q3);
    CHECK(b.q3 <= b.max);
  }
  CHECK(s.clickbait.min >= 0.4 - 1e-9);
  CHECK(s.no_clickbait.max <= 0.6 + 1e-9);

  LabeledDataset one_class;
  one_class.records.push_back(record("a", "x", {0, 0, 0, 0, 0}));
  CHECK_THROWS_AS(score_box_stats(one_class), DataError);
}

TEST_CASE("score histogram bins every record") {
  auto ds = testing::random_dataset(500, 4);
  auto h = score_histogram(ds, 20);
  REQUIRE(h.bins() == 20);
  CHECK(h.edges.front() == 0.0);
  CHECK(h.edges.back() == 1.0);
  auto c = class_counts(ds);
  CHECK(sum(h.counts[static_cast<std::size_t>(ClassLabel::Clickbait)]) == c.clickbait);
  CHECK(sum(h.counts[static_cast<std::size_t>(ClassLabel::NoClickbait)]) == c.no_clickbait);
  for (const auto& pct : h.percentages) {
    CHECK(std::accumulate(pct.begin(), pct.end(), 0.0) == doctest::Approx(100.0));
  }

  LabeledDataset top;
  top.records.push_back(record("a", "x", {1, 1, 1, 1, 1}));
  top.records.push_back(record("b", "y", {0, 0, 0, 0, 0}));
  auto edge = score_histogram(top, 4);
  CHECK(edge.counts[static_cast<std::size_t>(ClassLabel::Clickbait)][3] == 1);
  CHECK(edge.counts[static_cast<std::size_t>(ClassLabel::NoClickbait)][0] == 1);
  CHECK_THROWS_AS(score_histogram(top, 1), UsageError);
}

TEST_CASE("character length counts code points") {
  CHECK(character_length("") == 0);
  CHECK(character_length("abc") == 3);
  CHECK(character_length("Café") == 4);
  CHECK(character_length("\xF0\x9F\x98\xB1!") == 2);
}

TEST_CASE("length distribution") {
  LabeledDataset ds;
  ds.records.push_back(record("a", "", {0, 0, 0, 0, 0}));
  ds.records.push_back(record("b", "123456789", {0, 0, 0, 0, 0}));
  ds.records.push_back(record("c", "1234567890", {1, 1, 1, 1, 1}));
  ds.records.push_back(record("d", std::string(25, 'x'), {1, 1, 1, 1, 1}));
  auto h = length_distribution(ds, 10);
  REQUIRE(h.bins() == 3);
  CHECK(h.edges == std::vector<double>{0, 10, 20, 30});
  const auto cb = static_cast<std::size_t>(ClassLabel::Clickbait);
  const auto ncb = static_cast<std::size_t>(ClassLabel::NoClickbait);
  CHECK(h.counts[ncb] == std::vector<std::size_t>{2, 0, 0});
  CHECK(h.counts[cb] == std::vector<std::size_t>{0, 1, 1});
  CHECK(h.percentages[cb] == std::vector<double>{0, 50, 50});

  auto big = testing::random_dataset(300, 5);
  auto hb = length_distribution(big, 7);
  for (const auto& pct : hb.percentages) {
    CHECK(std::accumulate(pct.begin(), pct.end(), 0.0) == doctest::Approx(100.0));
  }
  CHECK_THROWS_AS(length_distribution(big, 0), UsageError);
}

TEST_CASE("write_analysis output files") {
  auto ds = testing::random_dataset(200, 6, 150);
  ds.records.push_back(record("q1", "Say \"hi\", then", {0, 0, 0, 0, 0}));
  ds.records.push_back(record("q2", "Say \"hi\", then", {1, 1, 1, 1, 1}));
  auto dir = testing::temp_dir("analysis");
  write_analysis(ds, dir);

  auto fig1 = testing::read_file(dir / "fig1_median_label.csv");
  CHECK(fig1.rfind("median,clickbait,no_clickbait\n0,0,", 0) == 0);
  auto fig3 = testing::read_file(dir / "fig3_score_hist.csv");
  CHECK(std::count(fig3.begin(), fig3.end(), '\n') == 21);
  auto dups = testing::read_file(dir / "duplicates.csv");
  CHECK(dups.find("\"Say \"\"hi\"\", then\",2,1,1\n") != std::string::npos);

  auto counts = nlohmann::json::parse(testing::read_file(dir / "counts.json"));
  CHECK(counts["total"] == 202);
  CHECK(counts["label_violations"] == 0);
  CHECK(counts["duplicate_post_texts"].get<std::size_t>() == find_duplicate_posts(ds).size());

  auto again = testing::temp_dir("analysis_again");
  write_analysis(ds, again);
  for (const char* name : {"fig1_median_label.csv", "fig2_box.csv", "fig3_score_hist.csv", "fig4_length_hist.csv",
                           "duplicates.csv", "counts.json"}) {
    CHECK_MESSAGE(testing::read_file(dir / name) == testing::read_file(again / name), name);
  }
}

TEST_CASE("empty and single-record datasets") {
  LabeledDataset empty;
  auto c = class_counts(empty);
  CHECK(c.total == 0);
  CHECK(c.clickbait == 0);
  CHECK(c.no_clickbait == 0);

  LabeledDataset one;
  one.records.push_back(record("a", "x", {1, 1, 1, 1, 1}));
  auto t = median_label_table(one);
  std::size_t total = 0;
  for (const auto& row : t.counts) total += row[0] + row[1];
  CHECK(total == 1);
  CHECK(t.at(3, ClassLabel::Clickbait) == 1);
}
