#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tgode/evaluation.hpp"
#include "tgode/rng.hpp"

using namespace tgode;

namespace {

InteractionSequence seq_times(int user, std::vector<std::pair<int, std::int64_t>> items) {
  InteractionSequence s;
  s.user = user;
  for (auto& [item, t] : items) {
    Event e;
    e.item = item;
    e.raw_time = t;
    s.events.push_back(e);
  }
  return s;
}

}  // namespace

TEST_CASE("truth at rank one maxes every metric") {
  RankedTarget t{{3, 1, 2, 0, 4}, 3};
  MetricsReport r = rank_metrics({t}, {5});
  CHECK(r.recall[5] == doctest::Approx(1.0));
  CHECK(r.ndcg[5] == doctest::Approx(1.0));
  CHECK(r.mrr[5] == doctest::Approx(1.0));
}

TEST_CASE("truth at rank three") {
  RankedTarget t{{0, 1, 7, 2, 3}, 7};
  MetricsReport r = rank_metrics({t}, {5});
  CHECK(r.ndcg[5] == doctest::Approx(0.5));  // 1/log2(4)
  CHECK(r.mrr[5] == doctest::Approx(1.0 / 3.0));
  CHECK(r.recall[5] == doctest::Approx(1.0));
}

TEST_CASE("empty rankings are skipped and counted") {
  std::vector<RankedTarget> ts = {{{0, 1}, 1}, {{}, 0}};
  MetricsReport r = rank_metrics(ts, {5});
  CHECK(r.target_count == 1);
  CHECK(r.skipped_count == 1);
  CHECK(r.recall[5] == doctest::Approx(1.0));
}

TEST_CASE("metrics match a brute-force oracle on random targets") {
  Rng rng(61);
  const int vocab = 25;
  std::vector<int> ks = {5, 10, 20};
  std::vector<RankedTarget> targets;
  for (int i = 0; i < 100; ++i) {
    std::vector<int> ranking(vocab);
    std::iota(ranking.begin(), ranking.end(), 0);
    for (std::size_t j = ranking.size(); j > 1; --j)
      std::swap(ranking[j - 1], ranking[rng.uniform_int(0, static_cast<std::int64_t>(j) - 1)]);
    targets.push_back({ranking, static_cast<int>(rng.uniform_int(0, vocab - 1))});
  }
  MetricsReport r = rank_metrics(targets, ks);

  for (int k : ks) {
    double recall = 0, ndcg = 0, mrr = 0;
    for (const auto& t : targets) {
      int rank = 1 + static_cast<int>(std::find(t.ranking.begin(), t.ranking.end(), t.truth) -
                                      t.ranking.begin());
      if (rank <= k) {
        recall += 1.0;
        ndcg += 1.0 / std::log2(rank + 1.0);
        mrr += 1.0 / rank;
      }
    }
    CHECK(r.recall[k] == recall / 100.0);
    CHECK(r.ndcg[k] == ndcg / 100.0);
    CHECK(r.mrr[k] == mrr / 100.0);
  }
  CHECK(r.recall[5] <= r.recall[10]);
  CHECK(r.recall[10] <= r.recall[20]);
  for (int k : ks) {
    CHECK(r.mrr[k] <= r.ndcg[k] + 1e-12);
    CHECK(r.ndcg[k] <= r.recall[k] + 1e-12);
  }
}

TEST_CASE("interval histogram buckets day gaps") {
  Dataset d;
  d.item_vocab_size = 1;
  d.sequences = {seq_times(0, {{0, 0}, {0, 0}, {0, 400ll * 86400}})};
  AnalysisReport r = interval_histogram(d, {0, 350});
  CHECK(r.gap_count == 2);
  REQUIRE(r.interval_buckets.size() == 3);
  CHECK(r.interval_buckets[0].label == "<=0");
  CHECK(r.interval_buckets[0].proportion == doctest::Approx(0.5));
  CHECK(r.interval_buckets[1].proportion == doctest::Approx(0.0));
  CHECK(r.interval_buckets[2].label == ">350");
  CHECK(r.interval_buckets[2].proportion == doctest::Approx(0.5));
}

TEST_CASE("singleton users contribute no gaps") {
  Dataset d;
  d.item_vocab_size = 2;
  d.sequences = {seq_times(0, {{0, 5}}), seq_times(1, {{1, 9}})};
  AnalysisReport r = interval_histogram(d, {350});
  CHECK(r.gap_count == 0);
}

TEST_CASE("interval proportions sum to one when gaps exist") {
  Dataset d;
  d.item_vocab_size = 1;
  std::vector<std::pair<int, std::int64_t>> items;
  for (int i = 0; i < 9; ++i) items.push_back({0, static_cast<std::int64_t>(i) * i * 86400});
  d.sequences = {seq_times(0, items)};
  AnalysisReport r = interval_histogram(d, {0, 5, 20});
  double s = 0.0;
  for (const auto& b : r.interval_buckets) s += b.proportion;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("single-slice item lands in bucket one") {
  Dataset d;
  d.item_vocab_size = 1;
  d.time_min = 0;
  d.sequences = {seq_times(0, {{0, 0}, {0, 86400}, {0, 2 * 86400}})};
  AnalysisReport r = emergence_ratios(d, 250);
  CHECK(r.emergence_buckets[4].label == "1");
  CHECK(r.emergence_buckets[4].proportion == doctest::Approx(1.0));
}

TEST_CASE("even two-slice split goes to the upper bucket") {
  Dataset d;
  d.item_vocab_size = 1;
  d.time_min = 0;
  std::int64_t later = 300ll * 86400;  // second slice of 250 days
  d.sequences = {seq_times(0, {{0, 0}, {0, later}})};
  AnalysisReport r = emergence_ratios(d, 250);
  CHECK(r.emergence_buckets[2].label == "0.5-0.75");
  CHECK(r.emergence_buckets[2].proportion == doctest::Approx(1.0));
}

TEST_CASE("emergence proportions sum to one over items") {
  Dataset d;
  d.item_vocab_size = 3;
  d.time_min = 0;
  d.sequences = {seq_times(0, {{0, 0}, {1, 100ll * 86400}, {2, 600ll * 86400}}),
                 seq_times(1, {{1, 300ll * 86400}, {2, 20}})};
  AnalysisReport r = emergence_ratios(d, 250);
  double s = 0.0;
  for (const auto& b : r.emergence_buckets) s += b.proportion;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.item_count == 3);
}

TEST_CASE("report serialization carries both analyses") {
  Dataset d;
  d.item_vocab_size = 1;
  d.time_min = 0;
  d.sequences = {seq_times(0, {{0, 0}, {0, 86400}})};
  AnalysisReport a = interval_histogram(d, {350});
  AnalysisReport b = emergence_ratios(d);
  CHECK(a.to_json().find("\"intervals\"") != std::string::npos);
  CHECK(b.to_json().find("\"emergence\"") != std::string::npos);
  CHECK(a.intervals_csv().rfind("bucket,proportion", 0) == 0);
  CHECK(b.emergence_csv().find("0.75-1") != std::string::npos);
}
