#pragma once

#include <map>
#include <string>
#include <vector>

#include "tgode/dataset.hpp"

namespace tgode {

struct MetricsReport {
  std::map<int, double> recall;  // k -> value
  std::map<int, double> ndcg;
  std::map<int, double> mrr;
  std::size_t target_count = 0;
  std::size_t skipped_count = 0;

  std::string to_json() const;
};

// One evaluated target: a full descending ranking (item indices) and the
// single ground-truth item.
struct RankedTarget {
  std::vector<int> ranking;
  int truth = 0;
};

// recall@k: truth in top-k. ndcg@k: 1/log2(rank+1) within k. mrr@k: 1/rank
// within k. Ranks are 1-based. Targets with an empty ranking are skipped.
MetricsReport rank_metrics(const std::vector<RankedTarget>& targets, const std::vector<int>& ks);

struct HistogramBucket {
  std::string label;
  double proportion = 0.0;
};

struct AnalysisReport {
  std::vector<HistogramBucket> interval_buckets;
  std::size_t gap_count = 0;
  std::vector<HistogramBucket> emergence_buckets;
  std::size_t item_count = 0;
  int slice_days = 250;

  std::string to_json() const;
  std::string intervals_csv() const;
  std::string emergence_csv() const;
};

// Per-user consecutive gaps in whole days, pooled and bucketed by the given
// edges: [0], [1, e1], (e1, e2], ..., (e_last, inf).
AnalysisReport interval_histogram(const Dataset& d, const std::vector<long>& bucket_edges_days);

// Per item, the max fraction of its interactions within any fixed-length
// slice; bucketed into {0, (0,0.5], (0.5,0.75], (0.75,1), 1}.
AnalysisReport emergence_ratios(const Dataset& d, int slice_days = 250);

}  // namespace tgode
