#include "tgode/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tgode/errors.hpp"

namespace tgode {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

}  // namespace

MetricsReport rank_metrics(const std::vector<RankedTarget>& targets, const std::vector<int>& ks) {
  MetricsReport rep;
  for (int k : ks) {
    rep.recall[k] = 0.0;
    rep.ndcg[k] = 0.0;
    rep.mrr[k] = 0.0;
  }
  for (const auto& t : targets) {
    if (t.ranking.empty()) {
      ++rep.skipped_count;
      continue;
    }
    ++rep.target_count;
    int rank = 0;  // 1-based; 0 = not found
    for (std::size_t i = 0; i < t.ranking.size(); ++i)
      if (t.ranking[i] == t.truth) {
        rank = static_cast<int>(i) + 1;
        break;
      }
    for (int k : ks) {
      if (rank >= 1 && rank <= k) {
        rep.recall[k] += 1.0;
        rep.ndcg[k] += 1.0 / std::log2(static_cast<double>(rank) + 1.0);
        rep.mrr[k] += 1.0 / static_cast<double>(rank);
      }
    }
  }
  if (rep.target_count > 0) {
    for (int k : ks) {
      rep.recall[k] /= static_cast<double>(rep.target_count);
      rep.ndcg[k] /= static_cast<double>(rep.target_count);
      rep.mrr[k] /= static_cast<double>(rep.target_count);
    }
  }
  return rep;
}

std::string MetricsReport::to_json() const {
  std::ostringstream os;
  os << "{";
  auto emit = [&os](const char* name, const std::map<int, double>& m) {
    os << "\"" << name << "\":{";
    bool first = true;
    for (const auto& [k, v] : m) {
      if (!first) os << ",";
      first = false;
      os << "\"" << k << "\":" << fmt(v);
    }
    os << "}";
  };
  emit("recall", recall);
  os << ",";
  emit("ndcg", ndcg);
  os << ",";
  emit("mrr", mrr);
  os << ",\"targets\":" << target_count << ",\"skipped\":" << skipped_count << "}";
  return os.str();
}

AnalysisReport interval_histogram(const Dataset& d, const std::vector<long>& bucket_edges_days) {
  if (d.sequences.empty()) throw ContractError("interval_histogram: empty dataset");
  std::vector<long> gaps;
  for (const auto& s : d.sequences)
    for (std::size_t i = 0; i + 1 < s.events.size(); ++i)
      gaps.push_back((s.events[i + 1].raw_time - s.events[i].raw_time) / 86400);

  AnalysisReport rep;
  rep.gap_count = gaps.size();
  std::vector<std::size_t> counts(bucket_edges_days.size() + 1, 0);
  for (long g : gaps) {
    std::size_t b = bucket_edges_days.size();
    for (std::size_t i = 0; i < bucket_edges_days.size(); ++i)
      if (g <= bucket_edges_days[i]) {
        b = i;
        break;
      }
    ++counts[b];
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    HistogramBucket hb;
    if (i == 0)
      hb.label = "<=" + std::to_string(bucket_edges_days[0]);
    else if (i < bucket_edges_days.size())
      hb.label = std::to_string(bucket_edges_days[i - 1] + 1) + "-" + std::to_string(bucket_edges_days[i]);
    else
      hb.label = ">" + std::to_string(bucket_edges_days.back());
    hb.proportion = gaps.empty() ? 0.0 : static_cast<double>(counts[i]) / gaps.size();
    rep.interval_buckets.push_back(hb);
  }
  return rep;
}

AnalysisReport emergence_ratios(const Dataset& d, int slice_days) {
  if (d.sequences.empty()) throw ContractError("emergence_ratios: empty dataset");
  const std::int64_t slice_len = static_cast<std::int64_t>(slice_days) * 86400;
  // per item: interactions per slice
  std::vector<std::map<std::int64_t, std::size_t>> per_slice(d.item_vocab_size);
  std::vector<std::size_t> totals(d.item_vocab_size, 0);
  for (const auto& s : d.sequences)
    for (const auto& e : s.events) {
      std::int64_t slice = (e.raw_time - d.time_min) / slice_len;
      ++per_slice[e.item][slice];
      ++totals[e.item];
    }

  // buckets: 0, (0,0.5), [0.5,0.75), [0.75,1), 1 — boundaries go up
  std::vector<std::string> labels = {"0", "0-0.5", "0.5-0.75", "0.75-1", "1"};
  std::vector<std::size_t> counts(5, 0);
  std::size_t items = 0;
  for (int i = 0; i < d.item_vocab_size; ++i) {
    if (totals[i] == 0) continue;
    ++items;
    std::size_t best = 0;
    for (const auto& [slice, c] : per_slice[i]) best = std::max(best, c);
    double ratio = static_cast<double>(best) / static_cast<double>(totals[i]);
    std::size_t b;
    if (ratio <= 0.0)
      b = 0;
    else if (ratio >= 1.0)
      b = 4;
    else if (ratio < 0.5)
      b = 1;
    else if (ratio < 0.75)
      b = 2;
    else
      b = 3;
    ++counts[b];
  }

  AnalysisReport rep;
  rep.slice_days = slice_days;
  rep.item_count = items;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    HistogramBucket hb;
    hb.label = labels[i];
    hb.proportion = items == 0 ? 0.0 : static_cast<double>(counts[i]) / items;
    rep.emergence_buckets.push_back(hb);
  }
  return rep;
}

namespace {

void emit_buckets(std::ostringstream& os, const std::vector<HistogramBucket>& buckets) {
  os << "{";
  bool first = true;
  for (const auto& b : buckets) {
    if (!first) os << ",";
    first = false;
    os << "\"" << b.label << "\":" << fmt(b.proportion);
  }
  os << "}";
}

std::string buckets_csv(const std::vector<HistogramBucket>& buckets) {
  std::ostringstream os;
  os << "bucket,proportion\n";
  for (const auto& b : buckets) os << b.label << "," << fmt(b.proportion) << "\n";
  return os.str();
}

}  // namespace

std::string AnalysisReport::to_json() const {
  std::ostringstream os;
  os << "{\"intervals\":";
  emit_buckets(os, interval_buckets);
  os << ",\"gap_count\":" << gap_count << ",\"emergence\":";
  emit_buckets(os, emergence_buckets);
  os << ",\"item_count\":" << item_count << ",\"slice_days\":" << slice_days << "}";
  return os.str();
}

std::string AnalysisReport::intervals_csv() const { return buckets_csv(interval_buckets); }
std::string AnalysisReport::emergence_csv() const { return buckets_csv(emergence_buckets); }

}  // namespace tgode
