#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tgode {

enum class FileFormat { Csv, Tsv };

struct Event {
  int item = 0;
  std::int64_t raw_time = 0;
  double norm_time = 0.0;  // (t - time_min) / (time_max - time_min)
};

struct InteractionSequence {
  int user = 0;
  std::vector<Event> events;  // sorted non-decreasing by raw_time
};

struct Dataset {
  std::vector<InteractionSequence> sequences;
  int item_vocab_size = 0;
  int user_vocab_size = 0;
  std::int64_t time_min = 0;
  std::int64_t time_max = 0;

  // original string ids, indexed by dense index
  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;

  std::size_t interaction_count() const;
  const InteractionSequence* find_user(int user) const;
};

// A prediction target: the item interacted with at target_time, with the
// owning user's strict-prefix history as input.
struct PredictionTarget {
  int user = 0;
  int item = 0;
  std::int64_t raw_time = 0;
  double norm_time = 0.0;
};

struct SplitDataset {
  Dataset train;
  Dataset valid;
  Dataset test;
  std::vector<PredictionTarget> valid_targets;
  std::vector<PredictionTarget> test_targets;
  std::int64_t boundary_train_valid = 0;
  std::int64_t boundary_valid_test = 0;
  std::size_t skipped_targets = 0;  // targets with no history prefix
  // Full dataset (all interactions, shared vocabulary); prefixes for
  // valid/test targets are drawn from here.
  Dataset full;
};

// Parse a user,item,timestamp[,rating] file. Users and items are re-indexed
// densely in first-appearance order (file order); a header row is skipped when
// its timestamp column fails to parse.
Dataset load_interactions(const std::string& path, FileFormat format);

// Pool all interactions, sort chronologically (ties by (user, item)), cut at
// the 80th/90th percentile positions. Valid/test interactions become
// prediction targets.
SplitDataset chronological_split(const Dataset& d);

// The user's events strictly before t, in time order.
std::vector<Event> history_before(const Dataset& d, int user, std::int64_t raw_time);

}  // namespace tgode
