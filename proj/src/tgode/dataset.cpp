#include "tgode/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "tgode/errors.hpp"

namespace tgode {

std::size_t Dataset::interaction_count() const {
  std::size_t n = 0;
  for (const auto& s : sequences) n += s.events.size();
  return n;
}

const InteractionSequence* Dataset::find_user(int user) const {
  // full datasets hold one sequence per user in index order
  if (sequences.size() == static_cast<std::size_t>(user_vocab_size)) {
    const InteractionSequence& s = sequences[user];
    return s.user == user ? &s : nullptr;
  }
  auto it = std::lower_bound(sequences.begin(), sequences.end(), user,
                             [](const InteractionSequence& s, int u) { return s.user < u; });
  if (it != sequences.end() && it->user == user) return &*it;
  return nullptr;
}

namespace {

struct RawRow {
  std::string user;
  std::string item;
  std::int64_t time;
};

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

bool parse_int64(const std::string& s, std::int64_t& out) {
  std::string t = s;
  // tolerate float-formatted timestamps ("123.0")
  auto dot = t.find('.');
  if (dot != std::string::npos) t = t.substr(0, dot);
  if (t.empty()) return false;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return ec == std::errc() && p == t.data() + t.size();
}

}  // namespace

Dataset load_interactions(const std::string& path, FileFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  char sep = format == FileFormat::Csv ? ',' : '\t';

  std::vector<RawRow> rows;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = split_fields(line, sep);
    if (fields.size() < 3)
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected at least 3 columns", lineno);
    std::int64_t t;
    if (!parse_int64(fields[2], t)) {
      if (lineno == 1) continue;  // header row
      throw ParseError(path + ":" + std::to_string(lineno) + ": bad timestamp '" + fields[2] + "'", lineno);
    }
    if (t < 0)
      throw ParseError(path + ":" + std::to_string(lineno) + ": negative timestamp", lineno);
    rows.push_back({fields[0], fields[1], t});
  }
  if (rows.empty()) throw ParseError(path + ": no interactions found", lineno);

  Dataset d;
  std::map<std::string, int> user_index, item_index;
  std::vector<std::vector<Event>> per_user;
  for (const auto& r : rows) {
    auto [uit, unew] = user_index.try_emplace(r.user, static_cast<int>(user_index.size()));
    if (unew) {
      d.user_ids.push_back(r.user);
      per_user.emplace_back();
    }
    auto [iit, inew] = item_index.try_emplace(r.item, static_cast<int>(item_index.size()));
    if (inew) d.item_ids.push_back(r.item);
    per_user[uit->second].push_back({iit->second, r.time, 0.0});
  }
  d.user_vocab_size = static_cast<int>(user_index.size());
  d.item_vocab_size = static_cast<int>(item_index.size());

  d.time_min = rows[0].time;
  d.time_max = rows[0].time;
  for (const auto& r : rows) {
    d.time_min = std::min(d.time_min, r.time);
    d.time_max = std::max(d.time_max, r.time);
  }
  double range = static_cast<double>(d.time_max - d.time_min);

  for (int u = 0; u < d.user_vocab_size; ++u) {
    InteractionSequence s;
    s.user = u;
    s.events = std::move(per_user[u]);
    std::stable_sort(s.events.begin(), s.events.end(),
                     [](const Event& a, const Event& b) { return a.raw_time < b.raw_time; });
    for (auto& e : s.events)
      e.norm_time = range > 0.0 ? static_cast<double>(e.raw_time - d.time_min) / range : 0.0;
    d.sequences.push_back(std::move(s));
  }
  return d;
}

std::vector<Event> history_before(const Dataset& d, int user, std::int64_t raw_time) {
  std::vector<Event> out;
  const InteractionSequence* s = d.find_user(user);
  if (!s) return out;
  for (const auto& e : s->events)
    if (e.raw_time < raw_time) out.push_back(e);
  return out;
}

SplitDataset chronological_split(const Dataset& d) {
  std::size_t total = d.interaction_count();
  if (total < 10) throw ContractError("chronological_split: need at least 10 interactions");

  struct Pooled {
    std::int64_t time;
    int user;
    int item;
    double norm_time;
  };
  std::vector<Pooled> pool;
  pool.reserve(total);
  for (const auto& s : d.sequences)
    for (const auto& e : s.events) pool.push_back({e.raw_time, s.user, e.item, e.norm_time});
  std::stable_sort(pool.begin(), pool.end(), [](const Pooled& a, const Pooled& b) {
    return std::tie(a.time, a.user, a.item) < std::tie(b.time, b.user, b.item);
  });

  std::size_t cut1 = total * 8 / 10;  // floor(0.8 * total)
  std::size_t cut2 = total * 9 / 10;

  auto make_subset = [&](std::size_t lo, std::size_t hi) {
    Dataset sub;
    sub.item_vocab_size = d.item_vocab_size;
    sub.user_vocab_size = d.user_vocab_size;
    sub.time_min = d.time_min;
    sub.time_max = d.time_max;
    sub.user_ids = d.user_ids;
    sub.item_ids = d.item_ids;
    std::vector<std::vector<Event>> per_user(d.user_vocab_size);
    for (std::size_t i = lo; i < hi; ++i)
      per_user[pool[i].user].push_back({pool[i].item, pool[i].time, pool[i].norm_time});
    for (int u = 0; u < d.user_vocab_size; ++u) {
      if (per_user[u].empty()) continue;
      InteractionSequence s;
      s.user = u;
      s.events = std::move(per_user[u]);
      sub.sequences.push_back(std::move(s));
    }
    return sub;
  };

  SplitDataset out;
  out.full = d;
  out.train = make_subset(0, cut1);
  out.valid = make_subset(cut1, cut2);
  out.test = make_subset(cut2, total);
  out.boundary_train_valid = pool[cut1 - 1].time;
  out.boundary_valid_test = pool[cut2 - 1].time;

  auto make_targets = [&](std::size_t lo, std::size_t hi, std::vector<PredictionTarget>& dst) {
    for (std::size_t i = lo; i < hi; ++i) {
      if (history_before(d, pool[i].user, pool[i].time).empty()) {
        ++out.skipped_targets;
        continue;
      }
      dst.push_back({pool[i].user, pool[i].item, pool[i].time, pool[i].norm_time});
    }
  };
  make_targets(cut1, cut2, out.valid_targets);
  make_targets(cut2, total, out.test_targets);
  return out;
}

}  // namespace tgode
