#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "tgode/errors.hpp"
#include "tgode/preference.hpp"

using namespace tgode;

namespace {

InteractionSequence seq_of(int user, std::vector<std::pair<int, double>> items) {
  InteractionSequence s;
  s.user = user;
  for (auto& [item, t] : items) {
    Event e;
    e.item = item;
    e.norm_time = t;
    e.raw_time = static_cast<std::int64_t>(t * 1000);
    s.events.push_back(e);
  }
  return s;
}

struct Fixture {
  Dataset train;
  ModelParams model;
  GraphContext gc;

  explicit Fixture(std::vector<InteractionSequence> seqs, int vocab) {
    train.sequences = std::move(seqs);
    train.item_vocab_size = vocab;
    train.user_vocab_size = 0;
    for (const auto& s : train.sequences)
      train.user_vocab_size = std::max(train.user_vocab_size, s.user + 1);
    ModelConfig cfg;
    cfg.vocab = vocab;
    cfg.d = 8;
    cfg.d_z = 4;
    cfg.heads = 2;
    cfg.ode_layers = 1;
    cfg.ode_steps = 2;
    cfg.snapshot_grid = 8;
    Rng rng(31);
    model = ModelParams(cfg, rng);
    gc = build_graph_context(train, vocab, cfg.snapshot_grid);
  }
};

}  // namespace

TEST_CASE("pivot grid covers and uncovers per the mapping") {
  // pivots {0, 0.5, 1}; observed {0.1, 0.9} cover the ends
  PivotGrid g = build_pivot_grid(seq_of(0, {{0, 0.1}, {1, 0.9}}), 3);
  CHECK(g.pivots == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(g.covered == std::vector<double>{0.0, 1.0});
  CHECK(g.uncovered == std::vector<double>{0.5});
  CHECK(g.l_num == 2);  // max(1, floor(2/1))
}

TEST_CASE("equidistant observation maps to the smaller pivot") {
  // t=0.25 is equidistant from pivots 0 and 0.5
  PivotGrid g = build_pivot_grid(seq_of(0, {{0, 0.25}}), 3);
  CHECK(g.covered == std::vector<double>{0.0});
}

TEST_CASE("truncation factor arithmetic") {
  // m=10 pivots at j/9; 12 observations covering exactly 6 pivots leaves 4
  std::vector<std::pair<int, double>> items;
  for (int j = 0; j < 6; ++j) {
    items.push_back({j, j / 9.0});
    items.push_back({j, j / 9.0});
  }
  PivotGrid g = build_pivot_grid(seq_of(0, items), 10);
  CHECK(g.uncovered.size() == 4);
  CHECK(g.l_num == 3);  // floor(12/4)
}

TEST_CASE("single pivot sits at one half") {
  PivotGrid g = build_pivot_grid(seq_of(0, {{0, 0.5}}), 1);
  CHECK(g.pivots == std::vector<double>{0.5});
  CHECK(g.uncovered.empty());
  CHECK(g.l_num == 0);
}

TEST_CASE("partition is exact") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::pair<int, double>> items;
    int n = 1 + static_cast<int>(rng.uniform_int(0, 9));
    for (int i = 0; i < n; ++i) items.push_back({i % 4, rng.uniform()});
    std::sort(items.begin(), items.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    PivotGrid g = build_pivot_grid(seq_of(0, items), 8);
    CHECK(g.covered.size() + g.uncovered.size() == g.pivots.size());
    std::set<double> all(g.covered.begin(), g.covered.end());
    all.insert(g.uncovered.begin(), g.uncovered.end());
    CHECK(all.size() == g.pivots.size());
  }
}

TEST_CASE("history items are masked to -inf, rest finite") {
  Fixture fx({seq_of(0, {{0, 0.1}, {2, 0.9}})}, 5);
  PivotGrid grid = build_pivot_grid(fx.train.sequences[0], 3);
  REQUIRE(grid.uncovered == std::vector<double>{0.5});
  std::vector<double> scores =
      infer_user_scores(fx.train.sequences[0], 0.5, grid, fx.model, fx.gc, {});
  CHECK(std::isinf(scores[0]));
  CHECK(scores[0] < 0);
  CHECK(std::isinf(scores[2]));
  CHECK(std::isfinite(scores[1]));
  CHECK(std::isfinite(scores[3]));
  CHECK(std::isfinite(scores[4]));
}

TEST_CASE("inference is deterministic") {
  Fixture fx({seq_of(0, {{0, 0.1}, {2, 0.9}})}, 5);
  PivotGrid grid = build_pivot_grid(fx.train.sequences[0], 3);
  auto a = infer_user_scores(fx.train.sequences[0], 0.5, grid, fx.model, fx.gc, {});
  auto b = infer_user_scores(fx.train.sequences[0], 0.5, grid, fx.model, fx.gc, {});
  CHECK(a == b);
}

TEST_CASE("covered pivot rejected") {
  Fixture fx({seq_of(0, {{0, 0.1}, {2, 0.9}})}, 5);
  PivotGrid grid = build_pivot_grid(fx.train.sequences[0], 3);
  CHECK_THROWS_AS(infer_user_scores(fx.train.sequences[0], 0.0, grid, fx.model, fx.gc, {}),
                  ContractError);
}

TEST_CASE("zero-initialized decoder gives equal unmasked scores") {
  Fixture fx({seq_of(0, {{0, 0.1}, {2, 0.9}})}, 5);
  fx.model.generator.dec_w.value.fill(0.0);
  fx.model.generator.dec_b.value.fill(0.0);
  PivotGrid grid = build_pivot_grid(fx.train.sequences[0], 3);
  auto scores = infer_user_scores(fx.train.sequences[0], 0.5, grid, fx.model, fx.gc, {});
  CHECK(scores[1] == scores[3]);
  CHECK(scores[3] == scores[4]);
}

TEST_CASE("augmentation attaches the generated item on both sides") {
  // base [(a,0.1),(c,0.9)] with only item b unmasked: edges a->b @0.5, b->c @0.9
  Fixture fx({seq_of(0, {{0, 0.1}, {2, 0.9}})}, 3);
  PivotGrid grid = build_pivot_grid(fx.train.sequences[0], 3);
  AugmentedUserGraph aug =
      build_augmented_graph(fx.train.sequences[0], grid, fx.model, fx.gc, {});
  REQUIRE(aug.added.size() == 2);
  CHECK(aug.added[0].item == 1);
  CHECK(aug.added[0].edge.src == 0);
  CHECK(aug.added[0].edge.dst == 1);
  CHECK(aug.added[0].edge.time == doctest::Approx(0.5));
  CHECK(aug.added[1].edge.src == 1);
  CHECK(aug.added[1].edge.dst == 2);
  CHECK(aug.added[1].edge.time == doctest::Approx(0.9));
}

TEST_CASE("no uncovered pivots leaves the graph unchanged") {
  Fixture fx({seq_of(0, {{0, 0.0}, {1, 1.0}})}, 3);
  PivotGrid grid = build_pivot_grid(fx.train.sequences[0], 2);
  REQUIRE(grid.uncovered.empty());
  AugmentedUserGraph aug =
      build_augmented_graph(fx.train.sequences[0], grid, fx.model, fx.gc, {});
  CHECK(aug.added.empty());
  CHECK(aug.all_edges().size() == aug.base.edges.size());
}

TEST_CASE("superset, pivot timing and budget hold on randomized sequences") {
  Rng rng(91);
  const int vocab = 12;
  for (int trial = 0; trial < 25; ++trial) {
    int n = 2 + static_cast<int>(rng.uniform_int(0, 5));
    std::vector<std::pair<int, double>> items;
    for (int i = 0; i < n; ++i)
      items.push_back({static_cast<int>(rng.uniform_int(0, vocab - 1)), rng.uniform()});
    std::sort(items.begin(), items.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    Fixture fx({seq_of(0, items)}, vocab);
    PivotGrid grid = build_pivot_grid(fx.train.sequences[0], 6);
    AugmentedUserGraph aug =
        build_augmented_graph(fx.train.sequences[0], grid, fx.model, fx.gc, {});

    // superset: every base edge survives with at least its weight
    std::vector<TimedEdge> all = aug.all_edges();
    for (const auto& be : aug.base.edges) {
      bool found = false;
      for (const auto& e : all)
        if (e.src == be.src && e.dst == be.dst && e.weight >= be.weight) found = true;
      CHECK(found);
    }
    // per-pivot budget and pivot-aligned source timestamps
    std::map<double, int> per_pivot;
    for (const auto& a : aug.added) {
      bool on_uncovered = false;
      for (double p : grid.uncovered)
        if (a.pivot == p) on_uncovered = true;
      CHECK(on_uncovered);
      if (a.edge.dst == a.item) CHECK(a.edge.time == doctest::Approx(a.pivot));
    }
    for (const auto& a : aug.added)
      if (a.edge.dst == a.item) ++per_pivot[a.pivot];
    for (const auto& [pivot, count] : per_pivot) CHECK(count <= grid.l_num);
  }
}
