#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "erlb/report.hpp"
#include "erlb/strategy_basic.hpp"
#include "oracles.hpp"

using namespace erlb;

namespace {

const MatcherConfig kNull{MatcherKind::null, 0, 0.8};

}  // namespace

TEST_CASE("basic_map_emit routing") {
  std::vector<ShuffleRecord<Entity>> sink;
  Emitter<Entity> out(8, sink);

  SECTION("r = 1 sends everything to task 0") {
    std::vector<ShuffleRecord<Entity>> sink1;
    Emitter<Entity> out1(1, sink1);
    basic_map_emit({1, 0, "x", {}}, 1, out1);
    basic_map_emit({2, 0, "y", {}}, 1, out1);
    REQUIRE(sink1.size() == 2);
    CHECK(sink1[0].key.reduce_index == 0);
    CHECK(sink1[1].key.reduce_index == 0);
  }

  SECTION("same key, same reduce index and group") {
    basic_map_emit({1, 0, "shared", {}}, 8, out);
    basic_map_emit({2, 3, "shared", {}}, 8, out);
    REQUIRE(sink.size() == 2);
    CHECK(sink[0].key.reduce_index == sink[1].key.reduce_index);
    CHECK(sink[0].key.group == sink[1].key.group);
    CHECK(sink[0].key.group == "shared");
    CHECK(sink[0].key.order < sink[1].key.order);  // (partition, id) ascends
  }
}

TEST_CASE("basic_reduce compares the whole group") {
  auto group_of = [](std::size_t n) {
    std::vector<ShuffleRecord<Entity>> records;
    for (std::size_t i = 0; i < n; ++i) {
      records.push_back({{0, "k", wire::of_u32(static_cast<std::uint32_t>(i))},
                         Entity{i, 0, "k", {}}});
    }
    return records;
  };

  for (const auto& [n, expected] : std::vector<std::pair<std::size_t, std::uint64_t>>{
           {1, 0}, {4, 6}}) {
    const auto records = group_of(n);
    ReduceGroup<Entity> group{0, "k", records};
    std::vector<MatchDecision> decisions;
    const ReduceEmitter<MatchDecision>::CostFn unit = [](const MatchDecision&) { return 1.0; };
    ReduceEmitter<MatchDecision> out(&decisions, unit);
    basic_reduce(group, kNull, out);
    CHECK(out.count() == expected);
    CHECK(decisions.size() == expected);
  }
}

TEST_CASE("basic run covers exactly the within-block pairs, replication 1.0") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 25; ++trial) {
    const std::uint32_t m = 1 + static_cast<std::uint32_t>(rng() % 4);
    const std::uint32_t r = 1 + static_cast<std::uint32_t>(rng() % 8);
    const Dataset d = testutil::random_dataset(rng, 400, 30, m);
    std::uint64_t n = 0;
    for (const auto& part : d) n += part.size();

    const auto job = run_basic(d, {m, r, 2}, kNull);
    bool duplicates = true;
    CHECK(testutil::collect_pairs(job, &duplicates) == testutil::brute_force_pairs(d));
    CHECK_FALSE(duplicates);

    std::uint64_t shuffled = 0;
    for (const auto& metrics : job.metrics) shuffled += metrics.records_received;
    CHECK(shuffled == n);  // each entity emitted exactly once
  }
}

TEST_CASE("basic measured loads equal the analytical hash loads") {
  std::mt19937_64 rng(42);
  const Dataset d = testutil::random_dataset(rng, 600, 25, 3);
  const JobConfig cfg{3, 5, 2};
  const auto bdm = compute_bdm(d, cfg);
  const auto job = run_basic(d, cfg, kNull);
  const auto loads = analytical_loads(StrategyKind::basic, bdm, cfg.r);
  for (std::uint32_t k = 0; k < cfg.r; ++k) {
    CHECK(job.metrics[k].comparisons_done == loads[k]);
  }
}

TEST_CASE("a 90% block keeps >= 81% of comparisons on one task") {
  // 900 entities share one key; 100 spread over ten small keys.
  Dataset d(2);
  for (EntityId i = 0; i < 1000; ++i) {
    Entity e{i, static_cast<std::uint32_t>(i % 2), i < 900 ? "big" : "t" + std::to_string(i % 10), {}};
    d[e.partition].push_back(std::move(e));
  }
  const auto job = run_basic(d, {2, 8, 2}, kNull);

  std::uint64_t total = 0;
  for (const auto& metrics : job.metrics) total += metrics.comparisons_done;
  const auto owner = job.metrics[hash_partition("big", 8)].comparisons_done;
  CHECK(static_cast<double>(owner) >= 0.81 * static_cast<double>(total));
}
