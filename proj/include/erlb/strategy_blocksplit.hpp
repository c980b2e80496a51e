#pragma once

/// @file strategy_blocksplit.hpp
/// BlockSplit: any block whose pair count exceeds the average reduce
/// workload P/r is split into one sub-block per input partition. A split
/// block yields a Single match task per non-empty sub-block (pairs within
/// it) and a Cross match task per pair of non-empty sub-blocks (the
/// Cartesian product between them); an unsplit block yields one Single task
/// covering the whole block. Tasks are then assigned to reduce tasks by the
/// longest-processing-time greedy rule.
///
/// Because sub-blocks follow the input partitions, the resulting plan
/// depends on how the input happens to be partitioned; that dependence is
/// the known limitation PairRange removes.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "erlb/bdm.hpp"
#include "erlb/core.hpp"
#include "erlb/engine.hpp"
#include "erlb/errors.hpp"
#include "erlb/matching.hpp"

namespace erlb {

enum class MatchTaskKind { single, cross };

/// A unit of reduce-side work. Single(i) compares within sub-block i;
/// Cross(i,j) compares sub-block i against sub-block j. sub_i == -1 marks a
/// Single task covering a whole unsplit block. Zero-pair tasks are never
/// emitted.
struct MatchTask {
  std::uint32_t block_index = 0;
  MatchTaskKind kind = MatchTaskKind::single;
  std::int32_t sub_i = -1;
  std::int32_t sub_j = -1;
  std::uint64_t pair_count = 0;
  std::uint32_t assigned_reduce = 0;

  friend bool operator==(const MatchTask&, const MatchTask&) = default;
};

struct MatchTaskPlan {
  std::vector<MatchTask> tasks;                 ///< in LPT assignment order
  std::vector<std::uint64_t> per_reduce_load;   ///< pair-count sums, r entries
  std::vector<std::uint32_t> split_blocks;      ///< ascending block indices

  friend bool operator==(const MatchTaskPlan&, const MatchTaskPlan&) = default;
};

namespace detail {

/// Split predicate: pair_count > P/r, evaluated exactly in integers.
inline bool exceeds_average(std::uint64_t pair_count, std::uint64_t total_pairs, std::uint32_t r) {
  return static_cast<unsigned __int128>(pair_count) * r > total_pairs;
}

}  // namespace detail

/// Builds the match-task plan for a BDM. Pure function of (bdm, m, r).
inline MatchTaskPlan blocksplit_plan(const BlockDistributionMatrix& bdm, std::uint32_t m,
                                     std::uint32_t r) {
  if (r == 0) throw InvariantError("blocksplit_plan: r must be >= 1");
  if (m != bdm.m) {
    throw InvariantError("blocksplit_plan: m = " + std::to_string(m) +
                         " does not match bdm.m = " + std::to_string(bdm.m));
  }

  MatchTaskPlan plan;
  for (std::uint32_t b = 0; b < bdm.block_count(); ++b) {
    const std::uint64_t pairs = bdm.pair_counts[b];
    if (pairs == 0) continue;
    if (!detail::exceeds_average(pairs, bdm.total_pairs, r)) {
      plan.tasks.push_back({b, MatchTaskKind::single, -1, -1, pairs, 0});
      continue;
    }
    plan.split_blocks.push_back(b);
    const auto& row = bdm.counts[b];
    for (std::uint32_t i = 0; i < m; ++i) {
      const std::uint64_t ci = row[i];
      if (ci >= 2) {
        plan.tasks.push_back({b, MatchTaskKind::single, static_cast<std::int32_t>(i), -1,
                              pairs_in_block(ci), 0});
      }
    }
    for (std::uint32_t i = 0; i < m; ++i) {
      if (row[i] == 0) continue;
      for (std::uint32_t j = i + 1; j < m; ++j) {
        if (row[j] == 0) continue;
        plan.tasks.push_back({b, MatchTaskKind::cross, static_cast<std::int32_t>(i),
                              static_cast<std::int32_t>(j), row[i] * row[j], 0});
      }
    }
  }

  // LPT order: pair count descending; ties by lower block index, Single
  // before Cross, then lower (i, j).
  std::sort(plan.tasks.begin(), plan.tasks.end(), [](const MatchTask& a, const MatchTask& b) {
    if (a.pair_count != b.pair_count) return a.pair_count > b.pair_count;
    if (a.block_index != b.block_index) return a.block_index < b.block_index;
    if (a.kind != b.kind) return a.kind == MatchTaskKind::single;
    if (a.sub_i != b.sub_i) return a.sub_i < b.sub_i;
    return a.sub_j < b.sub_j;
  });

  plan.per_reduce_load.assign(r, 0);
  for (auto& task : plan.tasks) {
    std::uint32_t best = 0;
    for (std::uint32_t k = 1; k < r; ++k) {
      if (plan.per_reduce_load[k] < plan.per_reduce_load[best]) best = k;
    }
    task.assigned_reduce = best;
    plan.per_reduce_load[best] += task.pair_count;
  }

  std::uint64_t planned = 0;
  for (const auto& task : plan.tasks) planned += task.pair_count;
  if (planned != bdm.total_pairs) {
    throw InvariantError("blocksplit_plan: task pair counts sum to " + std::to_string(planned) +
                         ", expected P = " + std::to_string(bdm.total_pairs));
  }
  return plan;
}

/// Map-side routing table: task indices an entity of (block, partition) must
/// be replicated to. Built once per plan and shared read-only.
struct BlocksplitRouter {
  std::vector<std::vector<std::vector<std::uint32_t>>> tasks_for;  ///< [block][partition]

  static BlocksplitRouter build(const BlockDistributionMatrix& bdm, const MatchTaskPlan& plan) {
    BlocksplitRouter router;
    router.tasks_for.assign(bdm.block_count(),
                            std::vector<std::vector<std::uint32_t>>(bdm.m));
    for (std::uint32_t idx = 0; idx < plan.tasks.size(); ++idx) {
      const MatchTask& task = plan.tasks[idx];
      auto& block_routes = router.tasks_for.at(task.block_index);
      if (task.kind == MatchTaskKind::single && task.sub_i < 0) {
        for (auto& routes : block_routes) routes.push_back(idx);
      } else if (task.kind == MatchTaskKind::single) {
        block_routes.at(static_cast<std::size_t>(task.sub_i)).push_back(idx);
      } else {
        block_routes.at(static_cast<std::size_t>(task.sub_i)).push_back(idx);
        block_routes.at(static_cast<std::size_t>(task.sub_j)).push_back(idx);
      }
    }
    return router;
  }
};

/// Emits an entity to every match task that involves its sub-block: the
/// whole-block task when the block is unsplit, otherwise its own Single task
/// (when that task exists) plus every Cross task touching its partition.
/// Order bytes are (side, partition, id): the side flag lets a cross-task
/// reducer separate the two sub-blocks without buffering ambiguity.
inline void blocksplit_map_emit(const Entity& e, const BlockDistributionMatrix& bdm,
                                const MatchTaskPlan& plan, const BlocksplitRouter& router,
                                Emitter<Entity>& out) {
  const auto block = bdm.block_index(e.key);
  if (!block) {
    throw InvariantError("blocksplit_map_emit: key '" + wire::printable(e.key) +
                         "' not in BDM (stale plan)");
  }
  if (e.partition >= bdm.m) {
    throw InvariantError("blocksplit_map_emit: partition " + std::to_string(e.partition) +
                         " out of [0, " + std::to_string(bdm.m) + ") (stale plan)");
  }
  for (std::uint32_t idx : router.tasks_for[*block][e.partition]) {
    const MatchTask& task = plan.tasks[idx];
    const std::uint8_t side =
        (task.kind == MatchTaskKind::cross &&
         static_cast<std::int32_t>(e.partition) == task.sub_j)
            ? 1
            : 0;
    CompositeKey key;
    key.reduce_index = task.assigned_reduce;
    key.group = wire::of_u32(idx);
    wire::append_u8(key.order, side);
    wire::append_u32(key.order, e.partition);
    wire::append_u64(key.order, e.id);
    out.emit(std::move(key), e);
  }
}

/// A group is exactly the entities routed to one match task. Single tasks
/// enumerate the canonical upper triangle; Cross tasks compare the full
/// Cartesian product between the two sides. Observed counts must match the
/// BDM or the plan is stale.
inline void blocksplit_reduce(const ReduceGroup<Entity>& group,
                              const BlockDistributionMatrix& bdm, const MatchTaskPlan& plan,
                              const MatcherConfig& matcher, ReduceEmitter<MatchDecision>& out) {
  const std::uint32_t idx = wire::read_u32(group.group);
  if (idx >= plan.tasks.size()) {
    throw InvariantError("blocksplit_reduce: unknown task index " + std::to_string(idx));
  }
  const MatchTask& task = plan.tasks[idx];
  const auto& records = group.records;

  if (task.kind == MatchTaskKind::single) {
    const std::uint64_t expected =
        task.sub_i < 0 ? bdm.sizes[task.block_index]
                       : bdm.counts[task.block_index][static_cast<std::size_t>(task.sub_i)];
    if (records.size() != expected) {
      throw InvariantError("blocksplit_reduce: single task received " +
                           std::to_string(records.size()) + " entities, BDM says " +
                           std::to_string(expected));
    }
    for (std::size_t x = 0; x + 1 < records.size(); ++x) {
      for (std::size_t y = x + 1; y < records.size(); ++y) {
        out.emit(compare(records[x].value, records[y].value, matcher));
      }
    }
    return;
  }

  std::vector<const Entity*> side_i;
  std::vector<const Entity*> side_j;
  for (const auto& rec : records) {
    if (static_cast<std::int32_t>(rec.value.partition) == task.sub_i) {
      side_i.push_back(&rec.value);
    } else if (static_cast<std::int32_t>(rec.value.partition) == task.sub_j) {
      side_j.push_back(&rec.value);
    } else {
      throw InvariantError("blocksplit_reduce: entity " + std::to_string(rec.value.id) +
                           " from partition " + std::to_string(rec.value.partition) +
                           " does not belong to cross task (" + std::to_string(task.sub_i) +
                           ", " + std::to_string(task.sub_j) + ")");
    }
  }
  const std::uint64_t expect_i = bdm.counts[task.block_index][static_cast<std::size_t>(task.sub_i)];
  const std::uint64_t expect_j = bdm.counts[task.block_index][static_cast<std::size_t>(task.sub_j)];
  if (side_i.size() != expect_i || side_j.size() != expect_j) {
    throw InvariantError("blocksplit_reduce: cross task sides (" +
                         std::to_string(side_i.size()) + ", " + std::to_string(side_j.size()) +
                         ") disagree with BDM (" + std::to_string(expect_i) + ", " +
                         std::to_string(expect_j) + ")");
  }
  for (const Entity* a : side_i) {
    for (const Entity* b : side_j) {
      out.emit(compare(*a, *b, matcher));
    }
  }
}

inline JobResult<MatchDecision> run_blocksplit(const Dataset& dataset, const JobConfig& config,
                                               const MatcherConfig& matcher,
                                               const BlockDistributionMatrix& bdm,
                                               const MatchTaskPlan& plan,
                                               bool collect_outputs = true) {
  const BlocksplitRouter router = BlocksplitRouter::build(bdm, plan);
  auto mapper = [&](std::uint32_t, const std::vector<Entity>& records, Emitter<Entity>& out) {
    for (const Entity& e : records) blocksplit_map_emit(e, bdm, plan, router, out);
  };
  auto reducer = [&](const ReduceGroup<Entity>& group, ReduceEmitter<MatchDecision>& out) {
    blocksplit_reduce(group, bdm, plan, matcher, out);
  };
  return run_job<Entity, MatchDecision>(dataset, mapper, reducer, config,
                                        [](const MatchDecision&) { return 1.0; },
                                        collect_outputs);
}

// --- serialization -----------------------------------------------------------

inline nlohmann::ordered_json blocksplit_plan_to_json(const BlockDistributionMatrix& bdm,
                                                      const MatchTaskPlan& plan,
                                                      std::uint32_t r) {
  nlohmann::ordered_json j;
  j["strategy"] = "blocksplit";
  j["m"] = bdm.m;
  j["r"] = r;
  j["total_pairs"] = bdm.total_pairs;
  j["average_workload"] = average_workload(bdm, r);
  j["split_blocks"] = plan.split_blocks;
  nlohmann::ordered_json tasks = nlohmann::ordered_json::array();
  for (const auto& task : plan.tasks) {
    nlohmann::ordered_json t;
    t["block"] = task.block_index;
    t["key"] = bdm.block_keys[task.block_index];
    t["kind"] = task.kind == MatchTaskKind::single ? "single" : "cross";
    t["sub_i"] = task.sub_i;
    t["sub_j"] = task.sub_j;
    t["pair_count"] = task.pair_count;
    t["reduce"] = task.assigned_reduce;
    tasks.push_back(std::move(t));
  }
  j["tasks"] = std::move(tasks);
  j["per_reduce_load"] = plan.per_reduce_load;
  return j;
}

}  // namespace erlb
