#pragma once

/// @file strategy_basic.hpp
/// Naive baseline: partition by hash of the blocking key, so each block is
/// handled entirely by one reduce task. No replication (factor exactly 1),
/// no skew handling; exists as the comparison foil for the balanced
/// strategies and shares their engine and metrics path.

#include <cstdint>
#include <vector>

#include "erlb/core.hpp"
#include "erlb/engine.hpp"
#include "erlb/matching.hpp"

namespace erlb {

/// One record per entity: reduce task by key hash, grouped by key, ordered
/// canonically by (partition, id).
inline void basic_map_emit(const Entity& e, std::uint32_t r, Emitter<Entity>& out) {
  CompositeKey key;
  key.reduce_index = hash_partition(e.key, r);
  key.group = e.key;
  wire::append_u32(key.order, e.partition);
  wire::append_u64(key.order, e.id);
  out.emit(std::move(key), e);
}

/// A group is one full block in canonical order; compares all members with
/// each other (row-major upper triangle).
inline void basic_reduce(const ReduceGroup<Entity>& group, const MatcherConfig& matcher,
                         ReduceEmitter<MatchDecision>& out) {
  const auto& records = group.records;
  for (std::size_t x = 0; x + 1 < records.size(); ++x) {
    for (std::size_t y = x + 1; y < records.size(); ++y) {
      out.emit(compare(records[x].value, records[y].value, matcher));
    }
  }
}

inline JobResult<MatchDecision> run_basic(const Dataset& dataset, const JobConfig& config,
                                          const MatcherConfig& matcher,
                                          bool collect_outputs = true) {
  auto mapper = [&config](std::uint32_t, const std::vector<Entity>& records,
                          Emitter<Entity>& out) {
    for (const Entity& e : records) basic_map_emit(e, config.r, out);
  };
  auto reducer = [&matcher](const ReduceGroup<Entity>& group, ReduceEmitter<MatchDecision>& out) {
    basic_reduce(group, matcher, out);
  };
  return run_job<Entity, MatchDecision>(dataset, mapper, reducer, config,
                                        [](const MatchDecision&) { return 1.0; },
                                        collect_outputs);
}

}  // namespace erlb
