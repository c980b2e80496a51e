#pragma once

/// @file strategy_pairrange.hpp
/// PairRange: enumerate all P comparison pairs of the dataset globally,
/// split [0, P) into r contiguous ranges of width ceil(P/r), and let reduce
/// task k compute exactly the pairs whose global index falls in range k.
/// Per-reduce workloads differ by at most one range remainder regardless of
/// how the input is partitioned.
///
/// The global order is per-block row-major enumeration shifted by the BDM
/// prefix offsets:
///
///   index(b, x, y) = offsets[b] + x*n - x*(x+1)/2 + (y - x - 1),  x < y < n_b
///
/// a bijection onto [0, P) with O(1) forward evaluation and an O(log n)
/// inverse per lookup. Entities carry their (block, position) coordinates
/// through the shuffle, so reducers only need the broadcast BDM and range
/// table.

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "erlb/bdm.hpp"
#include "erlb/core.hpp"
#include "erlb/engine.hpp"
#include "erlb/errors.hpp"
#include "erlb/matching.hpp"

namespace erlb {

/// Partition of [0, P) into r half-open intervals. Every interval has width
/// ceil(P/r) except the one containing P's end; intervals past that are
/// empty.
struct RangeTable {
  std::uint64_t total_pairs = 0;
  std::uint32_t r = 1;
  std::uint64_t width = 0;  ///< ceil(P/r); 0 only when P == 0
  std::vector<std::pair<std::uint64_t, std::uint64_t>> boundaries;

  friend bool operator==(const RangeTable&, const RangeTable&) = default;
};

/// In-block coordinates of one pair: positions x < y in the canonical member
/// order of block block_index.
struct PairCoordinate {
  std::uint32_t block_index = 0;
  std::uint64_t x = 0;
  std::uint64_t y = 0;

  friend bool operator==(const PairCoordinate&, const PairCoordinate&) = default;
};

namespace detail {

/// Rank of pair (x, y) in the row-major upper-triangle enumeration of a
/// block of size n.
inline std::uint64_t rowmajor_rank(std::uint64_t x, std::uint64_t y, std::uint64_t n) {
  return x * n - x * (x + 1) / 2 + (y - x - 1);
}

/// First rank of row x, i.e. rowmajor_rank(x, x+1, n).
inline std::uint64_t row_start(std::uint64_t x, std::uint64_t n) {
  return x * n - x * (x + 1) / 2;
}

}  // namespace detail

inline std::uint64_t global_pair_index(const BlockDistributionMatrix& bdm,
                                       const PairCoordinate& coord) {
  if (coord.block_index >= bdm.block_count()) {
    throw InvariantError("global_pair_index: block " + std::to_string(coord.block_index) +
                         " out of range");
  }
  const std::uint64_t n = bdm.sizes[coord.block_index];
  if (coord.x >= coord.y || coord.y >= n) {
    throw InvariantError("global_pair_index: invalid coordinate (" + std::to_string(coord.x) +
                         ", " + std::to_string(coord.y) + ") for block size " +
                         std::to_string(n));
  }
  return bdm.offsets[coord.block_index] + detail::rowmajor_rank(coord.x, coord.y, n);
}

/// Inverse of global_pair_index. Binary-searches the owning block through
/// the offsets, then the row within the block.
inline PairCoordinate pair_from_global_index(const BlockDistributionMatrix& bdm,
                                             std::uint64_t p) {
  if (p >= bdm.total_pairs) {
    throw InvariantError("pair_from_global_index: index " + std::to_string(p) +
                         " out of [0, " + std::to_string(bdm.total_pairs) + ")");
  }
  const auto it = std::upper_bound(bdm.offsets.begin(), bdm.offsets.end(), p);
  const auto b = static_cast<std::uint32_t>(it - bdm.offsets.begin() - 1);
  const std::uint64_t local = p - bdm.offsets[b];
  const std::uint64_t n = bdm.sizes[b];

  // Largest x with row_start(x) <= local; row_start is strictly increasing
  // while rows are non-empty.
  std::uint64_t lo = 0;
  std::uint64_t hi = n - 1;  // exclusive; rows run 0 .. n-2
  while (lo + 1 < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (detail::row_start(mid, n) <= local) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const std::uint64_t x = lo;
  const std::uint64_t y = x + 1 + (local - detail::row_start(x, n));
  return {b, x, y};
}

inline RangeTable compute_ranges(std::uint64_t total_pairs, std::uint32_t r) {
  if (r == 0) throw InvariantError("compute_ranges: r must be >= 1");
  RangeTable table;
  table.total_pairs = total_pairs;
  table.r = r;
  table.width = total_pairs == 0 ? 0 : (total_pairs + r - 1) / r;
  table.boundaries.reserve(r);
  for (std::uint32_t k = 0; k < r; ++k) {
    const std::uint64_t s = std::min<std::uint64_t>(static_cast<std::uint64_t>(k) * table.width,
                                                    total_pairs);
    const std::uint64_t e = std::min<std::uint64_t>(
        (static_cast<std::uint64_t>(k) + 1) * table.width, total_pairs);
    table.boundaries.emplace_back(s, e);
  }
  return table;
}

/// Exactly the set { k : some pair involving this member position has its
/// global index in range k }, computed without materializing pairs.
///
/// The pairs of position q split into a row segment (q, y) for y > q, whose
/// indices are consecutive, and a column segment (x, q) for x < q, whose
/// indices are non-decreasing in x with gaps; the row segment contributes a
/// contiguous span of ranges, the column segment is walked one touched range
/// at a time with a binary search to the next range boundary. Cost is
/// O(ranges touched * log n).
inline std::vector<std::uint32_t> entity_ranges(const BlockDistributionMatrix& bdm,
                                                const RangeTable& ranges,
                                                std::uint32_t block_index,
                                                std::uint64_t position) {
  if (block_index >= bdm.block_count()) {
    throw InvariantError("entity_ranges: block " + std::to_string(block_index) +
                         " out of range");
  }
  const std::uint64_t n = bdm.sizes[block_index];
  if (position >= n) {
    throw InvariantError("entity_ranges: position " + std::to_string(position) +
                         " out of block of size " + std::to_string(n));
  }
  std::vector<std::uint32_t> out;
  if (n < 2 || ranges.total_pairs == 0) return out;

  const std::uint64_t w = ranges.width;
  const std::uint64_t offset = bdm.offsets[block_index];
  const std::uint64_t q = position;

  if (q + 1 < n) {
    const std::uint64_t first = offset + detail::row_start(q, n);
    const std::uint64_t last = first + (n - q - 2);
    for (std::uint64_t k = first / w; k <= last / w; ++k) {
      out.push_back(static_cast<std::uint32_t>(k));
    }
  }

  const auto column_index = [&](std::uint64_t x) {
    return offset + detail::rowmajor_rank(x, q, n);
  };
  std::uint64_t x = 0;
  while (x < q) {
    const std::uint64_t k = column_index(x) / w;
    out.push_back(static_cast<std::uint32_t>(k));
    const std::uint64_t boundary = (k + 1) * w;
    // Smallest x' in (x, q) whose pair index crosses into the next range.
    std::uint64_t lo = x + 1;
    std::uint64_t hi = q;
    while (lo < hi) {
      const std::uint64_t mid = lo + (hi - lo) / 2;
      if (column_index(mid) >= boundary) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    x = lo;
  }

  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Shuffle payload: the entity plus its global pair coordinates.
struct PositionedEntity {
  std::uint32_t block_index = 0;
  std::uint64_t position = 0;
  Entity entity;
};

/// One record per range the entity's pairs touch; order bytes are the
/// (block, position) coordinate so each task receives its entities in
/// canonical coordinate order.
inline void pairrange_map_emit(const Entity& e, std::uint32_t block_index, std::uint64_t position,
                               const BlockDistributionMatrix& bdm, const RangeTable& ranges,
                               Emitter<PositionedEntity>& out) {
  for (std::uint32_t k : entity_ranges(bdm, ranges, block_index, position)) {
    CompositeKey key;
    key.reduce_index = k;
    key.group = wire::of_u32(k);
    wire::append_u32(key.order, block_index);
    wire::append_u64(key.order, position);
    out.emit(std::move(key), PositionedEntity{block_index, position, e});
  }
}

/// Map task for one input partition: ranks its own entities within each
/// (block, partition) sub-block by id, shifts by the BDM prefix to get the
/// canonical in-block position, and emits to every touched range.
inline void pairrange_map_partition(std::uint32_t p, const std::vector<Entity>& records,
                                    const BlockDistributionMatrix& bdm, const RangeTable& ranges,
                                    Emitter<PositionedEntity>& out) {
  std::vector<const Entity*> sorted;
  sorted.reserve(records.size());
  for (const Entity& e : records) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(), [](const Entity* a, const Entity* b) {
    if (a->key != b->key) return a->key < b->key;
    return a->id < b->id;
  });

  std::size_t begin = 0;
  while (begin < sorted.size()) {
    std::size_t end = begin + 1;
    while (end < sorted.size() && sorted[end]->key == sorted[begin]->key) ++end;

    const auto block = bdm.block_index(sorted[begin]->key);
    if (!block) {
      throw InvariantError("pairrange_map_partition: key '" +
                           wire::printable(sorted[begin]->key) + "' not in BDM (stale BDM)");
    }
    if (end - begin != bdm.counts[*block][p]) {
      throw InvariantError("pairrange_map_partition: partition " + std::to_string(p) +
                           " holds " + std::to_string(end - begin) + " entities of block '" +
                           wire::printable(sorted[begin]->key) + "', BDM says " +
                           std::to_string(bdm.counts[*block][p]) + " (stale BDM)");
    }
    const std::uint64_t base = bdm.partition_position_base(*block, p);
    for (std::size_t i = begin; i < end; ++i) {
      pairrange_map_emit(*sorted[i], *block, base + static_cast<std::uint64_t>(i - begin), bdm,
                         ranges, out);
    }
    begin = end;
  }
}

/// Computes exactly the pairs with global index in range k by walking the
/// bijection from the range start. Every endpoint must have been delivered;
/// a gap means the emission side is broken and is a hard error.
inline void pairrange_reduce(const ReduceGroup<PositionedEntity>& group,
                             const BlockDistributionMatrix& bdm, const RangeTable& ranges,
                             const MatcherConfig& matcher, ReduceEmitter<MatchDecision>& out) {
  const std::uint32_t k = wire::read_u32(group.group);
  if (k >= ranges.boundaries.size()) {
    throw InvariantError("pairrange_reduce: range " + std::to_string(k) + " out of table");
  }
  const auto [start, stop] = ranges.boundaries[k];
  const auto& records = group.records;
  if (start == stop) {
    if (!records.empty()) {
      throw InvariantError("pairrange_reduce: empty range " + std::to_string(k) +
                           " received records");
    }
    return;
  }

  using Record = ShuffleRecord<PositionedEntity>;
  const auto find = [&](std::uint32_t block, std::uint64_t position) {
    const auto it = std::lower_bound(
        records.begin(), records.end(), std::make_pair(block, position),
        [](const Record& rec, const std::pair<std::uint32_t, std::uint64_t>& want) {
          if (rec.value.block_index != want.first) return rec.value.block_index < want.first;
          return rec.value.position < want.second;
        });
    if (it == records.end() || it->value.block_index != block || it->value.position != position) {
      throw InvariantError("pairrange_reduce: pair in range " + std::to_string(k) +
                           " references undelivered entity (block " + std::to_string(block) +
                           ", position " + std::to_string(position) + ")");
    }
    return it;
  };

  PairCoordinate coord = pair_from_global_index(bdm, start);
  std::uint32_t b = coord.block_index;
  std::uint64_t n = bdm.sizes[b];
  std::uint64_t x = coord.x;
  std::uint64_t y = coord.y;
  auto row_entity = find(b, x);
  auto col_it = find(b, y);

  for (std::uint64_t p = start; p < stop; ++p) {
    if (col_it == records.end() || col_it->value.block_index != b ||
        col_it->value.position != y) {
      col_it = find(b, y);  // throws with the gap's coordinates
    }
    out.emit(compare(row_entity->value.entity, col_it->value.entity, matcher));

    if (p + 1 == stop) break;
    ++y;
    if (y == n) {
      ++x;
      if (x + 1 >= n) {
        do {
          ++b;
        } while (b < bdm.block_count() && bdm.pair_counts[b] == 0);
        if (b >= bdm.block_count()) {
          throw InvariantError("pairrange_reduce: ran past the last block");
        }
        n = bdm.sizes[b];
        x = 0;
      }
      y = x + 1;
      row_entity = find(b, x);
      col_it = find(b, y);
    } else {
      ++col_it;
    }
  }
}

inline JobResult<MatchDecision> run_pairrange(const Dataset& dataset, const JobConfig& config,
                                              const MatcherConfig& matcher,
                                              const BlockDistributionMatrix& bdm,
                                              const RangeTable& ranges,
                                              bool collect_outputs = true) {
  if (ranges.r != config.r) {
    throw InvariantError("run_pairrange: range table built for r = " + std::to_string(ranges.r) +
                         ", job has r = " + std::to_string(config.r));
  }
  auto mapper = [&](std::uint32_t p, const std::vector<Entity>& records,
                    Emitter<PositionedEntity>& out) {
    pairrange_map_partition(p, records, bdm, ranges, out);
  };
  auto reducer = [&](const ReduceGroup<PositionedEntity>& group,
                     ReduceEmitter<MatchDecision>& out) {
    pairrange_reduce(group, bdm, ranges, matcher, out);
  };
  return run_job<PositionedEntity, MatchDecision>(dataset, mapper, reducer, config,
                                                  [](const MatchDecision&) { return 1.0; },
                                                  collect_outputs);
}

// --- serialization -----------------------------------------------------------

inline nlohmann::ordered_json pairrange_table_to_json(const RangeTable& table) {
  nlohmann::ordered_json j;
  j["strategy"] = "pairrange";
  j["total_pairs"] = table.total_pairs;
  j["r"] = table.r;
  j["width"] = table.width;
  nlohmann::ordered_json bounds = nlohmann::ordered_json::array();
  for (const auto& [s, e] : table.boundaries) {
    bounds.push_back(nlohmann::ordered_json::array({s, e}));
  }
  j["boundaries"] = std::move(bounds);
  return j;
}

}  // namespace erlb
