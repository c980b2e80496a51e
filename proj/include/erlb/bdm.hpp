#pragma once

/// @file bdm.hpp
/// Block Distribution Matrix: per-block, per-input-partition entity counts
/// plus the derived pair counts, prefix offsets and the total pair count P.
/// Computed once by an analysis MapReduce job and then shared, immutable, by
/// every map and reduce task of the matching job.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "erlb/core.hpp"
#include "erlb/engine.hpp"
#include "erlb/errors.hpp"

namespace erlb {

struct BlockDistributionMatrix {
  std::vector<std::string> block_keys;             ///< canonical block order (key byte order)
  std::vector<std::vector<std::uint64_t>> counts;  ///< counts[b][i]: block b entities in partition i
  std::vector<std::uint64_t> sizes;                ///< n_b = sum_i counts[b][i]
  std::vector<std::uint64_t> pair_counts;          ///< n_b choose 2
  std::vector<std::uint64_t> offsets;              ///< prefix sums of pair_counts
  std::uint64_t total_pairs = 0;                   ///< P
  std::uint32_t m = 0;
  std::uint64_t entity_total = 0;

  friend bool operator==(const BlockDistributionMatrix&, const BlockDistributionMatrix&) = default;

  std::size_t block_count() const { return block_keys.size(); }

  /// Index of a blocking key in canonical block order.
  std::optional<std::uint32_t> block_index(std::string_view key) const {
    auto it = std::lower_bound(block_keys.begin(), block_keys.end(), key);
    if (it == block_keys.end() || *it != key) return std::nullopt;
    return static_cast<std::uint32_t>(it - block_keys.begin());
  }

  /// Canonical position, within block b, of the first member coming from
  /// input partition p.
  std::uint64_t partition_position_base(std::uint32_t b, std::uint32_t p) const {
    std::uint64_t base = 0;
    for (std::uint32_t i = 0; i < p; ++i) base += counts[b][i];
    return base;
  }
};

/// Derives sizes, pair counts, offsets and totals from (keys, counts) rows.
/// Keys must already be ascending and unique; rows must be m wide.
inline BlockDistributionMatrix finalize_bdm(std::vector<std::string> keys,
                                            std::vector<std::vector<std::uint64_t>> counts,
                                            std::uint32_t m) {
  if (keys.size() != counts.size()) {
    throw InvariantError("finalize_bdm: keys/counts size mismatch");
  }
  if (!std::is_sorted(keys.begin(), keys.end()) ||
      std::adjacent_find(keys.begin(), keys.end()) != keys.end()) {
    throw InvariantError("finalize_bdm: block keys must be ascending and unique");
  }
  BlockDistributionMatrix bdm;
  bdm.block_keys = std::move(keys);
  bdm.counts = std::move(counts);
  bdm.m = m;
  bdm.sizes.reserve(bdm.counts.size());
  bdm.pair_counts.reserve(bdm.counts.size());
  bdm.offsets.reserve(bdm.counts.size());
  std::uint64_t offset = 0;
  for (const auto& row : bdm.counts) {
    if (row.size() != m) throw InvariantError("finalize_bdm: counts row width != m");
    std::uint64_t n = 0;
    for (std::uint64_t c : row) n += c;
    const std::uint64_t pairs = pairs_in_block(n);
    bdm.sizes.push_back(n);
    bdm.pair_counts.push_back(pairs);
    bdm.offsets.push_back(offset);
    offset += pairs;
    bdm.entity_total += n;
  }
  bdm.total_pairs = offset;
  return bdm;
}

/// Analysis job: map emits one (key, partition) contribution per entity,
/// reduce aggregates a per-partition count row per block. Equals a
/// sequential counting pass over the dataset for every input.
inline BlockDistributionMatrix compute_bdm(const Dataset& partitions, const JobConfig& config) {
  struct CountRow {
    std::string key;
    std::vector<std::uint64_t> per_partition;
  };

  auto mapper = [&config](std::uint32_t p, const std::vector<Entity>& records,
                          Emitter<std::uint32_t>& out) {
    for (const Entity& e : records) {
      CompositeKey key;
      key.reduce_index = hash_partition(e.key, config.r);
      key.group = e.key;
      key.order = wire::of_u32(p);
      out.emit(std::move(key), p);
    }
  };

  auto reducer = [&config](const ReduceGroup<std::uint32_t>& group,
                           ReduceEmitter<CountRow>& out) {
    CountRow row{std::string(group.group), std::vector<std::uint64_t>(config.m, 0)};
    for (const auto& rec : group.records) {
      if (rec.value >= config.m) {
        throw InvariantError("compute_bdm: partition index " + std::to_string(rec.value) +
                             " out of [0, " + std::to_string(config.m) + ")");
      }
      ++row.per_partition[rec.value];
    }
    out.emit(std::move(row));
  };

  auto job = run_job<std::uint32_t, CountRow>(partitions, mapper, reducer, config,
                                              [](const CountRow&) { return 0.0; });

  std::vector<CountRow> rows;
  for (auto& task : job.outputs) {
    for (auto& row : task) rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(),
            [](const CountRow& a, const CountRow& b) { return a.key < b.key; });

  std::vector<std::string> keys;
  std::vector<std::vector<std::uint64_t>> counts;
  keys.reserve(rows.size());
  counts.reserve(rows.size());
  for (auto& row : rows) {
    keys.push_back(std::move(row.key));
    counts.push_back(std::move(row.per_partition));
  }
  return finalize_bdm(std::move(keys), std::move(counts), config.m);
}

/// P / r, the balance target both strategies aim at. IEEE double division
/// (round to nearest); split decisions use exact integer arithmetic instead.
inline double average_workload(const BlockDistributionMatrix& bdm, std::uint32_t r) {
  if (r == 0) throw InvariantError("average_workload: r must be >= 1");
  return static_cast<double>(bdm.total_pairs) / static_cast<double>(r);
}

// --- serialization -----------------------------------------------------------

inline nlohmann::ordered_json bdm_to_json(const BlockDistributionMatrix& bdm) {
  nlohmann::ordered_json j;
  j["m"] = bdm.m;
  j["entity_total"] = bdm.entity_total;
  j["total_pairs"] = bdm.total_pairs;
  j["block_keys"] = bdm.block_keys;
  j["counts"] = bdm.counts;
  j["sizes"] = bdm.sizes;
  j["pair_counts"] = bdm.pair_counts;
  j["offsets"] = bdm.offsets;
  return j;
}

/// Parses and fully revalidates a BDM document; derived fields must agree
/// with the counts matrix. Throws DataError on any mismatch.
inline BlockDistributionMatrix bdm_from_json(const nlohmann::json& j) {
  BlockDistributionMatrix bdm;
  try {
    std::vector<std::string> keys = j.at("block_keys").get<std::vector<std::string>>();
    auto counts = j.at("counts").get<std::vector<std::vector<std::uint64_t>>>();
    const auto m = j.at("m").get<std::uint32_t>();
    bdm = finalize_bdm(std::move(keys), std::move(counts), m);
    if (j.at("sizes").get<std::vector<std::uint64_t>>() != bdm.sizes ||
        j.at("pair_counts").get<std::vector<std::uint64_t>>() != bdm.pair_counts ||
        j.at("offsets").get<std::vector<std::uint64_t>>() != bdm.offsets ||
        j.at("total_pairs").get<std::uint64_t>() != bdm.total_pairs ||
        j.at("entity_total").get<std::uint64_t>() != bdm.entity_total) {
      throw DataError("bdm_from_json: derived fields disagree with counts matrix");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bdm_from_json: ") + e.what());
  } catch (const InvariantError& e) {
    throw DataError(std::string("bdm_from_json: ") + e.what());
  }
  return bdm;
}

}  // namespace erlb
