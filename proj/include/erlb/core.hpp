#pragma once

/// @file core.hpp
/// Domain model for blocking-based deduplication: entities, blocks, pairs,
/// and the canonical orders every load-balancing strategy shares.
///
/// Canonical member order within a block is ascending (partition, id);
/// canonical block order is ascending blocking-key byte order. All plans and
/// pair enumerations downstream are defined relative to these two orders,
/// which is what makes runs reproducible.

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "erlb/errors.hpp"

namespace erlb {

using EntityId = std::uint64_t;

struct Entity {
  EntityId id = 0;
  std::uint32_t partition = 0;  ///< input-partition index in [0, m)
  std::string key;              ///< blocking key
  std::vector<std::string> attrs;

  friend bool operator==(const Entity&, const Entity&) = default;
};

/// m input partitions of entities; the outer index is the partition index.
/// Invariant: e.partition equals the slot an entity lives in, ids are unique
/// dataset-wide (see validate_dataset).
using Dataset = std::vector<std::vector<Entity>>;

/// Unordered pair of same-block entities, stored with `a` at the earlier
/// canonical (partition, id) position.
struct Pair {
  EntityId a = 0;
  EntityId b = 0;

  friend bool operator==(const Pair&, const Pair&) = default;
};

/// All entities sharing one blocking key; members are entity ids in
/// canonical order.
struct Block {
  std::string key;
  std::vector<EntityId> members;

  friend bool operator==(const Block&, const Block&) = default;
};

/// n choose 2, the comparison count of a block of size n. Total on all
/// inputs; the even factor is divided first so the intermediate cannot
/// overflow before ~6e9 entities per block.
constexpr std::uint64_t pairs_in_block(std::uint64_t n) noexcept {
  return (n % 2 == 0) ? n / 2 * (n - 1) : n * ((n - 1) / 2);
}

/// Row-major upper-triangle enumeration over canonical member positions:
/// (0,1),(0,2),...,(0,n-1),(1,2),...,(n-2,n-1).
inline std::vector<Pair> enumerate_block_pairs(const Block& block) {
  const std::size_t n = block.members.size();
  std::vector<Pair> out;
  out.reserve(n < 2 ? 0 : pairs_in_block(n));
  for (std::size_t x = 0; x + 1 < n; ++x) {
    for (std::size_t y = x + 1; y < n; ++y) {
      out.push_back({block.members[x], block.members[y]});
    }
  }
  return out;
}

/// Groups a dataset into blocks, ascending by blocking-key byte order, with
/// members in canonical (partition, id) order. Every entity appears in
/// exactly one block.
inline std::vector<Block> canonical_blocks(const Dataset& dataset) {
  std::vector<const Entity*> refs;
  for (const auto& part : dataset) {
    for (const auto& e : part) refs.push_back(&e);
  }
  std::sort(refs.begin(), refs.end(), [](const Entity* l, const Entity* r) {
    if (l->key != r->key) return l->key < r->key;
    if (l->partition != r->partition) return l->partition < r->partition;
    return l->id < r->id;
  });
  std::vector<Block> blocks;
  for (const Entity* e : refs) {
    if (blocks.empty() || blocks.back().key != e->key) {
      blocks.push_back({e->key, {}});
    }
    blocks.back().members.push_back(e->id);
  }
  return blocks;
}

/// Checks dataset-level invariants: ids unique, partition field matching the
/// slot the entity lives in. Throws DataError.
inline void validate_dataset(const Dataset& dataset) {
  std::unordered_set<EntityId> seen;
  seen.reserve(256);
  for (std::size_t p = 0; p < dataset.size(); ++p) {
    for (const Entity& e : dataset[p]) {
      if (e.partition != p) {
        throw DataError("entity " + std::to_string(e.id) + " carries partition " +
                        std::to_string(e.partition) + " but lives in partition " +
                        std::to_string(p));
      }
      if (!seen.insert(e.id).second) {
        throw DataError("duplicate entity id " + std::to_string(e.id));
      }
    }
  }
}

}  // namespace erlb
