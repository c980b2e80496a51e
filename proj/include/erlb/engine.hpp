#pragma once

/// @file engine.hpp
/// Deterministic in-process MapReduce runtime: map over input partitions,
/// shuffle by composite key, sorted grouping, parallel reduce, per-task
/// metrics.
///
/// Determinism contract: for fixed inputs and config, reduce outputs and
/// metrics are byte-identical across runs and across worker_count values.
/// Map tasks (one per input partition) and reduce tasks run concurrently but
/// write only their own slots; the shuffle totally orders every task's
/// records by (group, order, arrival), so no scheduling interleaving can
/// leak into outputs.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "erlb/errors.hpp"

namespace erlb {

struct JobConfig {
  std::uint32_t m = 1;             ///< number of map (input) partitions
  std::uint32_t r = 1;             ///< number of reduce tasks
  std::uint32_t worker_count = 1;  ///< physical parallelism; never affects output
};

/// Routing key carried by every shuffled record. Partitioning uses
/// reduce_index alone; grouping uses (reduce_index, group); records within a
/// group are sorted ascending by order bytes.
struct CompositeKey {
  std::uint32_t reduce_index = 0;
  std::string group;
  std::string order;
};

struct TaskMetrics {
  std::uint32_t reduce_index = 0;
  std::uint64_t records_received = 0;
  std::uint64_t comparisons_done = 0;
  double cost_units = 0.0;

  friend bool operator==(const TaskMetrics&, const TaskMetrics&) = default;
};

// --- stable hash ------------------------------------------------------------

/// Seed folded into stable_hash64 before the payload bytes.
inline constexpr std::uint64_t kStableHashSeed = 0x51ab2ec531785ba4ull;

/// 64-bit FNV-1a over the 8 little-endian seed bytes followed by the payload.
/// Constants are documented in the README; the value is identical on every
/// platform and run, which keeps plans portable.
inline std::uint64_t stable_hash64(std::string_view bytes,
                                   std::uint64_t seed = kStableHashSeed) noexcept {
  constexpr std::uint64_t kOffsetBasis = 14695981039346656037ull;
  constexpr std::uint64_t kPrime = 1099511628211ull;
  std::uint64_t h = kOffsetBasis;
  for (int i = 0; i < 8; ++i) {
    h ^= (seed >> (8 * i)) & 0xffu;
    h *= kPrime;
  }
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kPrime;
  }
  return h;
}

/// Naive partitioner: stable hash modulo r. Identical keys always land on
/// the same reduce task, which is exactly why unsplit skewed blocks pile up.
inline std::uint32_t hash_partition(std::string_view key, std::uint32_t r) {
  if (r == 0) throw InvariantError("hash_partition: r must be >= 1");
  return static_cast<std::uint32_t>(stable_hash64(key) % r);
}

// --- composite-key byte encoding --------------------------------------------

/// Big-endian fixed-width encoders so that byte-lexicographic order on
/// group/order strings equals numeric order on the encoded fields.
namespace wire {

inline void append_u8(std::string& s, std::uint8_t v) { s.push_back(static_cast<char>(v)); }

inline void append_u32(std::string& s, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    s.push_back(static_cast<char>((v >> shift) & 0xffu));
  }
}

inline void append_u64(std::string& s, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    s.push_back(static_cast<char>((v >> shift) & 0xffu));
  }
}

inline std::string of_u32(std::uint32_t v) {
  std::string s;
  append_u32(s, v);
  return s;
}

inline std::uint32_t read_u32(std::string_view s, std::size_t at = 0) {
  if (s.size() < at + 4) throw InvariantError("wire::read_u32: short buffer");
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(s[at + i]);
  return v;
}

inline std::uint64_t read_u64(std::string_view s, std::size_t at = 0) {
  if (s.size() < at + 8) throw InvariantError("wire::read_u64: short buffer");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 8; ++i) v = (v << 8) | static_cast<unsigned char>(s[at + i]);
  return v;
}

/// Hex-escapes non-printable bytes for error messages.
inline std::string printable(std::string_view bytes) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size());
  for (unsigned char c : bytes) {
    if (c >= 0x20 && c < 0x7f) {
      out.push_back(static_cast<char>(c));
    } else {
      out += "\\x";
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    }
  }
  return out;
}

}  // namespace wire

// --- map/reduce plumbing -----------------------------------------------------

template <class V>
struct ShuffleRecord {
  CompositeKey key;
  V value;
};

/// Map-side sink. Rejects out-of-range reduce indices at emission time.
template <class V>
class Emitter {
 public:
  Emitter(std::uint32_t r, std::vector<ShuffleRecord<V>>& sink) : r_(r), sink_(&sink) {}

  void emit(CompositeKey key, V value) {
    if (key.reduce_index >= r_) {
      throw InvariantError("emit: reduce_index " + std::to_string(key.reduce_index) +
                           " out of [0, " + std::to_string(r_) + ") for group '" +
                           wire::printable(key.group) + "'");
    }
    sink_->push_back({std::move(key), std::move(value)});
  }

 private:
  std::uint32_t r_;
  std::vector<ShuffleRecord<V>>* sink_;
};

/// One group as seen by a reducer: records share (reduce_index, group) and
/// arrive ascending by order bytes.
template <class V>
struct ReduceGroup {
  std::uint32_t reduce_index = 0;
  std::string_view group;
  std::span<const ShuffleRecord<V>> records;
};

/// Reduce-side sink. Counts every emission as one comparison and applies the
/// job's cost model; collection can be disabled when only metrics matter.
template <class O>
class ReduceEmitter {
 public:
  using CostFn = std::function<double(const O&)>;

  ReduceEmitter(std::vector<O>* sink, const CostFn& cost) : sink_(sink), cost_(&cost) {}

  void emit(O value) {
    ++count_;
    cost_units_ += (*cost_)(value);
    if (sink_ != nullptr) sink_->push_back(std::move(value));
  }

  std::uint64_t count() const { return count_; }
  double cost_units() const { return cost_units_; }

 private:
  std::vector<O>* sink_;
  const CostFn* cost_;
  std::uint64_t count_ = 0;
  double cost_units_ = 0.0;
};

template <class O>
struct JobResult {
  std::vector<std::vector<O>> outputs;  ///< indexed by reduce task
  std::vector<TaskMetrics> metrics;     ///< one entry per reduce task
};

namespace detail {

/// Runs fn(0..count) on up to `workers` threads. Tasks own disjoint state;
/// the lowest-index exception wins so failures are deterministic too.
template <class Fn>
void parallel_for(std::size_t count, std::uint32_t workers, Fn&& fn) {
  if (count == 0) return;
  const std::size_t w = std::min<std::size_t>(workers, count);
  if (w <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (std::size_t t = 0; t < w; ++t) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

}  // namespace detail

/// Runs one MapReduce job.
///
/// mapper:  void(std::uint32_t partition_index, const std::vector<R>&, Emitter<V>&)
/// reducer: void(const ReduceGroup<V>&, ReduceEmitter<O>&)
///
/// Every emitted record is delivered to reduce task key.reduce_index; within
/// a task, records are grouped by group bytes (groups ascend) and sorted by
/// order bytes within each group. Metrics are collected by the engine, not
/// by reducers, so every strategy is measured identically.
template <class V, class O, class R, class MapFn, class ReduceFn>
JobResult<O> run_job(const std::vector<std::vector<R>>& partitions, MapFn&& mapper,
                     ReduceFn&& reducer, const JobConfig& config,
                     const std::function<double(const O&)>& cost = [](const O&) { return 1.0; },
                     bool collect_outputs = true) {
  if (config.m == 0 || config.r == 0 || config.worker_count == 0) {
    throw InvariantError("run_job: m, r and worker_count must all be >= 1");
  }
  if (partitions.size() != config.m) {
    throw InvariantError("run_job: got " + std::to_string(partitions.size()) +
                         " partitions for config.m = " + std::to_string(config.m));
  }

  // Map: one logical task per input partition, each with a private buffer.
  std::vector<std::vector<ShuffleRecord<V>>> mapped(config.m);
  detail::parallel_for(config.m, config.worker_count, [&](std::size_t p) {
    Emitter<V> out(config.r, mapped[p]);
    mapper(static_cast<std::uint32_t>(p), partitions[p], out);
  });

  // Shuffle: bucket by reduce index, preserving partition-major arrival
  // order so later ties are broken identically on every run.
  std::vector<std::vector<ShuffleRecord<V>>> tasks(config.r);
  for (auto& buffer : mapped) {
    for (auto& rec : buffer) {
      tasks[rec.key.reduce_index].push_back(std::move(rec));
    }
    buffer.clear();
    buffer.shrink_to_fit();
  }

  JobResult<O> result;
  result.outputs.assign(config.r, {});
  result.metrics.assign(config.r, {});

  detail::parallel_for(config.r, config.worker_count, [&](std::size_t t) {
    auto& records = tasks[t];
    std::stable_sort(records.begin(), records.end(),
                     [](const ShuffleRecord<V>& a, const ShuffleRecord<V>& b) {
                       if (a.key.group != b.key.group) return a.key.group < b.key.group;
                       return a.key.order < b.key.order;
                     });

    TaskMetrics& metrics = result.metrics[t];
    metrics.reduce_index = static_cast<std::uint32_t>(t);
    metrics.records_received = records.size();

    ReduceEmitter<O> out(collect_outputs ? &result.outputs[t] : nullptr, cost);
    std::size_t begin = 0;
    while (begin < records.size()) {
      std::size_t end = begin + 1;
      while (end < records.size() && records[end].key.group == records[begin].key.group) {
        ++end;
      }
      ReduceGroup<V> group{static_cast<std::uint32_t>(t), records[begin].key.group,
                           std::span<const ShuffleRecord<V>>(records.data() + begin, end - begin)};
      reducer(group, out);
      begin = end;
    }
    metrics.comparisons_done = out.count();
    metrics.cost_units = out.cost_units();
  });

  return result;
}

}  // namespace erlb
