#pragma once

/// @file report.hpp
/// Run reports, balance metrics, the makespan simulation and benchmark
/// sweeps. This is where the strategies' skew-robustness and scalability
/// behavior becomes numbers: imbalance ratio (max/mean comparisons),
/// replication factor (shuffled records per entity) and a simulated makespan
/// in comparison cost units.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "erlb/bdm.hpp"
#include "erlb/core.hpp"
#include "erlb/engine.hpp"
#include "erlb/errors.hpp"
#include "erlb/matching.hpp"
#include "erlb/strategy_basic.hpp"
#include "erlb/strategy_blocksplit.hpp"
#include "erlb/strategy_pairrange.hpp"

namespace erlb {

enum class StrategyKind { basic, blocksplit, pairrange };

inline std::string_view strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::basic: return "basic";
    case StrategyKind::blocksplit: return "blocksplit";
    case StrategyKind::pairrange: return "pairrange";
  }
  throw InvariantError("strategy_name: unknown strategy");
}

/// max / mean of the per-task loads; 1.0 for an all-zero load vector.
inline double imbalance(std::span<const std::uint64_t> loads) {
  if (loads.empty()) throw InvariantError("imbalance: empty load vector");
  std::uint64_t max = 0;
  std::uint64_t total = 0;
  for (std::uint64_t v : loads) {
    max = std::max(max, v);
    total += v;
  }
  if (total == 0) return 1.0;
  const double mean = static_cast<double>(total) / static_cast<double>(loads.size());
  return static_cast<double>(max) / mean;
}

/// List-scheduling simulation: tasks in the given order, each to the
/// earliest-free worker (ties: lowest worker index); returns the completion
/// time of the last worker. With worker_count >= tasks this is max(costs).
inline double simulated_makespan(std::span<const double> costs, std::uint32_t worker_count) {
  if (worker_count == 0) throw InvariantError("simulated_makespan: worker_count must be >= 1");
  using Worker = std::pair<double, std::uint32_t>;  // (free at, index)
  std::priority_queue<Worker, std::vector<Worker>, std::greater<>> workers;
  for (std::uint32_t i = 0; i < worker_count; ++i) workers.emplace(0.0, i);
  double makespan = 0.0;
  for (double cost : costs) {
    auto [free_at, index] = workers.top();
    workers.pop();
    const double done = free_at + cost;
    makespan = std::max(makespan, done);
    workers.emplace(done, index);
  }
  return makespan;
}

/// Per-reduce pair counts each strategy produces for a given BDM, computed
/// from the plans alone (no execution). Used to cross-check measured runs
/// and to freeze acceptance thresholds.
inline std::vector<std::uint64_t> analytical_loads(StrategyKind strategy,
                                                   const BlockDistributionMatrix& bdm,
                                                   std::uint32_t r) {
  std::vector<std::uint64_t> loads(r, 0);
  switch (strategy) {
    case StrategyKind::basic:
      for (std::uint32_t b = 0; b < bdm.block_count(); ++b) {
        loads[hash_partition(bdm.block_keys[b], r)] += bdm.pair_counts[b];
      }
      return loads;
    case StrategyKind::blocksplit:
      return blocksplit_plan(bdm, bdm.m, r).per_reduce_load;
    case StrategyKind::pairrange: {
      const RangeTable table = compute_ranges(bdm.total_pairs, r);
      for (std::uint32_t k = 0; k < r; ++k) {
        loads[k] = table.boundaries[k].second - table.boundaries[k].first;
      }
      return loads;
    }
  }
  throw InvariantError("analytical_loads: unknown strategy");
}

struct RunReport {
  std::string strategy;
  std::uint32_t m = 0;
  std::uint32_t r = 0;
  std::uint32_t worker_count = 0;
  std::string matcher;
  double threshold = 0.0;
  std::vector<TaskMetrics> per_task;
  std::uint64_t total_comparisons = 0;
  double imbalance = 1.0;
  double replication_factor = 1.0;
  double simulated_makespan = 0.0;
  double wall_time_ms = 0.0;  ///< logged to stderr; never part of the JSON report
};

inline RunReport build_report(StrategyKind strategy, const JobConfig& config,
                              const MatcherConfig& matcher,
                              const std::vector<TaskMetrics>& metrics,
                              std::uint64_t entity_count, double wall_time_ms) {
  RunReport report;
  report.strategy = strategy_name(strategy);
  report.m = config.m;
  report.r = config.r;
  report.worker_count = config.worker_count;
  report.matcher = matcher_name(matcher.kind);
  report.threshold = matcher.threshold;
  report.per_task = metrics;

  std::vector<std::uint64_t> comparisons;
  std::vector<double> costs;
  std::uint64_t records = 0;
  comparisons.reserve(metrics.size());
  costs.reserve(metrics.size());
  for (const auto& task : metrics) {
    comparisons.push_back(task.comparisons_done);
    costs.push_back(task.cost_units);
    records += task.records_received;
    report.total_comparisons += task.comparisons_done;
  }
  report.imbalance = imbalance(comparisons);
  report.replication_factor =
      entity_count == 0 ? 1.0
                        : static_cast<double>(records) / static_cast<double>(entity_count);
  report.simulated_makespan = simulated_makespan(costs, config.worker_count);
  report.wall_time_ms = wall_time_ms;
  return report;
}

/// One full strategy execution: analysis job, plan, match job, report.
struct StrategyRun {
  BlockDistributionMatrix bdm;
  JobResult<MatchDecision> job;
  RunReport report;
};

inline StrategyRun run_strategy(StrategyKind strategy, const Dataset& dataset,
                                const JobConfig& config, const MatcherConfig& matcher,
                                bool collect_outputs = true) {
  validate_dataset(dataset);
  const auto started = std::chrono::steady_clock::now();

  StrategyRun run;
  run.bdm = compute_bdm(dataset, config);
  switch (strategy) {
    case StrategyKind::basic:
      run.job = run_basic(dataset, config, matcher, collect_outputs);
      break;
    case StrategyKind::blocksplit: {
      const MatchTaskPlan plan = blocksplit_plan(run.bdm, config.m, config.r);
      run.job = run_blocksplit(dataset, config, matcher, run.bdm, plan, collect_outputs);
      break;
    }
    case StrategyKind::pairrange: {
      const RangeTable table = compute_ranges(run.bdm.total_pairs, config.r);
      run.job = run_pairrange(dataset, config, matcher, run.bdm, table, collect_outputs);
      break;
    }
  }

  const auto elapsed = std::chrono::steady_clock::now() - started;
  const double wall_ms =
      std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(elapsed).count();
  run.report = build_report(strategy, config, matcher, run.job.metrics, run.bdm.entity_total,
                            wall_ms);
  return run;
}

// --- serialization -----------------------------------------------------------

inline nlohmann::ordered_json report_to_json(const RunReport& report) {
  nlohmann::ordered_json j;
  j["strategy"] = report.strategy;
  j["config"] = {{"m", report.m},
                 {"r", report.r},
                 {"worker_count", report.worker_count},
                 {"matcher", report.matcher},
                 {"threshold", report.threshold}};
  j["total_comparisons"] = report.total_comparisons;
  j["imbalance"] = report.imbalance;
  j["replication_factor"] = report.replication_factor;
  j["simulated_makespan"] = report.simulated_makespan;
  nlohmann::ordered_json tasks = nlohmann::ordered_json::array();
  for (const auto& task : report.per_task) {
    nlohmann::ordered_json t;
    t["reduce_index"] = task.reduce_index;
    t["records_received"] = task.records_received;
    t["comparisons_done"] = task.comparisons_done;
    t["cost_units"] = task.cost_units;
    tasks.push_back(std::move(t));
  }
  j["per_task"] = std::move(tasks);
  return j;
}

/// The exact bytes the `run` subcommand writes. Deterministic for identical
/// inputs and config, across runs and worker counts.
inline std::string render_report(const RunReport& report) {
  return report_to_json(report).dump(2) + "\n";
}

// --- benchmark sweeps ---------------------------------------------------------

struct BenchRow {
  std::string strategy;
  std::uint32_t r = 0;
  double imbalance = 1.0;
  double replication = 1.0;
  double makespan = 0.0;
  double speedup = 1.0;
};

/// Runs every (strategy, r) combination on the identical dataset. Each row
/// models "r available nodes": the job runs with worker_count = r, and
/// speedup is makespan(r = 1) / makespan(r), computing the r = 1 baseline
/// even when it is not among the requested r values.
inline std::vector<BenchRow> bench_sweep(const Dataset& dataset,
                                         const std::vector<StrategyKind>& strategies,
                                         const std::vector<std::uint32_t>& r_values,
                                         const MatcherConfig& matcher) {
  std::vector<BenchRow> rows;
  const auto m = static_cast<std::uint32_t>(dataset.size());
  for (StrategyKind strategy : strategies) {
    const auto run_at = [&](std::uint32_t r) {
      return run_strategy(strategy, dataset, JobConfig{m, r, r}, matcher, false);
    };
    double baseline = run_at(1).report.simulated_makespan;
    for (std::uint32_t r : r_values) {
      if (r == 0) throw DataError("bench_sweep: r values must be >= 1");
      const StrategyRun run = run_at(r);
      BenchRow row;
      row.strategy = std::string(strategy_name(strategy));
      row.r = r;
      row.imbalance = run.report.imbalance;
      row.replication = run.report.replication_factor;
      row.makespan = run.report.simulated_makespan;
      row.speedup = row.makespan == 0.0 ? 1.0 : baseline / row.makespan;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "strategy,r,imbalance,replication,makespan,speedup\n";
  char line[256];
  for (const auto& row : rows) {
    std::snprintf(line, sizeof(line), "%s,%u,%.6f,%.6f,%.6f,%.6f\n", row.strategy.c_str(), row.r,
                  row.imbalance, row.replication, row.makespan, row.speedup);
    out += line;
  }
  return out;
}

}  // namespace erlb
