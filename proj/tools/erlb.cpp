// erlb command-line driver: dataset generation, BDM analysis, strategy
// planning, single runs and benchmark sweeps.
//
// Exit codes: 0 success, 2 invalid arguments, 3 data errors, 4 internal
// invariant violation.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "erlb/erlb.hpp"

namespace {

constexpr int kExitInvalidArgs = 2;
constexpr int kExitDataError = 3;
constexpr int kExitInvariantError = 4;

struct InputOptions {
  std::string input_csv;
  std::string key_column = "key";
  erlb::GenSpec gen;
  std::string placement = "round_robin";
};

struct CommonOptions {
  std::uint32_t r = 1;
  std::uint32_t workers = 1;
  std::string strategy;
  std::string matcher = "jaccard";
  double threshold = 0.8;
  std::string out;
};

void add_input_options(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("--input", in.input_csv, "CSV dataset to load (generates one when omitted)");
  cmd->add_option("--key-column", in.key_column, "blocking-key column name")
      ->capture_default_str();
  cmd->add_option("--m", in.gen.m, "number of input partitions")->check(CLI::PositiveNumber);
  cmd->add_option("--n", in.gen.n, "entities to generate");
  cmd->add_option("--distinct-keys", in.gen.distinct_keys, "distinct blocking keys")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--zipf-s", in.gen.zipf_s, "Zipf skew exponent (0 = uniform)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", in.gen.seed, "generator seed");
  cmd->add_option("--attr-len", in.gen.attr_len, "generated attribute length");
  cmd->add_option("--placement", in.placement, "round_robin|clustered")
      ->check(CLI::IsMember({"round_robin", "clustered"}))
      ->capture_default_str();
}

erlb::Dataset acquire_dataset(const InputOptions& in) {
  if (!in.input_csv.empty()) {
    return erlb::load_csv_file(in.input_csv, in.key_column, in.gen.m);
  }
  erlb::GenSpec spec = in.gen;
  spec.placement =
      in.placement == "clustered" ? erlb::Placement::clustered : erlb::Placement::round_robin;
  return erlb::generate(spec);
}

erlb::StrategyKind parse_strategy(const std::string& name) {
  if (name == "basic") return erlb::StrategyKind::basic;
  if (name == "blocksplit") return erlb::StrategyKind::blocksplit;
  if (name == "pairrange") return erlb::StrategyKind::pairrange;
  throw CLI::ValidationError("--strategy", "unknown strategy '" + name + "'");
}

erlb::MatcherConfig parse_matcher(const CommonOptions& opts) {
  erlb::MatcherConfig matcher;
  matcher.kind = opts.matcher == "null" ? erlb::MatcherKind::null : erlb::MatcherKind::jaccard;
  matcher.threshold = opts.threshold;
  return matcher;
}

void write_output(const std::string& out_path, const std::string& payload) {
  if (out_path.empty() || out_path == "-") {
    std::cout << payload;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw erlb::DataError("cannot open output file: " + out_path);
  out << payload;
  if (!out) throw erlb::DataError("failed writing output file: " + out_path);
}

std::vector<std::uint32_t> parse_r_list(const std::string& csv) {
  std::vector<std::uint32_t> values;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      const unsigned long v = std::stoul(item);
      if (v == 0 || v > 0xffffffffull) throw std::out_of_range(item);
      values.push_back(static_cast<std::uint32_t>(v));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--r-list", "bad r value '" + item + "'");
    }
  }
  if (values.empty()) throw CLI::ValidationError("--r-list", "no r values given");
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Skew-robust load balancing for blocking-based entity resolution"};
  app.require_subcommand(1);

  InputOptions in;
  CommonOptions opts;
  std::string strategies_csv = "basic,blocksplit,pairrange";
  std::string r_list_csv = "1,2,4,8,16";
  std::string bdm_path;

  auto* gen = app.add_subcommand("gen", "generate a skewed CSV dataset");
  add_input_options(gen, in);
  gen->get_option("--input")->group("");  // gen only generates
  gen->add_option("--out", opts.out, "output CSV path (default stdout)");

  auto* analyze = app.add_subcommand("analyze", "compute the block distribution matrix");
  add_input_options(analyze, in);
  analyze->add_option("--r", opts.r, "reduce tasks for the analysis job")
      ->check(CLI::PositiveNumber);
  analyze->add_option("--workers", opts.workers, "physical parallelism")
      ->check(CLI::PositiveNumber);
  analyze->add_option("--out", opts.out, "output JSON path (default stdout)");

  auto* plan = app.add_subcommand("plan", "emit a strategy plan as JSON");
  add_input_options(plan, in);
  plan->add_option("--bdm", bdm_path, "use a previously emitted BDM JSON instead of a dataset");
  plan->add_option("--strategy", opts.strategy, "blocksplit|pairrange")->required();
  plan->add_option("--r", opts.r, "number of reduce tasks")->check(CLI::PositiveNumber);
  plan->add_option("--out", opts.out, "output JSON path (default stdout)");

  auto* run = app.add_subcommand("run", "run one strategy and emit its report");
  add_input_options(run, in);
  run->add_option("--strategy", opts.strategy, "basic|blocksplit|pairrange")->required();
  run->add_option("--r", opts.r, "number of reduce tasks")->check(CLI::PositiveNumber);
  run->add_option("--workers", opts.workers, "physical parallelism")
      ->check(CLI::PositiveNumber);
  run->add_option("--matcher", opts.matcher, "jaccard|null")
      ->check(CLI::IsMember({"jaccard", "null"}))
      ->capture_default_str();
  run->add_option("--threshold", opts.threshold, "match threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  run->add_option("--out", opts.out, "report JSON path (default stdout)");

  auto* bench = app.add_subcommand("bench", "sweep strategies over r values, emit CSV");
  add_input_options(bench, in);
  bench->add_option("--strategies", strategies_csv, "comma-separated strategy list")
      ->capture_default_str();
  bench->add_option("--r-list", r_list_csv, "comma-separated r values")->capture_default_str();
  bench->add_option("--matcher", opts.matcher, "jaccard|null")
      ->check(CLI::IsMember({"jaccard", "null"}))
      ->capture_default_str();
  bench->add_option("--threshold", opts.threshold, "match threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  bench->add_option("--out", opts.out, "output CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalidArgs;
  }

  try {
    if (gen->parsed()) {
      std::ostringstream csv;
      erlb::write_csv(acquire_dataset(in), csv);
      write_output(opts.out, csv.str());
      return 0;
    }

    if (analyze->parsed()) {
      const erlb::Dataset dataset = acquire_dataset(in);
      erlb::validate_dataset(dataset);
      const erlb::JobConfig config{in.gen.m, opts.r, opts.workers};
      const auto bdm = erlb::compute_bdm(dataset, config);
      write_output(opts.out, erlb::bdm_to_json(bdm).dump(2) + "\n");
      return 0;
    }

    if (plan->parsed()) {
      erlb::BlockDistributionMatrix bdm;
      if (!bdm_path.empty()) {
        std::ifstream f(bdm_path, std::ios::binary);
        if (!f) throw erlb::DataError("cannot open BDM file: " + bdm_path);
        nlohmann::json j;
        try {
          f >> j;
        } catch (const nlohmann::json::exception& e) {
          throw erlb::DataError("bad BDM JSON: " + std::string(e.what()));
        }
        bdm = erlb::bdm_from_json(j);
      } else {
        const erlb::Dataset dataset = acquire_dataset(in);
        erlb::validate_dataset(dataset);
        bdm = erlb::compute_bdm(dataset, erlb::JobConfig{in.gen.m, opts.r, opts.workers});
      }
      const erlb::StrategyKind strategy = parse_strategy(opts.strategy);
      if (strategy == erlb::StrategyKind::basic) {
        throw CLI::ValidationError("--strategy", "basic has no plan; it partitions by key hash");
      }
      if (strategy == erlb::StrategyKind::blocksplit) {
        const auto task_plan = erlb::blocksplit_plan(bdm, bdm.m, opts.r);
        write_output(opts.out, erlb::blocksplit_plan_to_json(bdm, task_plan, opts.r).dump(2) + "\n");
      } else {
        const auto table = erlb::compute_ranges(bdm.total_pairs, opts.r);
        write_output(opts.out, erlb::pairrange_table_to_json(table).dump(2) + "\n");
      }
      return 0;
    }

    if (run->parsed()) {
      const erlb::Dataset dataset = acquire_dataset(in);
      const erlb::JobConfig config{in.gen.m, opts.r, opts.workers};
      const auto result = erlb::run_strategy(parse_strategy(opts.strategy), dataset, config,
                                             parse_matcher(opts), false);
      write_output(opts.out, erlb::render_report(result.report));
      std::fprintf(stderr, "%s: %llu comparisons in %.1f ms (wall time, not in report)\n",
                   result.report.strategy.c_str(),
                   static_cast<unsigned long long>(result.report.total_comparisons),
                   result.report.wall_time_ms);
      return 0;
    }

    if (bench->parsed()) {
      const erlb::Dataset dataset = acquire_dataset(in);
      std::vector<erlb::StrategyKind> strategies;
      std::stringstream ss(strategies_csv);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!item.empty()) strategies.push_back(parse_strategy(item));
      }
      if (strategies.empty()) {
        throw CLI::ValidationError("--strategies", "no strategies given");
      }
      const auto rows =
          erlb::bench_sweep(dataset, strategies, parse_r_list(r_list_csv), parse_matcher(opts));
      write_output(opts.out, erlb::bench_csv(rows));
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidArgs;
  } catch (const erlb::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const erlb::InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kExitInvariantError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvariantError;
  }
  return 0;
}
