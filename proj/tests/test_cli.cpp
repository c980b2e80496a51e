#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;

const char* cli_path() { return std::getenv("ERLB_CLI"); }

struct Invocation {
  int exit_code = -1;
  std::string stdout_text;
};

Invocation run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path out = fs::temp_directory_path() / ("erlb_cli_test_" + std::to_string(counter++));
  const std::string command =
      std::string(cli_path()) + " " + args + " > " + out.string() + " 2> /dev/null";
  const int status = std::system(command.c_str());
  Invocation result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  result.stdout_text = buffer.str();
  fs::remove(out);
  return result;
}

}  // namespace

TEST_CASE("cli end to end") {
  if (cli_path() == nullptr) {
    SKIP("ERLB_CLI not set");
  }
  const fs::path dir = fs::temp_directory_path() / "erlb_cli_suite";
  fs::create_directories(dir);
  const std::string dataset = (dir / "data.csv").string();
  REQUIRE(run_cli("gen --n 300 --distinct-keys 10 --zipf-s 1.0 --m 2 --seed 7 --out " + dataset)
              .exit_code == 0);

  SECTION("gen writes a deterministic csv") {
    const std::string flags = "gen --n 200 --distinct-keys 12 --zipf-s 1.0 --m 3 --seed 4";
    const auto first = run_cli(flags);
    REQUIRE(first.exit_code == 0);
    CHECK(first.stdout_text.starts_with("key,attr_0\n"));
    const auto second = run_cli(flags);
    CHECK(second.stdout_text == first.stdout_text);
  }

  SECTION("analyze, plan, run pipeline") {
    const auto analyzed = run_cli("analyze --input " + dataset + " --m 2 --r 2");
    REQUIRE(analyzed.exit_code == 0);
    const auto bdm = nlohmann::json::parse(analyzed.stdout_text);
    CHECK(bdm.at("m") == 2);
    CHECK(bdm.at("entity_total") == 300);

    const std::string bdm_path = (dir / "bdm.json").string();
    REQUIRE(run_cli("analyze --input " + dataset + " --m 2 --out " + bdm_path).exit_code == 0);

    const auto split_plan = run_cli("plan --strategy blocksplit --bdm " + bdm_path + " --r 4");
    REQUIRE(split_plan.exit_code == 0);
    const auto plan_json = nlohmann::json::parse(split_plan.stdout_text);
    CHECK(plan_json.at("strategy") == "blocksplit");
    CHECK(plan_json.at("per_reduce_load").size() == 4);

    const auto range_plan = run_cli("plan --strategy pairrange --input " + dataset +
                                    " --m 2 --r 4");
    REQUIRE(range_plan.exit_code == 0);
    CHECK(nlohmann::json::parse(range_plan.stdout_text).at("boundaries").size() == 4);

    std::uint64_t total = 0;
    for (const std::string strategy : {"basic", "blocksplit", "pairrange"}) {
      const auto run = run_cli("run --strategy " + strategy + " --input " + dataset +
                               " --m 2 --r 4 --workers 2 --matcher null");
      REQUIRE(run.exit_code == 0);
      const auto report = nlohmann::json::parse(run.stdout_text);
      CHECK(report.at("strategy") == strategy);
      CHECK_FALSE(report.contains("wall_time_ms"));
      if (total == 0) {
        total = report.at("total_comparisons").get<std::uint64_t>();
      } else {
        CHECK(report.at("total_comparisons").get<std::uint64_t>() == total);
      }
    }
  }

  SECTION("run twice is byte identical") {
    const std::string flags =
        "run --strategy pairrange --n 400 --distinct-keys 20 --zipf-s 1.0 --m 2 --seed 3 "
        "--r 4 --workers 4 --matcher jaccard";
    const auto first = run_cli(flags);
    const auto second = run_cli(flags);
    REQUIRE(first.exit_code == 0);
    CHECK(first.stdout_text == second.stdout_text);
  }

  SECTION("bench emits the documented csv header") {
    const auto bench = run_cli(
        "bench --n 300 --distinct-keys 10 --zipf-s 1.0 --m 2 --seed 5 --r-list 1,2,4 "
        "--strategies basic,pairrange --matcher null");
    REQUIRE(bench.exit_code == 0);
    CHECK(bench.stdout_text.starts_with("strategy,r,imbalance,replication,makespan,speedup\n"));
    // header + 2 strategies x 3 r values
    CHECK(std::count(bench.stdout_text.begin(), bench.stdout_text.end(), '\n') == 7);
  }

  SECTION("exit codes") {
    CHECK(run_cli("run --strategy nope --n 10").exit_code == 2);
    CHECK(run_cli("plan --strategy basic --n 10 --m 1").exit_code == 2);
    CHECK(run_cli("nonsense").exit_code == 2);
    CHECK(run_cli("run --strategy basic --input /does/not/exist.csv --m 1").exit_code == 3);
    CHECK(run_cli("analyze --input " + dataset + " --key-column missing --m 2").exit_code == 3);
    CHECK(run_cli("--help").exit_code == 0);
  }

  fs::remove_all(dir);
}
