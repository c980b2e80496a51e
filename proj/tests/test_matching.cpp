#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "erlb/matching.hpp"
#include "erlb/report.hpp"
#include "oracles.hpp"

using namespace erlb;

namespace {

Entity with_attr(EntityId id, std::string attr) {
  return {id, 0, "k", {std::move(attr)}};
}

}  // namespace

TEST_CASE("jaccard trigram similarity") {
  const MatcherConfig cfg;

  SECTION("identical attribute strings score 1.0") {
    CHECK(compare(with_attr(0, "hello world"), with_attr(1, "hello world"), cfg).similarity == 1.0);
    CHECK(compare(with_attr(0, "ab"), with_attr(1, "ab"), cfg).similarity == 1.0);
    CHECK(compare(with_attr(0, ""), with_attr(1, ""), cfg).similarity == 1.0);
  }

  SECTION("disjoint trigram sets score 0.0") {
    CHECK(compare(with_attr(0, "aaaa"), with_attr(1, "bbbb"), cfg).similarity == 0.0);
  }

  SECTION("abcd vs abce: one shared trigram of three") {
    const auto d = compare(with_attr(0, "abcd"), with_attr(1, "abce"), cfg);
    CHECK(d.similarity == 1.0 / 3.0);
    CHECK_FALSE(d.is_match);  // 1/3 < 0.8
    CHECK_FALSE(d.flagged);
  }

  SECTION("too-short distinct strings score 0.0") {
    CHECK(compare(with_attr(0, "ab"), with_attr(1, "cd"), cfg).similarity == 0.0);
    CHECK(compare(with_attr(0, "ab"), with_attr(1, "abcd"), cfg).similarity == 0.0);
  }

  SECTION("symmetric and deterministic on random strings") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      std::string a(rng() % 10, 'a');
      std::string b(rng() % 10, 'a');
      for (char& c : a) c = static_cast<char>('a' + rng() % 5);
      for (char& c : b) c = static_cast<char>('a' + rng() % 5);
      const double ab = jaccard_trigram_similarity(a, b);
      CHECK(ab == jaccard_trigram_similarity(b, a));
      CHECK(ab >= 0.0);
      CHECK(ab <= 1.0);
      CHECK(ab == jaccard_trigram_similarity(a, b));
    }
  }
}

TEST_CASE("missing designated attribute flags the decision") {
  const MatcherConfig cfg{MatcherKind::jaccard, 2, 0.8};
  const auto d = compare(with_attr(0, "abc"), with_attr(1, "abc"), cfg);
  CHECK(d.similarity == 0.0);
  CHECK(d.flagged);
  CHECK_FALSE(d.is_match);
}

TEST_CASE("is_match follows the threshold exactly") {
  MatcherConfig cfg;
  cfg.threshold = 1.0;
  CHECK(compare(with_attr(0, "same"), with_attr(1, "same"), cfg).is_match);
  cfg.threshold = 0.0;
  CHECK(compare(with_attr(0, "xxxx"), with_attr(1, "yyyy"), cfg).is_match);  // 0.0 >= 0.0
}

TEST_CASE("null matcher scores zero everywhere") {
  const MatcherConfig cfg{MatcherKind::null, 0, 0.8};
  const auto d = compare(with_attr(0, "same"), with_attr(1, "same"), cfg);
  CHECK(d.similarity == 0.0);
  CHECK_FALSE(d.is_match);
  CHECK_FALSE(d.flagged);
}

TEST_CASE("decision set is strategy independent") {
  std::mt19937_64 rng(6);
  const MatcherConfig matcher;  // jaccard, threshold 0.8
  for (int trial = 0; trial < 8; ++trial) {
    const std::uint32_t m = 1 + static_cast<std::uint32_t>(rng() % 3);
    const std::uint32_t r = 1 + static_cast<std::uint32_t>(rng() % 6);
    const Dataset d = testutil::random_dataset(rng, 250, 12, m);

    using DecisionKey = std::tuple<EntityId, EntityId, double, bool, bool>;
    const auto decisions = [](const JobResult<MatchDecision>& job) {
      std::set<DecisionKey> out;
      for (const auto& task : job.outputs) {
        for (const auto& dec : task) {
          const auto [a, b] = testutil::normalized(dec.pair.a, dec.pair.b);
          out.insert({a, b, dec.similarity, dec.is_match, dec.flagged});
        }
      }
      return out;
    };

    const JobConfig cfg{m, r, 2};
    const auto basic = decisions(run_strategy(StrategyKind::basic, d, cfg, matcher).job);
    const auto split = decisions(run_strategy(StrategyKind::blocksplit, d, cfg, matcher).job);
    const auto range = decisions(run_strategy(StrategyKind::pairrange, d, cfg, matcher).job);
    CHECK(basic == split);
    CHECK(basic == range);
  }
}
