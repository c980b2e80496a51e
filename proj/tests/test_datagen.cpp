#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <sstream>

#include "erlb/datagen.hpp"
#include "oracles.hpp"

using namespace erlb;

namespace {

std::map<std::string, std::uint64_t> key_frequencies(const Dataset& d) {
  std::map<std::string, std::uint64_t> freq;
  for (const auto& part : d) {
    for (const auto& e : part) ++freq[e.key];
  }
  return freq;
}

double max_key_share(const Dataset& d, std::uint64_t n) {
  std::uint64_t max = 0;
  for (const auto& [key, count] : key_frequencies(d)) max = std::max(max, count);
  return static_cast<double>(max) / static_cast<double>(n);
}

}  // namespace

TEST_CASE("generate basics") {
  SECTION("n = 0 gives m empty partitions") {
    const auto d = generate({0, 5, 1.0, 3, 7, 8, Placement::round_robin});
    REQUIRE(d.size() == 3);
    for (const auto& part : d) CHECK(part.empty());
  }

  SECTION("deterministic in the seed") {
    const GenSpec spec{500, 20, 0.8, 4, 123, 6, Placement::round_robin};
    CHECK(generate(spec) == generate(spec));
  }

  SECTION("round_robin deals by id") {
    const auto d = generate({10, 3, 0.0, 3, 1, 4, Placement::round_robin});
    for (std::size_t p = 0; p < d.size(); ++p) {
      for (const auto& e : d[p]) {
        CHECK(e.id % 3 == p);
        CHECK(e.partition == p);
      }
    }
    CHECK_NOTHROW(validate_dataset(d));
  }

  SECTION("clustered placement keeps same-key entities contiguous") {
    const auto d = generate({200, 6, 0.5, 4, 11, 4, Placement::clustered});
    CHECK_NOTHROW(validate_dataset(d));
    // chunks of a globally key-sorted sequence: keys ascend within each
    // partition and across partition boundaries
    std::string last;
    for (const auto& part : d) {
      for (const auto& e : part) {
        CHECK(last <= e.key);
        last = e.key;
      }
    }
    // multiset of entities matches the round-robin dataset of the same spec
    auto clustered_freq = key_frequencies(d);
    auto rr = generate({200, 6, 0.5, 1, 11, 4, Placement::round_robin});
    CHECK(clustered_freq == key_frequencies(rr));
  }

  SECTION("invalid specs are data errors") {
    CHECK_THROWS_AS(generate({1, 0, 0.0, 1, 0, 4, Placement::round_robin}), DataError);
    CHECK_THROWS_AS(generate({1, 1, 0.0, 0, 0, 4, Placement::round_robin}), DataError);
    CHECK_THROWS_AS(generate({1, 1, -0.5, 1, 0, 4, Placement::round_robin}), DataError);
  }
}

TEST_CASE("zipf_s = 0 degenerates to uniform") {
  const auto d = generate({4000, 4, 0.0, 1, 1, 8, Placement::round_robin});
  const auto freq = key_frequencies(d);
  REQUIRE(freq.size() == 4);
  // observed counts for seed 1, recorded once: within 10% of 1000
  CHECK(freq.at("k0") == 944);
  CHECK(freq.at("k1") == 1010);
  CHECK(freq.at("k2") == 994);
  CHECK(freq.at("k3") == 1052);
  for (const auto& [key, count] : freq) {
    CHECK(count >= 900);
    CHECK(count <= 1100);
  }
}

TEST_CASE("larger zipf_s concentrates the largest block") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    double previous = 0.0;
    for (double s : {0.0, 0.5, 1.0, 1.5}) {
      const auto d = generate({5000, 100, s, 1, seed, 4, Placement::round_robin});
      const double share = max_key_share(d, 5000);
      CHECK(share > previous);
      previous = share;
    }
  }
}

TEST_CASE("csv round trip reproduces the dataset") {
  const auto d = generate({300, 15, 1.0, 3, 77, 5, Placement::round_robin});
  std::stringstream buffer;
  write_csv(d, buffer);
  const auto loaded = load_csv(buffer, "key", 3);
  CHECK(loaded == d);
}

TEST_CASE("load_csv basics") {
  SECTION("three rows into two partitions") {
    std::stringstream in("key,attr_0\na,x\nb,y\na,z\n");
    const auto d = load_csv(in, "key", 2);
    REQUIRE(d.size() == 2);
    CHECK(d[0].size() == 2);
    CHECK(d[1].size() == 1);
    CHECK(d[0][0].id == 0);
    CHECK(d[1][0].id == 1);
    CHECK(d[0][1].id == 2);
    CHECK(d[0][1].attrs == std::vector<std::string>{"z"});
  }

  SECTION("header only gives m empty partitions") {
    std::stringstream in("key,attr_0\n");
    const auto d = load_csv(in, "key", 4);
    REQUIRE(d.size() == 4);
    for (const auto& part : d) CHECK(part.empty());
  }

  SECTION("key column may sit anywhere") {
    std::stringstream in("name,key,age\nalice,a,30\n");
    const auto d = load_csv(in, "key", 1);
    CHECK(d[0][0].key == "a");
    CHECK(d[0][0].attrs == std::vector<std::string>{"alice", "30"});
  }

  SECTION("missing key column names the column") {
    std::stringstream in("id,name\n1,x\n");
    CHECK_THROWS_WITH(load_csv(in, "key", 1),
                      Catch::Matchers::ContainsSubstring("'key'"));
  }

  SECTION("malformed row reports the line number") {
    std::stringstream in("key,attr_0\na,x\nb\n");
    CHECK_THROWS_WITH(load_csv(in, "key", 1), Catch::Matchers::ContainsSubstring("line 3"));
  }

  SECTION("unterminated quote reports the line number") {
    std::stringstream in("key,attr_0\na,\"oops\n");
    CHECK_THROWS_AS(load_csv(in, "key", 1), DataError);
  }

  SECTION("quoted fields: commas, escaped quotes, embedded newlines") {
    std::stringstream in("key,attr_0\n\"a,b\",\"say \"\"hi\"\"\"\nc,\"two\nlines\"\n");
    const auto d = load_csv(in, "key", 1);
    REQUIRE(d[0].size() == 2);
    CHECK(d[0][0].key == "a,b");
    CHECK(d[0][0].attrs == std::vector<std::string>{"say \"hi\""});
    CHECK(d[0][1].attrs == std::vector<std::string>{"two\nlines"});
  }
}

TEST_CASE("write_csv quotes what needs quoting") {
  Dataset d(1);
  d[0] = {{0, 0, "a,b", {"plain", "with \"quote\""}}};
  std::stringstream buffer;
  write_csv(d, buffer);
  CHECK(buffer.str() == "key,attr_0,attr_1\n\"a,b\",plain,\"with \"\"quote\"\"\"\n");
  buffer.seekg(0);
  const auto loaded = load_csv(buffer, "key", 1);
  CHECK(loaded == d);
}
