#pragma once

/// @file datagen.hpp
/// Deterministic skewed dataset generation and CSV ingestion.
///
/// Blocking keys are drawn from a Zipf(distinct_keys, zipf_s) distribution
/// via inverse CDF over precomputed cumulative weights: exact, deterministic
/// in the seed, no rejection loops. zipf_s = 0 degenerates to uniform.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "erlb/core.hpp"
#include "erlb/errors.hpp"

namespace erlb {

enum class Placement {
  round_robin,  ///< entity i goes to partition i mod m
  clustered     ///< same-key entities placed contiguously; stresses plans
                ///< that depend on the initial partitioning
};

struct GenSpec {
  std::uint64_t n = 0;
  std::uint64_t distinct_keys = 1;
  double zipf_s = 0.0;  ///< skew exponent, >= 0
  std::uint32_t m = 1;
  std::uint64_t seed = 0;
  std::uint32_t attr_len = 8;
  Placement placement = Placement::round_robin;
};

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits of one mt19937_64 draw.
/// Avoids std::uniform_real_distribution, whose output is not pinned by the
/// standard; this sequence is identical on every platform.
inline double next_unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::string zero_padded_key(std::uint64_t idx, int width) {
  std::string digits = std::to_string(idx);
  std::string out = "k";
  out.append(static_cast<std::size_t>(std::max<int>(0, width - static_cast<int>(digits.size()))),
             '0');
  out += digits;
  return out;
}

}  // namespace detail

inline Dataset generate(const GenSpec& spec) {
  if (spec.distinct_keys == 0) throw DataError("generate: distinct_keys must be >= 1");
  if (spec.m == 0) throw DataError("generate: m must be >= 1");
  if (spec.zipf_s < 0.0) throw DataError("generate: zipf_s must be >= 0");

  std::vector<double> cumulative(spec.distinct_keys);
  double acc = 0.0;
  for (std::uint64_t k = 0; k < spec.distinct_keys; ++k) {
    acc += std::pow(static_cast<double>(k + 1), -spec.zipf_s);
    cumulative[k] = acc;
  }

  const int key_width = static_cast<int>(std::to_string(spec.distinct_keys - 1).size());
  std::mt19937_64 rng(spec.seed);

  std::vector<Entity> entities;
  entities.reserve(spec.n);
  for (std::uint64_t i = 0; i < spec.n; ++i) {
    const double u = detail::next_unit_double(rng) * acc;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::uint64_t key_idx =
        std::min<std::uint64_t>(static_cast<std::uint64_t>(it - cumulative.begin()),
                                spec.distinct_keys - 1);
    std::string attr(spec.attr_len, 'a');
    for (char& c : attr) c = static_cast<char>('a' + rng() % 26);
    entities.push_back(Entity{i, 0, detail::zero_padded_key(key_idx, key_width), {std::move(attr)}});
  }

  Dataset dataset(spec.m);
  if (spec.placement == Placement::round_robin) {
    for (auto& e : entities) {
      const auto p = static_cast<std::uint32_t>(e.id % spec.m);
      e.partition = p;
      dataset[p].push_back(std::move(e));
    }
  } else {
    std::stable_sort(entities.begin(), entities.end(), [](const Entity& a, const Entity& b) {
      if (a.key != b.key) return a.key < b.key;
      return a.id < b.id;
    });
    const std::uint64_t chunk = (spec.n + spec.m - 1) / spec.m;  // ceil; last chunk shorter
    for (std::uint64_t i = 0; i < entities.size(); ++i) {
      const auto p = static_cast<std::uint32_t>(chunk == 0 ? 0 : i / chunk);
      entities[i].partition = p;
      dataset[p].push_back(std::move(entities[i]));
    }
  }
  return dataset;
}

// --- CSV ----------------------------------------------------------------------

namespace detail {

/// RFC-4180-style reader: comma separated, double-quote escaping, quoted
/// fields may contain commas, quotes and newlines. Returns false at EOF.
/// line_number tracks the line the record started on, for error messages.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& fields,
                            std::uint64_t& line_number, std::uint64_t& next_line) {
  fields.clear();
  int c = in.get();
  // Skip a trailing blank line at EOF.
  if (c == std::istream::traits_type::eof()) return false;
  line_number = next_line;
  std::string field;
  bool in_quotes = false;
  bool any = false;
  for (;;) {
    if (c == std::istream::traits_type::eof()) {
      if (in_quotes) {
        throw DataError("csv line " + std::to_string(line_number) + ": unterminated quote");
      }
      if (!any && field.empty() && fields.empty()) return false;
      fields.push_back(std::move(field));
      return true;
    }
    const char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++next_line;
        field.push_back(ch);
      }
    } else if (ch == '"' && field.empty()) {
      in_quotes = true;
      any = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (ch == '\n') {
      ++next_line;
      if (!field.empty() || !fields.empty() || any) {
        fields.push_back(std::move(field));
        return true;
      }
      // blank line: keep scanning
      line_number = next_line;
    } else if (ch != '\r') {
      field.push_back(ch);
      any = true;
    }
    c = in.get();
  }
}

inline void write_csv_field(std::ostream& out, std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace detail

/// Rows become entities: the blocking key is read from key_column, every
/// other column becomes an attribute in file order. Ids are assigned
/// sequentially and rows are dealt round-robin into m partitions.
inline Dataset load_csv(std::istream& in, const std::string& key_column, std::uint32_t m) {
  if (m == 0) throw DataError("load_csv: m must be >= 1");

  std::vector<std::string> header;
  std::uint64_t line = 0;
  std::uint64_t next_line = 1;
  if (!detail::read_csv_record(in, header, line, next_line)) {
    throw DataError("csv: missing header row");
  }
  const auto key_it = std::find(header.begin(), header.end(), key_column);
  if (key_it == header.end()) {
    throw DataError("csv: key column '" + key_column + "' not found in header");
  }
  const std::size_t key_idx = static_cast<std::size_t>(key_it - header.begin());

  Dataset dataset(m);
  std::vector<std::string> fields;
  EntityId id = 0;
  while (detail::read_csv_record(in, fields, line, next_line)) {
    if (fields.size() != header.size()) {
      throw DataError("csv line " + std::to_string(line) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    Entity e;
    e.id = id;
    e.partition = static_cast<std::uint32_t>(id % m);
    e.key = std::move(fields[key_idx]);
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i != key_idx) e.attrs.push_back(std::move(fields[i]));
    }
    dataset[e.partition].push_back(std::move(e));
    ++id;
  }
  return dataset;
}

inline Dataset load_csv_file(const std::string& path, const std::string& key_column,
                             std::uint32_t m) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input file: " + path);
  return load_csv(in, key_column, m);
}

/// Writes "key,attr_0,...,attr_{k-1}" rows in ascending entity-id order, so
/// that loading the file back with round-robin placement reproduces the
/// blocks of a round-robin dataset exactly.
inline void write_csv(const Dataset& dataset, std::ostream& out) {
  std::vector<const Entity*> by_id;
  std::size_t max_attrs = 0;
  for (const auto& part : dataset) {
    for (const auto& e : part) {
      by_id.push_back(&e);
      max_attrs = std::max(max_attrs, e.attrs.size());
    }
  }
  std::sort(by_id.begin(), by_id.end(),
            [](const Entity* a, const Entity* b) { return a->id < b->id; });

  out << "key";
  for (std::size_t i = 0; i < max_attrs; ++i) out << ",attr_" << i;
  out << '\n';
  for (const Entity* e : by_id) {
    detail::write_csv_field(out, e->key);
    for (std::size_t i = 0; i < max_attrs; ++i) {
      out << ',';
      if (i < e->attrs.size()) detail::write_csv_field(out, e->attrs[i]);
    }
    out << '\n';
  }
}

inline void write_csv_file(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open output file: " + path);
  write_csv(dataset, out);
  if (!out) throw DataError("failed writing output file: " + path);
}

}  // namespace erlb
