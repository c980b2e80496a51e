#pragma once

/// @file matching.hpp
/// Pluggable pairwise comparator. The default similarity is Jaccard over
/// character trigrams of one designated attribute; the null matcher scores
/// everything 0 at constant cost, which removes matcher variance from pure
/// load-balancing benchmarks.

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "erlb/core.hpp"

namespace erlb {

enum class MatcherKind { jaccard, null };

inline std::string_view matcher_name(MatcherKind kind) {
  return kind == MatcherKind::jaccard ? "jaccard" : "null";
}

struct MatcherConfig {
  MatcherKind kind = MatcherKind::jaccard;
  std::size_t attr_index = 0;  ///< attribute the similarity reads
  double threshold = 0.8;
};

struct MatchDecision {
  Pair pair;
  double similarity = 0.0;
  bool is_match = false;
  bool flagged = false;  ///< designated attribute missing on either side

  friend bool operator==(const MatchDecision&, const MatchDecision&) = default;
};

namespace detail {

/// Character trigrams packed into 24 bits each, sorted and deduplicated.
inline std::vector<std::uint32_t> trigram_set(std::string_view s) {
  std::vector<std::uint32_t> grams;
  if (s.size() >= 3) {
    grams.reserve(s.size() - 2);
    for (std::size_t i = 0; i + 3 <= s.size(); ++i) {
      grams.push_back((static_cast<std::uint32_t>(static_cast<unsigned char>(s[i])) << 16) |
                      (static_cast<std::uint32_t>(static_cast<unsigned char>(s[i + 1])) << 8) |
                      static_cast<std::uint32_t>(static_cast<unsigned char>(s[i + 2])));
    }
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
  }
  return grams;
}

}  // namespace detail

/// |A ∩ B| / |A ∪ B| over trigram sets. Identical strings score 1.0 even
/// when too short to produce a trigram; otherwise an empty set on either
/// side scores 0.0.
inline double jaccard_trigram_similarity(std::string_view a, std::string_view b) {
  if (a == b) return 1.0;
  const auto ga = detail::trigram_set(a);
  const auto gb = detail::trigram_set(b);
  if (ga.empty() || gb.empty()) return 0.0;
  std::size_t inter = 0;
  auto ia = ga.begin();
  auto ib = gb.begin();
  while (ia != ga.end() && ib != gb.end()) {
    if (*ia == *ib) {
      ++inter;
      ++ia;
      ++ib;
    } else if (*ia < *ib) {
      ++ia;
    } else {
      ++ib;
    }
  }
  const std::size_t uni = ga.size() + gb.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Symmetric, deterministic comparison. The pair records the ids in argument
/// order; callers pass entities in canonical order.
inline MatchDecision compare(const Entity& a, const Entity& b, const MatcherConfig& cfg) {
  MatchDecision d;
  d.pair = {a.id, b.id};
  if (cfg.kind == MatcherKind::null) {
    d.similarity = 0.0;
  } else if (cfg.attr_index >= a.attrs.size() || cfg.attr_index >= b.attrs.size()) {
    d.similarity = 0.0;
    d.flagged = true;
  } else {
    d.similarity = jaccard_trigram_similarity(a.attrs[cfg.attr_index], b.attrs[cfg.attr_index]);
  }
  d.is_match = d.similarity >= cfg.threshold;
  return d;
}

}  // namespace erlb
