// Test-only brute-force scorers for EC/EQ/RED, written against the
// definitions directly (integer pair enumeration for EQ, explicit run
// extraction for RED). Kept independent of the measures module on
// purpose: these are the oracles the implementation is compared against.
#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "errql/measures.hpp"
#include "errql/rng.hpp"

namespace errql::testing {

inline bool boundary_at(const OutcomeSequence& seq, std::size_t pos) {
  return std::find(seq.session_boundaries.begin(), seq.session_boundaries.end(), pos) !=
         seq.session_boundaries.end();
}

inline long long oracle_ec(const OutcomeSequence& seq) {
  long long total = 0;
  for (const auto& e : seq.events) {
    if (e.failure) total += e.error_count_in_event;
  }
  return total;
}

// Exact rational pair scoring: numerator and denominator as integers.
inline long double oracle_eq(const OutcomeSequence& seq, bool reset = false,
                             long long both_fail = 8, long long same_type = 3) {
  long long numerator = 0;
  long long pairs = 0;
  for (std::size_t i = 0; i + 1 < seq.events.size(); ++i) {
    const std::size_t pair_pos = i + 1;  // boundary index between i and i+1
    if (reset && boundary_at(seq, pair_pos)) continue;
    ++pairs;
    const auto& a = seq.events[i];
    const auto& b = seq.events[i + 1];
    if (!a.failure || !b.failure) continue;
    numerator += both_fail;
    if (a.first_error == b.first_error) numerator += same_type;
  }
  if (pairs == 0) return 0.0L;
  return static_cast<long double>(numerator) /
         (static_cast<long double>(both_fail + same_type) * static_cast<long double>(pairs));
}

// Explicit run extraction: collect (start, end) spans, then score.
inline long double oracle_red(const OutcomeSequence& seq, bool reset = false) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // [start, end)
  std::size_t i = 0;
  const std::size_t n = seq.events.size();
  while (i < n) {
    if (!seq.events[i].failure) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < n && seq.events[j].failure &&
           seq.events[j].first_error == seq.events[i].first_error &&
           !(reset && boundary_at(seq, j))) {
      ++j;
    }
    spans.emplace_back(i, j);
    i = j;
  }
  long double total = 0.0L;
  for (const auto& [start, end] : spans) {
    const std::size_t len = end - start;
    if (len < 2) continue;
    const long double r = static_cast<long double>(len - 1);
    total += r * r / (r + 1.0L);
  }
  return total;
}

// Seeded random sequences: length <= max_len, up to n_types error types,
// boundaries sprinkled between events.
inline OutcomeSequence random_sequence(Rng& rng, std::size_t max_len = 50, int n_types = 4,
                                       ErrorKind kind = ErrorKind::Compiler,
                                       double boundary_rate = 0.1) {
  OutcomeSequence seq;
  seq.kind = kind;
  const std::size_t len = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(max_len)));
  for (std::size_t i = 0; i < len; ++i) {
    if (rng.bernoulli(0.6)) {
      const int type = static_cast<int>(rng.uniform_int(0, n_types - 1));
      seq.events.push_back(OutcomeEntry::fail(
          {kind, "type" + std::to_string(type)}, static_cast<int>(rng.uniform_int(1, 3))));
    } else {
      seq.events.push_back(OutcomeEntry::success());
    }
    if (i > 0 && rng.bernoulli(boundary_rate)) seq.session_boundaries.push_back(i);
  }
  return seq;
}

}  // namespace errql::testing
