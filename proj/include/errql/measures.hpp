#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "errql/diagnostics.hpp"
#include "errql/ingest.hpp"

namespace errql {

enum class Measure { EC, EQ, RED };

std::string to_string(Measure m);

// One entry of an outcome sequence: a successful event, or a failing one
// carrying the canonical type of its first error plus the total number of
// errors reported in that event.
struct OutcomeEntry {
  bool failure = false;
  ErrorType first_error;       // meaningful iff failure
  int error_count_in_event = 0;  // >= 1 iff failure

  static OutcomeEntry success() { return {}; }
  static OutcomeEntry fail(ErrorType type, int count = 1) {
    return {true, std::move(type), count};
  }
};

// Time-ordered per (student, assignment, kind) event sequence; the input
// to all three measures. `session_boundaries` holds positions k meaning a
// session break between events[k-1] and events[k].
struct OutcomeSequence {
  ErrorKind kind = ErrorKind::Compiler;
  std::vector<OutcomeEntry> events;
  std::vector<std::size_t> session_boundaries;
};

// Maximal blocks of consecutive failures sharing one error type. Only
// blocks of length >= 2 are kept; each contributes r = length-1 to RED.
struct Run {
  ErrorType error_type;
  std::size_t length = 0;  // >= 2
};

struct RunSummary {
  std::vector<Run> runs;
};

struct MeasureValue {
  Measure measure = Measure::EC;
  ErrorKind kind = ErrorKind::Compiler;
  double value = 0.0;
};

// Per-pair EQ scoring constants: both events failing scores `both_fail`,
// plus `same_type` when the first errors match; each pair is normalized
// by both_fail + same_type.
struct EqWeights {
  double both_fail = 8.0;
  double same_type = 3.0;
};

struct MeasureOptions {
  EqWeights eq_weights;
  // When set, EQ pairs spanning a session boundary are excluded from the
  // pair count and RED runs break at boundaries. Default: boundaries are
  // recorded but inert (one continuous sequence per student/assignment).
  bool reset_per_session = false;
};

// EC: total errors across all failing events.
MeasureValue error_count(const OutcomeSequence& seq);

// EQ: mean normalized pair score over consecutive event pairs; 0 when the
// sequence has fewer than two events (or no countable pairs).
MeasureValue error_quotient(const OutcomeSequence& seq, const MeasureOptions& opts = {});

// RED: sum of r^2/(r+1) over maximal same-type failure runs, r = length-1.
MeasureValue repeated_error_density(const OutcomeSequence& seq,
                                    const MeasureOptions& opts = {});

RunSummary run_summary(const OutcomeSequence& seq, const MeasureOptions& opts = {});

// All six (measure, kind) values of one (student, assignment) cell.
struct MeasureSet {
  double values[2][3] = {};  // [ErrorKind][Measure]

  double& at(ErrorKind kind, Measure m) {
    return values[static_cast<int>(kind)][static_cast<int>(m)];
  }
  double at(ErrorKind kind, Measure m) const {
    return values[static_cast<int>(kind)][static_cast<int>(m)];
  }
};

struct StudentMeasures {
  std::map<CohortKey, MeasureSet> cells;
  // Cells that had zero snapshots and were zero-filled.
  std::vector<CohortKey> coverage_flags;

  // Value for a cell; absent cells read as 0 (zero-snapshot convention).
  double value(const std::string& student_id, int assignment, Measure m,
               ErrorKind kind) const;
};

// Builds the compiler-stream sequence (every valid snapshot; failure iff
// it did not compile) and the runtime-stream sequence (compiled snapshots
// only; failure iff a runtime trace is present). Session boundaries carry
// over, remapped for the runtime subsequence.
struct SequencePair {
  OutcomeSequence compiler;
  OutcomeSequence runtime;
};
SequencePair build_outcome_sequences(const EventStream& stream);

// Computes all six values for every (student, assignment) cell of the
// cohort grid; students absent from an assignment get zeros plus a
// coverage flag.
StudentMeasures compute_measures(const Cohort& cohort, const MeasureOptions& opts = {});

// CSV export: student_id,assignment,measure,kind,value.
void write_measures_csv(std::ostream& out, const StudentMeasures& measures);

}  // namespace errql
