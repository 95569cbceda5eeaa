#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "errql/time.hpp"

namespace errql {

// One autograded code snapshot as captured by the course IDE after an idle
// period. Raw diagnostic strings are preserved byte-for-byte; parsing into
// canonical error types happens downstream.
struct SnapshotEvent {
  std::string student_id;
  int assignment = 0;  // homework label, 3..8
  Timestamp timestamp;
  std::string snapshot_id;
  bool valid = false;      // assignment requirements satisfied
  bool compile_ok = false;
  std::vector<std::string> compiler_diagnostics;  // nonempty iff !compile_ok
  std::vector<std::string> runtime_traces;        // empty unless compile_ok
  std::int64_t tests_passed = 0;
  std::int64_t tests_failed = 0;
};

constexpr int kFirstAssignment = 3;
constexpr int kLastAssignment = 8;

// Throws ValidationError naming the violated invariant. `locus` is folded
// into the message (file/line of the source record).
void check_event_invariants(const SnapshotEvent& event, const std::string& locus);

struct GradeRow {
  std::optional<double> exam1;  // percent, [0,100]
  std::optional<double> exam2;
  std::map<int, double> hw_points;  // hw 3..8, non-negative
};

struct GradeBook {
  std::map<std::string, GradeRow> rows;

  bool has_both_exams(const std::string& student_id) const;
  // Students eligible for modeling (both exams present), sorted by id.
  std::vector<std::string> modeling_students() const;
  // (student_id, reason) for students excluded from modeling.
  std::vector<std::pair<std::string, std::string>> skip_report() const;
};

struct CohortKey {
  std::string student_id;
  int assignment = 0;

  auto operator<=>(const CohortKey&) const = default;
};

// Per (student, assignment) event list after sessionize. `boundaries`
// holds positions k meaning: the idle gap between events[k-1] and
// events[k] exceeded the threshold. Positions are in 1..size()-1.
struct EventStream {
  std::vector<SnapshotEvent> events;
  std::vector<std::size_t> boundaries;
};

struct Provenance {
  std::string path;
  std::string digest;  // fnv1a-64 of the file bytes, hex
};

struct Cohort {
  std::map<CohortKey, EventStream> streams;
  GradeBook grades;
  std::vector<Provenance> provenance;
  std::vector<std::string> warnings;  // duplicate-id drops etc.

  std::size_t total_events() const;
  std::vector<std::string> students() const;       // sorted, distinct
  std::vector<int> assignments() const;            // sorted, distinct
  // Flattens all streams back into one event list (used for idempotence
  // checks and re-export).
  std::vector<SnapshotEvent> all_events() const;
};

enum class EventFormat { Jsonl, Csv };

// One SnapshotEvent per record. Errors carry the line number and field.
std::vector<SnapshotEvent> load_events(const std::string& path, EventFormat format);

// Flat export consumed by load_events(..., Csv). The two list-valued
// columns hold JSON-encoded string arrays.
void write_events_csv(std::ostream& out, const std::vector<SnapshotEvent>& events);
void write_events_jsonl(std::ostream& out, const std::vector<SnapshotEvent>& events);

// Header: student_id,exam1,exam2,hw3,...,hw8. Empty exam cells mark the
// student as not modelable (kept in the skip report); empty hw cells
// load as 0 points.
GradeBook load_grades(const std::string& path);

constexpr Duration kDefaultIdleGap = std::chrono::minutes{10};

// Drops invalid snapshots, dedups by snapshot_id (first kept, warning
// emitted), orders by (timestamp, snapshot_id) and records session
// boundaries at gaps strictly greater than `idle_gap`.
Cohort sessionize(const std::vector<SnapshotEvent>& events,
                  Duration idle_gap = kDefaultIdleGap);

std::string fnv1a_digest_file(const std::string& path);

}  // namespace errql
