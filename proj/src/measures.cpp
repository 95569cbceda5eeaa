#include "errql/measures.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <set>

#include "errql/csv.hpp"
#include "errql/errors.hpp"

namespace errql {

std::string to_string(Measure m) {
  switch (m) {
    case Measure::EC: return "EC";
    case Measure::EQ: return "EQ";
    case Measure::RED: return "RED";
  }
  return "?";
}

namespace {

bool has_boundary(const OutcomeSequence& seq, std::size_t pos) {
  return std::find(seq.session_boundaries.begin(), seq.session_boundaries.end(), pos) !=
         seq.session_boundaries.end();
}

}  // namespace

MeasureValue error_count(const OutcomeSequence& seq) {
  double total = 0.0;
  for (const auto& e : seq.events) {
    if (e.failure) total += e.error_count_in_event;
  }
  return {Measure::EC, seq.kind, total};
}

MeasureValue error_quotient(const OutcomeSequence& seq, const MeasureOptions& opts) {
  const double per_pair_max = opts.eq_weights.both_fail + opts.eq_weights.same_type;
  if (per_pair_max <= 0.0) throw ConfigError("EQ weights must sum to a positive value");

  double score_sum = 0.0;
  std::size_t pair_count = 0;
  for (std::size_t i = 1; i < seq.events.size(); ++i) {
    if (opts.reset_per_session && has_boundary(seq, i)) continue;
    ++pair_count;
    const auto& prev = seq.events[i - 1];
    const auto& cur = seq.events[i];
    if (!prev.failure || !cur.failure) continue;
    score_sum += opts.eq_weights.both_fail;
    if (prev.first_error == cur.first_error) score_sum += opts.eq_weights.same_type;
  }
  const double eq = pair_count == 0 ? 0.0 : score_sum / (per_pair_max * static_cast<double>(pair_count));
  return {Measure::EQ, seq.kind, eq};
}

RunSummary run_summary(const OutcomeSequence& seq, const MeasureOptions& opts) {
  RunSummary summary;
  std::size_t run_len = 0;
  ErrorType run_type;

  const auto close_run = [&] {
    if (run_len >= 2) summary.runs.push_back({run_type, run_len});
    run_len = 0;
  };

  for (std::size_t i = 0; i < seq.events.size(); ++i) {
    const auto& e = seq.events[i];
    const bool session_break = opts.reset_per_session && i > 0 && has_boundary(seq, i);
    if (!e.failure) {
      close_run();
      continue;
    }
    if (run_len > 0 && e.first_error == run_type && !session_break) {
      ++run_len;
    } else {
      close_run();
      run_type = e.first_error;
      run_len = 1;
    }
  }
  close_run();
  return summary;
}

MeasureValue repeated_error_density(const OutcomeSequence& seq, const MeasureOptions& opts) {
  double total = 0.0;
  for (const auto& run : run_summary(seq, opts).runs) {
    const double r = static_cast<double>(run.length - 1);
    total += r * r / (r + 1.0);
  }
  return {Measure::RED, seq.kind, total};
}

double StudentMeasures::value(const std::string& student_id, int assignment, Measure m,
                              ErrorKind kind) const {
  auto it = cells.find(CohortKey{student_id, assignment});
  return it == cells.end() ? 0.0 : it->second.at(kind, m);
}

namespace {

// Canonical type and error count of one snapshot's compiler output. Each
// list element is parsed as a javac block when possible; an element with
// no file:line stanza is treated as a single bare first-line message.
struct SnapshotErrors {
  ErrorType first;
  int count = 0;
};

SnapshotErrors compiler_errors_of(const SnapshotEvent& event) {
  SnapshotErrors out;
  for (const auto& raw : event.compiler_diagnostics) {
    try {
      const CompilerParse parsed = parse_compiler_output(raw);
      if (out.count == 0) out.first = parsed.diagnostics.front().error_type;
      out.count += static_cast<int>(parsed.diagnostics.size());
    } catch (const ParseError&) {
      if (out.count == 0) out.first = canonicalize(raw);
      ++out.count;
    }
  }
  return out;
}

}  // namespace

SequencePair build_outcome_sequences(const EventStream& stream) {
  SequencePair pair;
  pair.compiler.kind = ErrorKind::Compiler;
  pair.runtime.kind = ErrorKind::Runtime;
  pair.compiler.session_boundaries = stream.boundaries;

  // Boundary positions for the runtime subsequence: a break lands between
  // two kept events when any original boundary falls in between.
  std::size_t last_kept_original = 0;
  for (std::size_t i = 0; i < stream.events.size(); ++i) {
    const auto& event = stream.events[i];
    const OutcomeLabel label = label_snapshot(event);

    if (label.state == OutcomeState::NoCompile) {
      const SnapshotErrors errs = compiler_errors_of(event);
      pair.compiler.events.push_back(
          OutcomeEntry::fail(errs.first, std::max(errs.count, 1)));
      continue;
    }

    pair.compiler.events.push_back(OutcomeEntry::success());

    if (!pair.runtime.events.empty()) {
      for (std::size_t b = last_kept_original + 1; b <= i; ++b) {
        if (std::find(stream.boundaries.begin(), stream.boundaries.end(), b) !=
            stream.boundaries.end()) {
          pair.runtime.session_boundaries.push_back(pair.runtime.events.size());
          break;
        }
      }
    }
    last_kept_original = i;

    if (label.state == OutcomeState::CompiledWithRuntimeErrors) {
      RuntimeDiagnostic first;
      try {
        first = parse_runtime_trace(event.runtime_traces.front());
      } catch (const ParseError& ex) {
        throw ParseError("snapshot '" + event.snapshot_id + "': " + ex.what());
      }
      pair.runtime.events.push_back(OutcomeEntry::fail(
          first.error_type, static_cast<int>(event.runtime_traces.size())));
    } else {
      pair.runtime.events.push_back(OutcomeEntry::success());
    }
  }
  return pair;
}

StudentMeasures compute_measures(const Cohort& cohort, const MeasureOptions& opts) {
  StudentMeasures out;
  const auto students = cohort.students();
  const auto assignments = cohort.assignments();

  for (const auto& student : students) {
    for (int hw : assignments) {
      const CohortKey key{student, hw};
      MeasureSet set;
      auto it = cohort.streams.find(key);
      if (it == cohort.streams.end() || it->second.events.empty()) {
        out.coverage_flags.push_back(key);
        out.cells.emplace(key, set);
        continue;
      }
      const SequencePair seqs = build_outcome_sequences(it->second);
      for (const OutcomeSequence* seq : {&seqs.compiler, &seqs.runtime}) {
        set.at(seq->kind, Measure::EC) = error_count(*seq).value;
        set.at(seq->kind, Measure::EQ) = error_quotient(*seq, opts).value;
        set.at(seq->kind, Measure::RED) = repeated_error_density(*seq, opts).value;
      }
      out.cells.emplace(key, set);
    }
  }
  return out;
}

void write_measures_csv(std::ostream& out, const StudentMeasures& measures) {
  csv::write_row(out, {"student_id", "assignment", "measure", "kind", "value"});
  char buf[64];
  for (const auto& [key, set] : measures.cells) {
    for (Measure m : {Measure::EC, Measure::EQ, Measure::RED}) {
      for (ErrorKind kind : {ErrorKind::Compiler, ErrorKind::Runtime}) {
        const double v = set.at(kind, m);
        if (m == Measure::EC) {
          std::snprintf(buf, sizeof(buf), "%.0f", v);
        } else {
          std::snprintf(buf, sizeof(buf), "%.12g", v);
        }
        csv::write_row(out, {key.student_id, std::to_string(key.assignment),
                             to_string(m), to_string(kind), buf});
      }
    }
  }
}

}  // namespace errql
