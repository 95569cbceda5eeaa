#include "errql/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "errql/csv.hpp"
#include "errql/errors.hpp"

namespace errql {

using nlohmann::json;

void check_event_invariants(const SnapshotEvent& e, const std::string& locus) {
  const auto fail = [&](const std::string& why) {
    throw ValidationError(locus + ": " + why);
  };
  if (e.student_id.empty()) fail("student_id is empty");
  if (e.snapshot_id.empty()) fail("snapshot_id is empty");
  if (e.assignment < kFirstAssignment || e.assignment > kLastAssignment) {
    fail("assignment " + std::to_string(e.assignment) + " outside the 3..8 label range");
  }
  if (e.compile_ok && !e.compiler_diagnostics.empty()) {
    fail("compile_ok=true requires empty compiler_diagnostics");
  }
  if (!e.compile_ok && e.compiler_diagnostics.empty()) {
    fail("compile_ok=false requires at least one compiler diagnostic");
  }
  if (!e.compile_ok &&
      (!e.runtime_traces.empty() || e.tests_passed != 0 || e.tests_failed != 0)) {
    fail("compile_ok=false requires empty runtime_traces and zero test counts");
  }
  if (e.tests_passed < 0 || e.tests_failed < 0) fail("negative test count");
}

namespace {

SnapshotEvent event_from_json(const json& j, const std::string& locus) {
  const auto need = [&](const char* field) -> const json& {
    auto it = j.find(field);
    if (it == j.end()) {
      throw ParseError(locus + ": missing field '" + field + "'");
    }
    return *it;
  };
  const auto as_string_list = [&](const json& v, const char* field) {
    if (!v.is_array()) throw ParseError(locus + ": field '" + std::string(field) + "' must be an array");
    std::vector<std::string> out;
    for (const auto& x : v) {
      if (!x.is_string()) throw ParseError(locus + ": field '" + std::string(field) + "' must hold strings");
      out.push_back(x.get<std::string>());
    }
    return out;
  };

  SnapshotEvent e;
  try {
    e.student_id = need("student_id").get<std::string>();
    e.assignment = need("assignment").get<int>();
    e.timestamp = parse_rfc3339(need("timestamp").get<std::string>());
    e.snapshot_id = need("snapshot_id").get<std::string>();
    e.valid = need("valid").get<bool>();
    e.compile_ok = need("compile_ok").get<bool>();
    e.compiler_diagnostics = as_string_list(need("compiler_diagnostics"), "compiler_diagnostics");
    e.runtime_traces = as_string_list(need("runtime_traces"), "runtime_traces");
    e.tests_passed = need("tests_passed").get<std::int64_t>();
    e.tests_failed = need("tests_failed").get<std::int64_t>();
  } catch (const json::exception& ex) {
    throw ParseError(locus + ": " + ex.what());
  }
  check_event_invariants(e, locus);
  return e;
}

std::vector<SnapshotEvent> load_events_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::vector<SnapshotEvent> events;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string locus = path + ":" + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& ex) {
      throw ParseError(locus + ": invalid JSON: " + ex.what());
    }
    if (!j.is_object()) throw ParseError(locus + ": record is not a JSON object");
    events.push_back(event_from_json(j, locus));
  }
  return events;
}

const std::vector<std::string> kEventCsvHeader = {
    "student_id", "assignment",           "timestamp",      "snapshot_id",
    "valid",      "compile_ok",           "compiler_diagnostics",
    "runtime_traces", "tests_passed",     "tests_failed"};

std::vector<std::string> json_string_array(const std::string& cell, const std::string& locus,
                                           const char* field) {
  if (cell.empty()) return {};
  json j;
  try {
    j = json::parse(cell);
  } catch (const json::exception& ex) {
    throw ParseError(locus + ": field '" + std::string(field) + "' is not a JSON array: " + ex.what());
  }
  if (!j.is_array()) throw ParseError(locus + ": field '" + std::string(field) + "' is not a JSON array");
  std::vector<std::string> out;
  for (const auto& x : j) {
    if (!x.is_string()) throw ParseError(locus + ": field '" + std::string(field) + "' must hold strings");
    out.push_back(x.get<std::string>());
  }
  return out;
}

std::vector<SnapshotEvent> load_events_csv(const std::string& path) {
  const auto rows = csv::read_file(path);
  if (rows.empty()) return {};
  if (rows.front() != kEventCsvHeader) {
    throw ParseError(path + ":1: unexpected event CSV header");
  }
  const auto parse_int = [](const std::string& s, const std::string& locus,
                            const char* field) -> std::int64_t {
    try {
      std::size_t used = 0;
      const std::int64_t v = std::stoll(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ParseError(locus + ": field '" + std::string(field) + "' is not an integer: '" + s + "'");
    }
  };
  const auto parse_bool = [](const std::string& s, const std::string& locus,
                             const char* field) -> bool {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ParseError(locus + ": field '" + std::string(field) + "' is not a boolean: '" + s + "'");
  };

  std::vector<SnapshotEvent> events;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::string locus = path + ":" + std::to_string(r + 1);
    const auto& row = rows[r];
    if (row.size() != kEventCsvHeader.size()) {
      throw ParseError(locus + ": expected " + std::to_string(kEventCsvHeader.size()) +
                       " fields, got " + std::to_string(row.size()));
    }
    SnapshotEvent e;
    e.student_id = row[0];
    e.assignment = static_cast<int>(parse_int(row[1], locus, "assignment"));
    e.timestamp = parse_rfc3339(row[2]);
    e.snapshot_id = row[3];
    e.valid = parse_bool(row[4], locus, "valid");
    e.compile_ok = parse_bool(row[5], locus, "compile_ok");
    e.compiler_diagnostics = json_string_array(row[6], locus, "compiler_diagnostics");
    e.runtime_traces = json_string_array(row[7], locus, "runtime_traces");
    e.tests_passed = parse_int(row[8], locus, "tests_passed");
    e.tests_failed = parse_int(row[9], locus, "tests_failed");
    check_event_invariants(e, locus);
    events.push_back(std::move(e));
  }
  return events;
}

json event_to_json(const SnapshotEvent& e) {
  return json{{"student_id", e.student_id},
              {"assignment", e.assignment},
              {"timestamp", format_rfc3339(e.timestamp)},
              {"snapshot_id", e.snapshot_id},
              {"valid", e.valid},
              {"compile_ok", e.compile_ok},
              {"compiler_diagnostics", e.compiler_diagnostics},
              {"runtime_traces", e.runtime_traces},
              {"tests_passed", e.tests_passed},
              {"tests_failed", e.tests_failed}};
}

}  // namespace

std::vector<SnapshotEvent> load_events(const std::string& path, EventFormat format) {
  switch (format) {
    case EventFormat::Jsonl:
      return load_events_jsonl(path);
    case EventFormat::Csv:
      return load_events_csv(path);
  }
  throw ConfigError("unknown event format");
}

void write_events_jsonl(std::ostream& out, const std::vector<SnapshotEvent>& events) {
  for (const auto& e : events) out << event_to_json(e).dump() << '\n';
}

void write_events_csv(std::ostream& out, const std::vector<SnapshotEvent>& events) {
  csv::write_row(out, kEventCsvHeader);
  for (const auto& e : events) {
    csv::write_row(out, {e.student_id, std::to_string(e.assignment),
                         format_rfc3339(e.timestamp), e.snapshot_id,
                         e.valid ? "true" : "false", e.compile_ok ? "true" : "false",
                         json(e.compiler_diagnostics).dump(), json(e.runtime_traces).dump(),
                         std::to_string(e.tests_passed), std::to_string(e.tests_failed)});
  }
}

bool GradeBook::has_both_exams(const std::string& student_id) const {
  auto it = rows.find(student_id);
  return it != rows.end() && it->second.exam1.has_value() && it->second.exam2.has_value();
}

std::vector<std::string> GradeBook::modeling_students() const {
  std::vector<std::string> out;
  for (const auto& [id, row] : rows) {
    if (row.exam1 && row.exam2) out.push_back(id);
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> GradeBook::skip_report() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [id, row] : rows) {
    if (!row.exam1 && !row.exam2) {
      out.emplace_back(id, "missing exam1 and exam2");
    } else if (!row.exam1) {
      out.emplace_back(id, "missing exam1");
    } else if (!row.exam2) {
      out.emplace_back(id, "missing exam2");
    }
  }
  return out;
}

GradeBook load_grades(const std::string& path) {
  static const std::vector<std::string> kHeader = {"student_id", "exam1", "exam2", "hw3",
                                                   "hw4", "hw5", "hw6", "hw7", "hw8"};
  const auto rows = csv::read_file(path);
  if (rows.empty() || rows.front() != kHeader) {
    throw ParseError(path + ":1: expected header student_id,exam1,exam2,hw3,hw4,hw5,hw6,hw7,hw8");
  }
  const auto parse_cell = [&](const std::string& s, const std::string& locus,
                              const std::string& field) -> std::optional<double> {
    if (s.empty()) return std::nullopt;
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ParseError(locus + ": field '" + field + "' is not a number: '" + s + "'");
    }
  };

  GradeBook book;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::string locus = path + ":" + std::to_string(r + 1);
    const auto& row = rows[r];
    if (row.size() != kHeader.size()) {
      throw ParseError(locus + ": expected " + std::to_string(kHeader.size()) +
                       " fields, got " + std::to_string(row.size()));
    }
    const std::string& id = row[0];
    if (id.empty()) throw ValidationError(locus + ": empty student_id");
    if (book.rows.count(id)) throw ValidationError(locus + ": duplicate student_id '" + id + "'");

    GradeRow grade;
    for (int exam = 1; exam <= 2; ++exam) {
      const auto v = parse_cell(row[exam], locus, "exam" + std::to_string(exam));
      if (v && (*v < 0.0 || *v > 100.0)) {
        throw ValidationError(locus + ": exam" + std::to_string(exam) + " grade " +
                              row[exam] + " outside [0,100]");
      }
      (exam == 1 ? grade.exam1 : grade.exam2) = v;
    }
    for (int k = kFirstAssignment; k <= kLastAssignment; ++k) {
      const auto v = parse_cell(row[static_cast<std::size_t>(k)], locus, "hw" + std::to_string(k));
      const double points = v.value_or(0.0);
      if (points < 0.0) {
        throw ValidationError(locus + ": hw" + std::to_string(k) + " points are negative");
      }
      grade.hw_points[k] = points;
    }
    book.rows.emplace(id, std::move(grade));
  }
  return book;
}

std::size_t Cohort::total_events() const {
  std::size_t n = 0;
  for (const auto& [key, stream] : streams) n += stream.events.size();
  return n;
}

std::vector<std::string> Cohort::students() const {
  std::set<std::string> ids;
  for (const auto& [key, stream] : streams) ids.insert(key.student_id);
  return {ids.begin(), ids.end()};
}

std::vector<int> Cohort::assignments() const {
  std::set<int> hw;
  for (const auto& [key, stream] : streams) hw.insert(key.assignment);
  return {hw.begin(), hw.end()};
}

std::vector<SnapshotEvent> Cohort::all_events() const {
  std::vector<SnapshotEvent> out;
  out.reserve(total_events());
  for (const auto& [key, stream] : streams) {
    out.insert(out.end(), stream.events.begin(), stream.events.end());
  }
  return out;
}

Cohort sessionize(const std::vector<SnapshotEvent>& events, Duration idle_gap) {
  Cohort cohort;
  std::map<CohortKey, std::vector<SnapshotEvent>> grouped;
  for (const auto& e : events) {
    if (!e.valid) continue;
    grouped[{e.student_id, e.assignment}].push_back(e);
  }
  for (auto& [key, list] : grouped) {
    std::sort(list.begin(), list.end(), [](const SnapshotEvent& a, const SnapshotEvent& b) {
      if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
      return a.snapshot_id < b.snapshot_id;
    });
    EventStream stream;
    std::set<std::string> seen;
    for (auto& e : list) {
      if (!seen.insert(e.snapshot_id).second) {
        cohort.warnings.push_back("duplicate snapshot_id '" + e.snapshot_id +
                                  "' dropped for student " + key.student_id + " hw" +
                                  std::to_string(key.assignment));
        continue;
      }
      stream.events.push_back(std::move(e));
    }
    for (std::size_t i = 1; i < stream.events.size(); ++i) {
      const auto gap = stream.events[i].timestamp - stream.events[i - 1].timestamp;
      if (gap > idle_gap) stream.boundaries.push_back(i);
    }
    cohort.streams.emplace(key, std::move(stream));
  }
  return cohort;
}

std::string fnv1a_digest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
    if (got < static_cast<std::streamsize>(sizeof(buf))) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

}  // namespace errql
