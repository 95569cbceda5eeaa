#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "errql/errors.hpp"
#include "errql/ingest.hpp"

using namespace errql;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
  const fs::path path = fs::temp_directory_path() / ("errql_ingest_" + name);
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

std::string event_line(const std::string& student, int hw, const std::string& ts,
                       const std::string& id, bool valid, bool compile_ok,
                       const std::string& diags = "[]", const std::string& traces = "[]",
                       int passed = 0, int failed = 0) {
  std::ostringstream ss;
  ss << "{\"student_id\":\"" << student << "\",\"assignment\":" << hw
     << ",\"timestamp\":\"" << ts << "\",\"snapshot_id\":\"" << id << "\",\"valid\":"
     << (valid ? "true" : "false") << ",\"compile_ok\":" << (compile_ok ? "true" : "false")
     << ",\"compiler_diagnostics\":" << diags << ",\"runtime_traces\":" << traces
     << ",\"tests_passed\":" << passed << ",\"tests_failed\":" << failed << "}\n";
  return ss.str();
}

SnapshotEvent make_event(const std::string& student, int hw, const std::string& ts,
                         const std::string& id, bool valid = true, bool compile_ok = true) {
  SnapshotEvent e;
  e.student_id = student;
  e.assignment = hw;
  e.timestamp = parse_rfc3339(ts);
  e.snapshot_id = id;
  e.valid = valid;
  e.compile_ok = compile_ok;
  if (!compile_ok) e.compiler_diagnostics = {"A.java:1: error: ';' expected"};
  return e;
}

}  // namespace

TEST_CASE("load_events maps one JSONL line to one event") {
  const auto path = temp_file(
      "one.jsonl",
      event_line("s1", 3, "2020-09-10T08:00:00Z", "a1", true, false,
                 "[\"Hw3.java:4: error: ';' expected\"]"));
  const auto events = load_events(path.string(), EventFormat::Jsonl);
  REQUIRE(events.size() == 1);
  CHECK(events[0].student_id == "s1");
  CHECK(events[0].compiler_diagnostics.size() == 1);
  CHECK(events[0].compiler_diagnostics[0] == "Hw3.java:4: error: ';' expected");
}

TEST_CASE("compile_ok with diagnostics violates the invariant") {
  const auto path = temp_file(
      "bad.jsonl",
      event_line("s1", 3, "2020-09-10T08:00:00Z", "a1", true, true,
                 "[\"Hw3.java:4: error: ';' expected\"]"));
  CHECK_THROWS_AS(load_events(path.string(), EventFormat::Jsonl), ValidationError);
  CHECK_THROWS_WITH_AS(load_events(path.string(), EventFormat::Jsonl),
                       doctest::Contains("compile_ok=true requires empty"), ValidationError);
}

TEST_CASE("failing compile with traces or test counts is rejected") {
  const auto with_traces = temp_file(
      "bad2.jsonl", event_line("s1", 3, "2020-09-10T08:00:00Z", "a1", true, false,
                               "[\"x\"]", "[\"java.lang.NullPointerException\"]"));
  CHECK_THROWS_AS(load_events(with_traces.string(), EventFormat::Jsonl), ValidationError);
  const auto with_tests = temp_file(
      "bad3.jsonl",
      event_line("s1", 3, "2020-09-10T08:00:00Z", "a1", true, false, "[\"x\"]", "[]", 3, 1));
  CHECK_THROWS_AS(load_events(with_tests.string(), EventFormat::Jsonl), ValidationError);
}

TEST_CASE("malformed record errors carry the line number") {
  const auto path = temp_file("line.jsonl",
                              event_line("s1", 3, "2020-09-10T08:00:00Z", "a1", true, true) +
                                  "{\"student_id\": \"s2\"\n");
  try {
    load_events(path.string(), EventFormat::Jsonl);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
}

TEST_CASE("assignment label outside 3..8 is rejected") {
  const auto path =
      temp_file("hw9.jsonl", event_line("s1", 9, "2020-09-10T08:00:00Z", "a1", true, true));
  CHECK_THROWS_AS(load_events(path.string(), EventFormat::Jsonl), ValidationError);
}

TEST_CASE("scale parity: 5763 records load as 5763 events") {
  std::ostringstream ss;
  for (int i = 0; i < 5763; ++i) {
    char ts[40], id[24];
    std::snprintf(ts, sizeof(ts), "2020-09-10T%02d:%02d:%02d.%03dZ", (i / 3600) % 24,
                  (i / 60) % 60, i % 60, i % 1000);
    std::snprintf(id, sizeof(id), "snap-%05d", i);
    ss << event_line("s" + std::to_string(i % 295), 3, ts, id, true, true);
  }
  const auto path = temp_file("hw3_scale.jsonl", ss.str());
  CHECK(load_events(path.string(), EventFormat::Jsonl).size() == 5763);
}

TEST_CASE("events CSV round trips through write_events_csv") {
  std::vector<SnapshotEvent> events;
  auto failing = make_event("s1", 4, "2020-09-11T10:00:00.500Z", "b1", true, false);
  failing.compiler_diagnostics = {"Hw4.java:2: error: cannot find symbol",
                                  "Hw4.java:9: error: ';' expected"};
  events.push_back(failing);
  auto traced = make_event("s2", 4, "2020-09-11T10:05:00Z", "b2");
  traced.runtime_traces = {"java.lang.NullPointerException: oops, with \"quotes\""};
  traced.tests_passed = 7;
  traced.tests_failed = 2;
  events.push_back(traced);

  std::ostringstream out;
  write_events_csv(out, events);
  const auto path = temp_file("roundtrip.csv", out.str());
  const auto loaded = load_events(path.string(), EventFormat::Csv);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].compiler_diagnostics == events[0].compiler_diagnostics);
  CHECK(loaded[1].runtime_traces == events[1].runtime_traces);
  CHECK(loaded[1].timestamp == events[1].timestamp);
  CHECK(loaded[1].tests_passed == 7);
}

TEST_CASE("load_grades reads exam and homework columns") {
  const auto path = temp_file("grades.csv",
                              "student_id,exam1,exam2,hw3,hw4,hw5,hw6,hw7,hw8\n"
                              "s1,84,83,95,88.5,70,100,60,91\n");
  const GradeBook book = load_grades(path.string());
  REQUIRE(book.rows.count("s1") == 1);
  CHECK(*book.rows.at("s1").exam1 == 84.0);
  CHECK(*book.rows.at("s1").exam2 == 83.0);
  CHECK(book.rows.at("s1").hw_points.at(4) == 88.5);
  CHECK(book.has_both_exams("s1"));
}

TEST_CASE("missing exam lands in the skip report, not the model set") {
  const auto path = temp_file("grades_skip.csv",
                              "student_id,exam1,exam2,hw3,hw4,hw5,hw6,hw7,hw8\n"
                              "s1,84,,95,88,70,100,60,91\n"
                              "s2,77,81,90,85,75,95,65,88\n");
  const GradeBook book = load_grades(path.string());
  CHECK(book.modeling_students() == std::vector<std::string>{"s2"});
  const auto skips = book.skip_report();
  REQUIRE(skips.size() == 1);
  CHECK(skips[0].first == "s1");
  CHECK(skips[0].second == "missing exam2");
}

TEST_CASE("header-only grade file is an empty grade book") {
  const auto path =
      temp_file("grades_empty.csv", "student_id,exam1,exam2,hw3,hw4,hw5,hw6,hw7,hw8\n");
  CHECK(load_grades(path.string()).rows.empty());
}

TEST_CASE("exam grades outside [0,100] and duplicate ids are rejected") {
  const auto range = temp_file("grades_range.csv",
                               "student_id,exam1,exam2,hw3,hw4,hw5,hw6,hw7,hw8\n"
                               "s1,105,83,0,0,0,0,0,0\n");
  CHECK_THROWS_AS(load_grades(range.string()), ValidationError);
  const auto dup = temp_file("grades_dup.csv",
                             "student_id,exam1,exam2,hw3,hw4,hw5,hw6,hw7,hw8\n"
                             "s1,80,83,0,0,0,0,0,0\n"
                             "s1,81,84,0,0,0,0,0,0\n");
  CHECK_THROWS_AS(load_grades(dup.string()), ValidationError);
}

TEST_CASE("sessionize marks boundaries at gaps over the threshold") {
  const std::vector<SnapshotEvent> events = {
      make_event("s1", 3, "2020-09-10T08:00:00Z", "a1"),
      make_event("s1", 3, "2020-09-10T08:05:00Z", "a2"),
      make_event("s1", 3, "2020-09-10T08:30:00Z", "a3"),
  };
  const Cohort cohort = sessionize(events, std::chrono::minutes{10});
  const auto& stream = cohort.streams.at({"s1", 3});
  REQUIRE(stream.events.size() == 3);
  CHECK(stream.boundaries == std::vector<std::size_t>{2});
}

TEST_CASE("a gap of exactly the threshold is not a boundary") {
  const std::vector<SnapshotEvent> events = {
      make_event("s1", 3, "2020-09-10T08:00:00Z", "a1"),
      make_event("s1", 3, "2020-09-10T08:10:00Z", "a2"),
  };
  CHECK(sessionize(events, std::chrono::minutes{10}).streams.at({"s1", 3}).boundaries.empty());
}

TEST_CASE("duplicate snapshot ids are dropped with a warning") {
  const std::vector<SnapshotEvent> events = {
      make_event("s1", 3, "2020-09-10T08:00:00Z", "a1"),
      make_event("s1", 3, "2020-09-10T08:02:00Z", "a1"),
  };
  const Cohort cohort = sessionize(events);
  CHECK(cohort.streams.at({"s1", 3}).events.size() == 1);
  REQUIRE(cohort.warnings.size() == 1);
  CHECK(cohort.warnings[0].find("a1") != std::string::npos);
}

TEST_CASE("invalid snapshots are excluded without disturbing the rest") {
  const std::vector<SnapshotEvent> events = {
      make_event("s1", 3, "2020-09-10T08:00:00Z", "a1"),
      make_event("s1", 3, "2020-09-10T08:01:00Z", "bad", /*valid=*/false, /*compile_ok=*/false),
      make_event("s1", 3, "2020-09-10T08:02:00Z", "a2"),
  };
  const Cohort cohort = sessionize(events);
  const auto& stream = cohort.streams.at({"s1", 3});
  REQUIRE(stream.events.size() == 2);
  CHECK(stream.events[0].snapshot_id == "a1");
  CHECK(stream.events[1].snapshot_id == "a2");
}

TEST_CASE("empty input gives an empty cohort") {
  CHECK(sessionize({}).streams.empty());
}

TEST_CASE("sessionize is idempotent and order-insensitive") {
  std::vector<SnapshotEvent> events;
  std::mt19937 shuffle_rng(7);
  for (int s = 0; s < 4; ++s) {
    for (int i = 0; i < 25; ++i) {
      char ts[40], id[24];
      std::snprintf(ts, sizeof(ts), "2020-09-10T08:%02d:%02d.%03dZ", (i * 7) % 60, (i * 13) % 60,
                    (i * 31) % 1000);
      std::snprintf(id, sizeof(id), "s%d-e%02d", s, i);
      events.push_back(make_event("s" + std::to_string(s), 3 + (s % 2), ts, id,
                                  /*valid=*/i % 7 != 3, /*compile_ok=*/i % 2 == 0));
    }
  }
  const Cohort once = sessionize(events);

  // Idempotence: feeding the sessionized events back reproduces the cohort.
  const Cohort twice = sessionize(once.all_events());
  REQUIRE(twice.streams.size() == once.streams.size());
  for (const auto& [key, stream] : once.streams) {
    const auto& other = twice.streams.at(key);
    REQUIRE(other.events.size() == stream.events.size());
    for (std::size_t i = 0; i < stream.events.size(); ++i) {
      CHECK(other.events[i].snapshot_id == stream.events[i].snapshot_id);
    }
    CHECK(other.boundaries == stream.boundaries);
  }

  // Determinism: a shuffled copy yields an identical cohort.
  auto shuffled = events;
  std::shuffle(shuffled.begin(), shuffled.end(), shuffle_rng);
  const Cohort reshuffled = sessionize(shuffled);
  REQUIRE(reshuffled.streams.size() == once.streams.size());
  for (const auto& [key, stream] : once.streams) {
    const auto& other = reshuffled.streams.at(key);
    REQUIRE(other.events.size() == stream.events.size());
    for (std::size_t i = 0; i < stream.events.size(); ++i) {
      CHECK(other.events[i].snapshot_id == stream.events[i].snapshot_id);
    }
    CHECK(other.boundaries == stream.boundaries);
  }

  // Count conservation over valid distinct events.
  std::size_t valid_count = 0;
  for (const auto& e : events) {
    if (e.valid) ++valid_count;
  }
  CHECK(once.total_events() == valid_count);
}

TEST_CASE("timestamp ties break by snapshot_id") {
  const std::vector<SnapshotEvent> events = {
      make_event("s1", 3, "2020-09-10T08:00:00Z", "b"),
      make_event("s1", 3, "2020-09-10T08:00:00Z", "a"),
  };
  const auto& stream = sessionize(events).streams.at({"s1", 3});
  CHECK(stream.events[0].snapshot_id == "a");
  CHECK(stream.events[1].snapshot_id == "b");
}
