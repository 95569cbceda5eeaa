#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "errql/errors.hpp"
#include "errql/pipeline.hpp"

namespace {

using namespace errql;

struct CommonFlags {
  std::string events;
  std::string grades;
  std::string out_dir = ".";
  double idle_gap_minutes = 10.0;
  bool reset_per_session = false;
  std::string eq_weights = "8,3";
  std::string bic_log = "10";
  std::vector<std::string> formats = {"csv", "json", "markdown"};
  std::string tau = "window";
  std::uint64_t seed = 42;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool needs_events,
                      bool needs_grades) {
  auto* events = cmd->add_option("--events", flags.events, "Event log (.jsonl or .csv)");
  if (needs_events) events->required();
  auto* grades = cmd->add_option("--grades", flags.grades, "Grade book CSV");
  if (needs_grades) grades->required();
  cmd->add_option("--out", flags.out_dir, "Output directory");
  cmd->add_option("--idle-gap", flags.idle_gap_minutes,
                  "Session gap threshold in minutes")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--reset-per-session", flags.reset_per_session,
                "Reset EQ/RED at session boundaries");
  cmd->add_option("--eq-weights", flags.eq_weights,
                  "EQ pair weights as BOTH_FAIL,SAME_TYPE");
  cmd->add_option("--bic-log", flags.bic_log, "BIC' logarithm base")
      ->check(CLI::IsMember({"10", "e"}));
  cmd->add_option("--format", flags.formats, "Report formats to write")
      ->check(CLI::IsMember({"csv", "json", "markdown"}));
  cmd->add_option("--tau", flags.tau, "Scale estimator")
      ->check(CLI::IsMember({"window", "bootstrap"}));
  cmd->add_option("--seed", flags.seed, "Seed for simulations");
}

RunConfig to_run_config(const CommonFlags& flags) {
  RunConfig cfg;
  cfg.events_path = flags.events;
  cfg.grades_path = flags.grades;
  cfg.out_dir = flags.out_dir;
  cfg.event_format = event_format_for_path(flags.events);
  cfg.idle_gap = std::chrono::milliseconds(
      static_cast<std::int64_t>(flags.idle_gap_minutes * 60.0 * 1000.0));
  cfg.reset_per_session = flags.reset_per_session;

  const auto comma = flags.eq_weights.find(',');
  if (comma == std::string::npos) {
    throw ConfigError("--eq-weights expects BOTH_FAIL,SAME_TYPE, got '" + flags.eq_weights + "'");
  }
  try {
    cfg.eq_weights.both_fail = std::stod(flags.eq_weights.substr(0, comma));
    cfg.eq_weights.same_type = std::stod(flags.eq_weights.substr(comma + 1));
  } catch (const std::exception&) {
    throw ConfigError("--eq-weights expects two numbers, got '" + flags.eq_weights + "'");
  }
  if (cfg.eq_weights.both_fail < 0 || cfg.eq_weights.same_type < 0 ||
      cfg.eq_weights.both_fail + cfg.eq_weights.same_type <= 0) {
    throw ConfigError("--eq-weights must be non-negative with a positive sum");
  }

  cfg.bic_log = flags.bic_log == "e" ? LogBase::Natural : LogBase::Base10;
  cfg.tau_method = flags.tau == "bootstrap" ? TauMethod::Bootstrap : TauMethod::Window;
  cfg.formats.clear();
  for (const auto& f : flags.formats) cfg.formats.push_back(parse_report_format(f));
  cfg.seed = flags.seed;
  return cfg;
}

int cmd_ingest_check(const CommonFlags& flags) {
  const RunConfig cfg = to_run_config(flags);
  const auto events = load_events(cfg.events_path, cfg.event_format);
  const Cohort cohort = sessionize(events, cfg.idle_gap);
  const StudentMeasures measures = compute_measures(cohort, cfg.measure_options());

  struct HwTotals {
    std::set<std::string> students;
    std::size_t snapshots = 0;
    long long compiler_errors = 0;
    long long runtime_errors = 0;
    long long failed = 0;
    long long passed = 0;
  };
  std::map<int, HwTotals> totals;
  for (const auto& [key, stream] : cohort.streams) {
    auto& t = totals[key.assignment];
    t.students.insert(key.student_id);
    t.snapshots += stream.events.size();
    for (const auto& e : stream.events) {
      t.failed += e.tests_failed;
      t.passed += e.tests_passed;
    }
  }
  for (const auto& [key, set] : measures.cells) {
    auto& t = totals[key.assignment];
    t.compiler_errors += static_cast<long long>(set.at(ErrorKind::Compiler, Measure::EC));
    t.runtime_errors += static_cast<long long>(set.at(ErrorKind::Runtime, Measure::EC));
  }

  std::printf("%-14s %9s %9s %9s %9s %9s\n", "HW (students)", "snapshots",
              "cmp.errs", "run.errs", "failed", "passed");
  for (const auto& [hw, t] : totals) {
    char label[32];
    std::snprintf(label, sizeof(label), "#%d (%zu)", hw, t.students.size());
    std::printf("%-14s %9zu %9lld %9lld %9lld %9lld\n", label, t.snapshots,
                t.compiler_errors, t.runtime_errors, t.failed, t.passed);
  }
  for (const auto& w : cohort.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

  if (!flags.grades.empty()) {
    const GradeBook grades = load_grades(flags.grades);
    std::printf("grade book: %zu students, %zu modelable\n", grades.rows.size(),
                grades.modeling_students().size());
    for (const auto& [id, reason] : grades.skip_report()) {
      std::printf("skipped: %s (%s)\n", id.c_str(), reason.c_str());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"errql: programming-error measures and rank-based grade models"};
  app.require_subcommand(1);
  app.set_config("--config")->envname("ERRQL_CONFIG");

  CommonFlags ingest_flags, measures_flags, analyze_flags, report_flags;

  auto* ingest_cmd = app.add_subcommand("ingest-check",
                                        "Validate an event log and print per-assignment totals");
  add_common_flags(ingest_cmd, ingest_flags, /*needs_events=*/true, /*needs_grades=*/false);

  auto* measures_cmd = app.add_subcommand("measures",
                                          "Compute EC/EQ/RED per student and assignment");
  add_common_flags(measures_cmd, measures_flags, true, false);

  auto* analyze_cmd = app.add_subcommand("analyze",
                                         "Full pipeline: measures, model fits and comparison report");
  add_common_flags(analyze_cmd, analyze_flags, true, true);

  auto* report_cmd = app.add_subcommand("report", "Rebuild the report from fit_*.json files");
  std::string fits_dir;
  report_cmd->add_option("--fits", fits_dir, "Directory holding fit_*.json")->required();
  add_common_flags(report_cmd, report_flags, false, false);

  auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded synthetic cohort");
  SynthConfig synth_cfg;
  std::string synth_out = ".";
  synth_cmd->add_option("--seed", synth_cfg.seed, "Generator seed");
  synth_cmd->add_option("--students", synth_cfg.n_students, "Number of students")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--out", synth_out, "Output directory");
  synth_cmd->add_option("--min-events", synth_cfg.min_events, "Minimum snapshots per cell");
  synth_cmd->add_option("--max-events", synth_cfg.max_events, "Maximum snapshots per cell");
  synth_cmd->add_option("--noise-sigma", synth_cfg.grade_noise_sigma, "Grade noise sigma");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest_cmd->parsed()) return cmd_ingest_check(ingest_flags);
    if (measures_cmd->parsed()) {
      for (const auto& path : run_measures_only(to_run_config(measures_flags))) {
        std::printf("wrote %s\n", path.c_str());
      }
      return 0;
    }
    if (analyze_cmd->parsed()) {
      const PipelineResult result = run_pipeline(to_run_config(analyze_flags));
      for (const auto& path : result.written) std::printf("wrote %s\n", path.c_str());
      return 0;
    }
    if (report_cmd->parsed()) {
      for (const auto& path : run_report_from_fits(fits_dir, to_run_config(report_flags))) {
        std::printf("wrote %s\n", path.c_str());
      }
      return 0;
    }
    if (synth_cmd->parsed()) {
      for (const auto& path : run_synth(synth_cfg, synth_out)) {
        std::printf("wrote %s\n", path.c_str());
      }
      return 0;
    }
  } catch (const errql::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 2;
  }
  return 0;
}
