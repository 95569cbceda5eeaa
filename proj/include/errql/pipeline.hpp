#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "errql/report.hpp"
#include "errql/synth.hpp"

namespace errql {

struct RunConfig {
  std::string events_path;
  std::string grades_path;
  std::string out_dir = ".";
  EventFormat event_format = EventFormat::Jsonl;
  Duration idle_gap = kDefaultIdleGap;
  bool reset_per_session = false;
  EqWeights eq_weights;
  LogBase bic_log = LogBase::Base10;
  TauMethod tau_method = TauMethod::Window;
  std::vector<ReportFormat> formats = {ReportFormat::Csv, ReportFormat::Json,
                                       ReportFormat::Markdown};
  std::uint64_t seed = 42;

  MeasureOptions measure_options() const { return {eq_weights, reset_per_session}; }
  FitOptions fit_options() const {
    FitOptions opts;
    opts.bic_log = bic_log;
    opts.tau_method = tau_method;
    return opts;
  }
};

struct PipelineResult {
  std::vector<std::string> written;  // paths of all artifacts, in write order
  ResultsTable table;
};

// Full run: load -> sessionize -> measures -> 14 design matrices and rank
// fits -> comparison report. Outputs are a pure function of the inputs
// and config (no timestamps), so identical runs write identical bytes.
// Errors from any stage are rethrown with the stage name prefixed.
PipelineResult run_pipeline(const RunConfig& cfg);

// measures.csv + coverage.csv only.
std::vector<std::string> run_measures_only(const RunConfig& cfg);

// events.jsonl + grades.csv + ground_truth.csv for a synthetic cohort.
std::vector<std::string> run_synth(const SynthConfig& cfg, const std::string& out_dir);

// Rebuilds the comparison report from previously written fit_*.json files.
std::vector<std::string> run_report_from_fits(const std::string& fits_dir,
                                              const RunConfig& cfg);

// Guessed from the file extension (.csv -> Csv, anything else -> Jsonl).
EventFormat event_format_for_path(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace errql
