#include "errql/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "errql/csv.hpp"
#include "errql/errors.hpp"

namespace errql {

namespace fs = std::filesystem;

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << content;
  if (!out) throw Error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

EventFormat event_format_for_path(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0
             ? EventFormat::Csv
             : EventFormat::Jsonl;
}

namespace {

template <typename F>
auto stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error("stage " + std::string(name) + ": " + e.what());
  }
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return (fs::path(cfg.out_dir) / name).string();
}

std::string coverage_csv(const StudentMeasures& measures) {
  std::ostringstream out;
  csv::write_row(out, {"student_id", "assignment", "note"});
  for (const auto& key : measures.coverage_flags) {
    csv::write_row(out, {key.student_id, std::to_string(key.assignment), "no snapshots; measures zero-filled"});
  }
  return out.str();
}

std::string skips_csv(const GradeBook& grades) {
  std::ostringstream out;
  csv::write_row(out, {"student_id", "reason"});
  for (const auto& [id, reason] : grades.skip_report()) {
    csv::write_row(out, {id, reason});
  }
  return out.str();
}

struct LoadedInputs {
  Cohort cohort;
  StudentMeasures measures;
};

LoadedInputs load_and_measure(const RunConfig& cfg, bool with_grades) {
  LoadedInputs li;
  const auto events = stage("ingest", [&] {
    if (cfg.events_path.empty()) throw ConfigError("no events path given");
    return load_events(cfg.events_path, cfg.event_format);
  });
  li.cohort = stage("sessionize", [&] { return sessionize(events, cfg.idle_gap); });
  li.cohort.provenance.push_back({cfg.events_path, fnv1a_digest_file(cfg.events_path)});
  if (with_grades) {
    li.cohort.grades = stage("grades", [&] {
      if (cfg.grades_path.empty()) throw ConfigError("no grades path given");
      return load_grades(cfg.grades_path);
    });
    li.cohort.provenance.push_back({cfg.grades_path, fnv1a_digest_file(cfg.grades_path)});
  }
  li.measures = stage("measures", [&] {
    return compute_measures(li.cohort, cfg.measure_options());
  });
  return li;
}

std::string measures_csv_string(const StudentMeasures& m) {
  std::ostringstream out;
  write_measures_csv(out, m);
  return out.str();
}

}  // namespace

std::vector<std::string> run_measures_only(const RunConfig& cfg) {
  const LoadedInputs li = load_and_measure(cfg, /*with_grades=*/false);
  std::vector<std::string> written;
  const std::string measures_path = out_path(cfg, "measures.csv");
  write_text_file(measures_path, measures_csv_string(li.measures));
  written.push_back(measures_path);
  const std::string coverage_path = out_path(cfg, "coverage.csv");
  write_text_file(coverage_path, coverage_csv(li.measures));
  written.push_back(coverage_path);
  return written;
}

PipelineResult run_pipeline(const RunConfig& cfg) {
  const LoadedInputs li = load_and_measure(cfg, /*with_grades=*/true);
  PipelineResult result;

  const std::string measures_path = out_path(cfg, "measures.csv");
  write_text_file(measures_path, measures_csv_string(li.measures));
  result.written.push_back(measures_path);
  const std::string coverage_path = out_path(cfg, "coverage.csv");
  write_text_file(coverage_path, coverage_csv(li.measures));
  result.written.push_back(coverage_path);
  const std::string skips_path = out_path(cfg, "excluded_students.csv");
  write_text_file(skips_path, skips_csv(li.cohort.grades));
  result.written.push_back(skips_path);

  std::vector<std::pair<ModelSpec, RankFit>> fits;
  for (const ModelSpec& spec : enumerate_models()) {
    const DesignMatrix dm = stage("features", [&] {
      return build_design_matrix(spec, li.measures, li.cohort.grades);
    });
    {
      std::ostringstream out;
      write_design_csv(out, dm);
      const std::string path = out_path(cfg, "design_" + spec.id() + ".csv");
      write_text_file(path, out.str());
      result.written.push_back(path);
    }
    const RankFit fit = stage("rankfit", [&] {
      return fit_rank_regression(dm, cfg.fit_options());
    });
    {
      const std::string path = out_path(cfg, "fit_" + spec.id() + ".json");
      write_text_file(path, fit_to_json(spec, fit).dump(2) + "\n");
      result.written.push_back(path);
    }
    fits.emplace_back(spec, fit);
  }

  result.table = stage("report", [&] { return build_results_table(fits); });
  for (const ReportFormat format : cfg.formats) {
    const std::string path = out_path(cfg, "report." + file_extension(format));
    write_text_file(path, render(result.table, format));
    result.written.push_back(path);
  }
  return result;
}

std::vector<std::string> run_synth(const SynthConfig& cfg, const std::string& out_dir) {
  const SynthResult synth = generate_cohort(cfg);
  fs::create_directories(out_dir);
  std::vector<std::string> written;

  {
    std::ostringstream out;
    write_events_jsonl(out, synth.events);
    const std::string path = (fs::path(out_dir) / "events.jsonl").string();
    write_text_file(path, out.str());
    written.push_back(path);
  }
  {
    std::ostringstream out;
    write_grades_csv(out, synth.grades);
    const std::string path = (fs::path(out_dir) / "grades.csv").string();
    write_text_file(path, out.str());
    written.push_back(path);
  }
  {
    std::ostringstream out;
    write_ground_truth_csv(out, synth.truth);
    const std::string path = (fs::path(out_dir) / "ground_truth.csv").string();
    write_text_file(path, out.str());
    written.push_back(path);
  }
  return written;
}

std::vector<std::string> run_report_from_fits(const std::string& fits_dir,
                                              const RunConfig& cfg) {
  std::vector<std::string> fit_files;
  for (const auto& entry : fs::directory_iterator(fits_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("fit_", 0) == 0 && entry.path().extension() == ".json") {
      fit_files.push_back(entry.path().string());
    }
  }
  std::sort(fit_files.begin(), fit_files.end());
  if (fit_files.empty()) {
    throw ConfigError("no fit_*.json files found in " + fits_dir);
  }

  std::vector<std::pair<ModelSpec, RankFit>> fits;
  for (const auto& path : fit_files) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(path + ": " + ex.what());
    }
    fits.push_back(fit_from_json(j));
  }

  const ResultsTable table = build_results_table(fits);
  std::vector<std::string> written;
  for (const ReportFormat format : cfg.formats) {
    const std::string path = out_path(cfg, "report." + file_extension(format));
    write_text_file(path, render(table, format));
    written.push_back(path);
  }
  return written;
}

}  // namespace errql
