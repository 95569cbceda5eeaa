#include "errql/features.hpp"

#include <cstdio>
#include <ostream>

#include "errql/csv.hpp"
#include "errql/errors.hpp"

namespace errql {

std::string to_string(PredictorFamily family) {
  switch (family) {
    case PredictorFamily::EC: return "EC";
    case PredictorFamily::EQ: return "EQ";
    case PredictorFamily::RED: return "RED";
    case PredictorFamily::HWGrades: return "HW grades";
  }
  return "?";
}

std::string to_string(ErrorScope scope) {
  switch (scope) {
    case ErrorScope::CompilerOnly: return "compiler";
    case ErrorScope::CompilerAndRuntime: return "compiler + runtime";
    case ErrorScope::NotApplicable: return "n/a";
  }
  return "?";
}

std::vector<int> ModelSpec::assignments() const {
  if (exam == 1) return {3, 4};
  return {3, 4, 5, 6, 7, 8};
}

std::vector<std::string> ModelSpec::predictor_labels() const {
  std::vector<std::string> labels;
  if (family == PredictorFamily::HWGrades) {
    for (int k : assignments()) labels.push_back("hw" + std::to_string(k));
    return labels;
  }
  for (int k : assignments()) labels.push_back("c" + std::to_string(k));
  if (scope == ErrorScope::CompilerAndRuntime) {
    for (int k : assignments()) labels.push_back("r" + std::to_string(k));
  }
  return labels;
}

int ModelSpec::predictor_count() const {
  return static_cast<int>(predictor_labels().size());
}

std::string ModelSpec::family_label() const {
  if (family == PredictorFamily::HWGrades) return "HW grades (benchmark)";
  return to_string(family) + " (" + to_string(scope) + ")";
}

std::string ModelSpec::id() const {
  std::string s = "exam" + std::to_string(exam) + "_";
  switch (family) {
    case PredictorFamily::EC: s += "EC"; break;
    case PredictorFamily::EQ: s += "EQ"; break;
    case PredictorFamily::RED: s += "RED"; break;
    case PredictorFamily::HWGrades: return s + "HW";
  }
  s += scope == ErrorScope::CompilerOnly ? "_compiler" : "_compiler_runtime";
  return s;
}

std::vector<ModelSpec> enumerate_models() {
  std::vector<ModelSpec> specs;
  const std::vector<std::pair<PredictorFamily, ErrorScope>> families = {
      {PredictorFamily::EC, ErrorScope::CompilerOnly},
      {PredictorFamily::EC, ErrorScope::CompilerAndRuntime},
      {PredictorFamily::EQ, ErrorScope::CompilerOnly},
      {PredictorFamily::EQ, ErrorScope::CompilerAndRuntime},
      {PredictorFamily::RED, ErrorScope::CompilerOnly},
      {PredictorFamily::RED, ErrorScope::CompilerAndRuntime},
      {PredictorFamily::HWGrades, ErrorScope::NotApplicable},
  };
  for (const auto& [family, scope] : families) {
    for (int exam : {1, 2}) {
      specs.push_back(ModelSpec{exam, family, scope});
    }
  }
  return specs;
}

DesignMatrix build_design_matrix(const ModelSpec& spec, const StudentMeasures& measures,
                                 const GradeBook& grades, BuildReport* report) {
  DesignMatrix dm;
  dm.spec = spec;
  dm.labels = spec.predictor_labels();

  if (spec.family != PredictorFamily::HWGrades) {
    // All referenced assignments must exist somewhere in the measures.
    for (int k : spec.assignments()) {
      bool found = false;
      for (const auto& [key, cell] : measures.cells) {
        if (key.assignment == k) {
          found = true;
          break;
        }
      }
      if (!found) {
        throw ConfigError("model " + spec.id() + " references hw" + std::to_string(k) +
                          " which is absent from the computed measures");
      }
    }
  }

  const auto students = grades.modeling_students();
  if (report) {
    for (const auto& [id, reason] : grades.skip_report()) {
      report->excluded.emplace_back(id, reason);
    }
  }

  const int n = static_cast<int>(students.size());
  const int p = spec.predictor_count();
  dm.student_ids = students;
  dm.y.resize(n);
  dm.X.resize(n, p);

  const Measure measure = spec.family == PredictorFamily::EC    ? Measure::EC
                          : spec.family == PredictorFamily::EQ  ? Measure::EQ
                                                                : Measure::RED;
  for (int i = 0; i < n; ++i) {
    const auto& id = students[static_cast<std::size_t>(i)];
    const GradeRow& row = grades.rows.at(id);
    dm.y(i) = spec.exam == 1 ? *row.exam1 : *row.exam2;

    int col = 0;
    if (spec.family == PredictorFamily::HWGrades) {
      for (int k : spec.assignments()) {
        auto it = row.hw_points.find(k);
        dm.X(i, col++) = it == row.hw_points.end() ? 0.0 : it->second;
      }
      continue;
    }
    const auto fill = [&](ErrorKind kind) {
      for (int k : spec.assignments()) {
        auto it = measures.cells.find(CohortKey{id, k});
        if (it == measures.cells.end()) {
          if (report) report->zero_filled.emplace_back(id, k);
          dm.X(i, col++) = 0.0;
        } else {
          dm.X(i, col++) = it->second.at(kind, measure);
        }
      }
    };
    fill(ErrorKind::Compiler);
    if (spec.scope == ErrorScope::CompilerAndRuntime) fill(ErrorKind::Runtime);
  }
  return dm;
}

void write_design_csv(std::ostream& out, const DesignMatrix& dm) {
  std::vector<std::string> header = {"student_id", "y"};
  header.insert(header.end(), dm.labels.begin(), dm.labels.end());
  csv::write_row(out, header);
  char buf[64];
  for (int i = 0; i < dm.n(); ++i) {
    std::vector<std::string> row = {dm.student_ids[static_cast<std::size_t>(i)]};
    std::snprintf(buf, sizeof(buf), "%.12g", dm.y(i));
    row.emplace_back(buf);
    for (int j = 0; j < dm.p(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.12g", dm.X(i, j));
      row.emplace_back(buf);
    }
    csv::write_row(out, row);
  }
}

}  // namespace errql
