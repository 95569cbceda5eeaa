#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errql/measures.hpp"

namespace errql {

enum class PredictorFamily { EC, EQ, RED, HWGrades };
enum class ErrorScope { CompilerOnly, CompilerAndRuntime, NotApplicable };

std::string to_string(PredictorFamily family);
std::string to_string(ErrorScope scope);

// One regression of the comparison grid: which exam is explained, by
// which measure family, over which error streams. Predictor labels are
// c_k / r_k (error measure for homework k) or hw_k (homework points).
struct ModelSpec {
  int exam = 1;  // 1 or 2
  PredictorFamily family = PredictorFamily::EC;
  ErrorScope scope = ErrorScope::CompilerOnly;

  std::vector<int> assignments() const;             // {3,4} or {3..8}
  std::vector<std::string> predictor_labels() const;
  int predictor_count() const;
  // Human-readable row label, e.g. "EQ (compiler + runtime)".
  std::string family_label() const;
  // Filesystem-safe identifier, e.g. "exam1_EQ_compiler_runtime".
  std::string id() const;
};

// The full comparison grid: 12 error-measure models (2 exams x {EC,EQ,RED}
// x {compiler, compiler+runtime}) plus one homework-grade benchmark per
// exam. Order is canonical and stable.
std::vector<ModelSpec> enumerate_models();

struct DesignMatrix {
  ModelSpec spec;
  std::vector<std::string> student_ids;  // row order, sorted by id
  Eigen::VectorXd y;                     // exam grades
  Eigen::MatrixXd X;                     // n x p, columns in label order
  std::vector<std::string> labels;

  int n() const { return static_cast<int>(y.size()); }
  int p() const { return static_cast<int>(X.cols()); }
};

struct BuildReport {
  std::vector<std::pair<std::string, std::string>> excluded;  // (student, reason)
  // (student, assignment) predictor cells zero-filled because the student
  // had no snapshots there.
  std::vector<std::pair<std::string, int>> zero_filled;
};

// Joins measures with grades for one spec. Rows are the students holding
// both exam grades, sorted by id; measure cells absent from `measures`
// load as 0 and are listed in the report.
DesignMatrix build_design_matrix(const ModelSpec& spec, const StudentMeasures& measures,
                                 const GradeBook& grades, BuildReport* report = nullptr);

// CSV export: student_id,y,<labels...>.
void write_design_csv(std::ostream& out, const DesignMatrix& dm);

}  // namespace errql
