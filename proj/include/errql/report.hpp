#pragma once

#include <string>
#include <vector>

#include "errql/rankfit.hpp"

namespace errql {

// One rendered comparison row: which predictors were significant (with
// stars), the model F, robust R-squared and BIC'.
struct ModelRow {
  ModelSpec spec;
  RankFit fit;
  std::string sig_predictors;  // "c3 (***), c4 (*)" or "none"
};

enum class Evidence { StrongForLower, Inconclusive };

struct BicJudgment {
  Evidence evidence = Evidence::Inconclusive;
  double delta = 0.0;  // |a - b|
};

// Strong evidence for the lower value iff |a - b| is strictly greater
// than 6; a delta of exactly 6 is inconclusive.
BicJudgment compare_bic(double a, double b);

struct PairComparison {
  std::string model_a;  // family labels within one exam
  std::string model_b;
  double bic_a = 0.0;
  double bic_b = 0.0;
  BicJudgment judgment;
  std::string preferred;  // empty when inconclusive
};

struct ResultsTable {
  std::vector<ModelRow> rows;              // canonical order, one per spec
  std::vector<PairComparison> deltas[2];   // pairwise BIC' deltas per exam
  int best_row[2] = {-1, -1};              // row index of min BIC' per exam
};

// Assembles fits (any order) into the canonical table; every enumerated
// spec must be present exactly once. Ties for best-by-BIC' break toward
// fewer predictors.
ResultsTable build_results_table(const std::vector<std::pair<ModelSpec, RankFit>>& fits);

enum class ReportFormat { Csv, Json, Markdown };

ReportFormat parse_report_format(const std::string& name);
std::string file_extension(ReportFormat format);

// Bit-stable rendering (no timestamps in the body). The markdown table
// mirrors the column order: Sig. predictors | Model F | R^2 | BIC'.
std::string render(const ResultsTable& table, ReportFormat format);

}  // namespace errql
