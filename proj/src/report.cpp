#include "errql/report.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "errql/csv.hpp"
#include "errql/errors.hpp"

namespace errql {

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  // Avoid the "-0.00" artifact.
  if (std::string(buf) == std::string("-0.") + std::string(static_cast<std::size_t>(decimals), '0')) {
    return buf + 1;
  }
  return buf;
}

std::string significant_predictors(const RankFit& fit) {
  std::string out;
  for (const auto& t : fit.coef_tests) {
    if (t.p_value >= 0.05) continue;
    if (!out.empty()) out += ", ";
    out += t.label + " (" + t.stars + ")";
  }
  return out.empty() ? "none" : out;
}

std::string model_f_cell(const RankFit& fit) {
  std::string out = fixed(fit.model_f.stat, 2);
  if (!fit.model_f.stars.empty()) out += " (" + fit.model_f.stars + ")";
  return out;
}

}  // namespace

BicJudgment compare_bic(double a, double b) {
  BicJudgment j;
  j.delta = std::abs(a - b);
  j.evidence = j.delta > 6.0 ? Evidence::StrongForLower : Evidence::Inconclusive;
  return j;
}

ResultsTable build_results_table(const std::vector<std::pair<ModelSpec, RankFit>>& fits) {
  std::map<std::string, const std::pair<ModelSpec, RankFit>*> by_id;
  for (const auto& f : fits) {
    if (!by_id.emplace(f.first.id(), &f).second) {
      throw ConfigError("duplicate fit for model " + f.first.id());
    }
  }

  ResultsTable table;
  for (const ModelSpec& spec : enumerate_models()) {
    auto it = by_id.find(spec.id());
    if (it == by_id.end()) throw ConfigError("missing fit for model " + spec.id());
    ModelRow row;
    row.spec = spec;
    row.fit = it->second->second;
    row.sig_predictors = significant_predictors(row.fit);
    table.rows.push_back(std::move(row));
  }

  for (int exam = 1; exam <= 2; ++exam) {
    std::vector<int> indices;
    for (int i = 0; i < static_cast<int>(table.rows.size()); ++i) {
      if (table.rows[static_cast<std::size_t>(i)].spec.exam == exam) indices.push_back(i);
    }
    int best = indices.front();
    for (int i : indices) {
      const auto& cand = table.rows[static_cast<std::size_t>(i)];
      const auto& cur = table.rows[static_cast<std::size_t>(best)];
      if (cand.fit.bic_prime < cur.fit.bic_prime ||
          (cand.fit.bic_prime == cur.fit.bic_prime &&
           cand.spec.predictor_count() < cur.spec.predictor_count())) {
        best = i;
      }
    }
    table.best_row[exam - 1] = best;

    for (std::size_t a = 0; a < indices.size(); ++a) {
      for (std::size_t b = a + 1; b < indices.size(); ++b) {
        const auto& ra = table.rows[static_cast<std::size_t>(indices[a])];
        const auto& rb = table.rows[static_cast<std::size_t>(indices[b])];
        PairComparison pc;
        pc.model_a = ra.spec.family_label();
        pc.model_b = rb.spec.family_label();
        pc.bic_a = ra.fit.bic_prime;
        pc.bic_b = rb.fit.bic_prime;
        pc.judgment = compare_bic(pc.bic_a, pc.bic_b);
        if (pc.judgment.evidence == Evidence::StrongForLower) {
          pc.preferred = pc.bic_a < pc.bic_b ? pc.model_a : pc.model_b;
        }
        table.deltas[exam - 1].push_back(std::move(pc));
      }
    }
  }
  return table;
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  if (name == "markdown" || name == "md") return ReportFormat::Markdown;
  throw ConfigError("unknown report format: '" + name + "'");
}

std::string file_extension(ReportFormat format) {
  switch (format) {
    case ReportFormat::Csv: return "csv";
    case ReportFormat::Json: return "json";
    case ReportFormat::Markdown: return "md";
  }
  return "txt";
}

namespace {

std::string render_markdown(const ResultsTable& table) {
  std::ostringstream out;
  out << "# Model comparison\n\n";
  out << "| Model | Exam | Sig. predictors | Model F | R² | BIC' | Best |\n";
  out << "|---|---|---|---|---|---|---|\n";
  for (int i = 0; i < static_cast<int>(table.rows.size()); ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    const bool best = table.best_row[row.spec.exam - 1] == i;
    out << "| " << row.spec.family_label() << " | " << row.spec.exam << " | "
        << row.sig_predictors << " | " << model_f_cell(row.fit) << " | "
        << fixed(row.fit.robust_r2, 3) << " | " << fixed(row.fit.bic_prime, 2) << " | "
        << (best ? "✓" : "") << " |\n";
  }
  for (int exam = 1; exam <= 2; ++exam) {
    out << "\n## Exam " << exam << " BIC' evidence\n\n";
    for (const auto& pc : table.deltas[exam - 1]) {
      out << "- " << pc.model_a << " vs " << pc.model_b << ": Δ = "
          << fixed(pc.judgment.delta, 2);
      if (pc.judgment.evidence == Evidence::StrongForLower) {
        out << " — strong evidence for " << pc.preferred;
      } else {
        out << " — inconclusive";
      }
      out << "\n";
    }
  }
  return out.str();
}

std::string render_csv(const ResultsTable& table) {
  std::ostringstream out;
  csv::write_row(out, {"model", "exam", "sig_predictors", "model_f", "f_stars", "r2",
                       "bic_prime", "best"});
  for (int i = 0; i < static_cast<int>(table.rows.size()); ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    const bool best = table.best_row[row.spec.exam - 1] == i;
    csv::write_row(out, {row.spec.family_label(), std::to_string(row.spec.exam),
                         row.sig_predictors, fixed(row.fit.model_f.stat, 2),
                         row.fit.model_f.stars, fixed(row.fit.robust_r2, 3),
                         fixed(row.fit.bic_prime, 2), best ? "yes" : "no"});
  }
  return out.str();
}

std::string render_json(const ResultsTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < static_cast<int>(table.rows.size()); ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    rows.push_back({{"id", row.spec.id()},
                    {"model", row.spec.family_label()},
                    {"exam", row.spec.exam},
                    {"sig_predictors", row.sig_predictors},
                    {"model_f", {{"stat", row.fit.model_f.stat},
                                 {"df1", row.fit.model_f.df1},
                                 {"df2", row.fit.model_f.df2},
                                 {"p", row.fit.model_f.p_value},
                                 {"stars", row.fit.model_f.stars}}},
                    {"r2", row.fit.robust_r2},
                    {"bic_prime", row.fit.bic_prime},
                    {"best", table.best_row[row.spec.exam - 1] == i}});
  }
  nlohmann::json comparisons = nlohmann::json::object();
  for (int exam = 1; exam <= 2; ++exam) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& pc : table.deltas[exam - 1]) {
      list.push_back({{"model_a", pc.model_a},
                      {"model_b", pc.model_b},
                      {"delta", pc.judgment.delta},
                      {"strong", pc.judgment.evidence == Evidence::StrongForLower},
                      {"preferred", pc.preferred}});
    }
    comparisons["exam" + std::to_string(exam)] = std::move(list);
  }
  return nlohmann::json{{"rows", rows}, {"comparisons", comparisons}}.dump(2) + "\n";
}

}  // namespace

std::string render(const ResultsTable& table, ReportFormat format) {
  switch (format) {
    case ReportFormat::Markdown: return render_markdown(table);
    case ReportFormat::Csv: return render_csv(table);
    case ReportFormat::Json: return render_json(table);
  }
  throw ConfigError("unknown report format");
}

}  // namespace errql
