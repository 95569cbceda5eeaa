#include "errql/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "errql/csv.hpp"
#include "errql/errors.hpp"
#include "errql/rng.hpp"

namespace errql {

namespace {

double lerp(double at_low_skill, double at_high_skill, double theta) {
  return at_low_skill + (at_high_skill - at_low_skill) * theta;
}

double clamp_grade(double g) { return std::clamp(g, 0.0, 100.0); }

double round1(double g) { return std::round(g * 10.0) / 10.0; }

// --- compiler error catalog ---------------------------------------------

struct CompilerTemplate {
  const char* message;      // may contain "%s" for a generated identifier
  bool wants_identifier;
};

constexpr CompilerTemplate kCompilerCatalog[] = {
    {"';' expected", false},
    {"cannot find symbol", false},
    {"variable '%s' might not have been initialized", true},
    {"')' expected", false},
    {"missing return statement", false},
    {"incompatible types: int cannot be converted to java.lang.String", false},
    {"illegal start of expression", false},
    {"class, interface, or enum expected", false},
};
constexpr int kCompilerCatalogSize = 8;

struct RuntimeTemplate {
  const char* exception_class;
  const char* detail;  // nullptr: no detail line
};

constexpr RuntimeTemplate kRuntimeCatalog[] = {
    {"java.lang.NullPointerException",
     "Cannot invoke \"String.length()\" because \"s\" is null"},
    {"java.lang.ArrayIndexOutOfBoundsException", "Index 5 out of bounds for length 5"},
    {"java.lang.ArithmeticException", "/ by zero"},
    {"java.lang.NumberFormatException", "For input string: \"abc\""},
    {"java.lang.ClassCastException",
     "class java.lang.Object cannot be cast to class java.lang.String"},
    {"java.lang.StringIndexOutOfBoundsException", "String index out of range: 12"},
    {"java.util.NoSuchElementException", nullptr},
    {"java.lang.UnsupportedOperationException", nullptr},
};
constexpr int kRuntimeCatalogSize = 8;

std::string render_compiler_block(const std::string& file, int n_stanzas,
                                  int first_template, Rng& rng, int alphabet) {
  std::string block;
  int templ = first_template;
  for (int s = 0; s < n_stanzas; ++s) {
    if (s > 0) templ = static_cast<int>(rng.uniform_int(0, alphabet - 1));
    const auto& t = kCompilerCatalog[templ];
    const int line = static_cast<int>(rng.uniform_int(3, 120));
    char msg[160];
    if (t.wants_identifier) {
      char ident[24];
      std::snprintf(ident, sizeof(ident), "v%d", static_cast<int>(rng.uniform_int(0, 999)));
      std::snprintf(msg, sizeof(msg), t.message, ident);
    } else {
      std::snprintf(msg, sizeof(msg), "%s", t.message);
    }
    block += file + ":" + std::to_string(line) + ": error: " + msg + "\n";
    block += "        int total = 0\n";
    block += "                     ^\n";
  }
  block += std::to_string(n_stanzas) + (n_stanzas == 1 ? " error" : " errors");
  return block;
}

std::string render_trace(const std::string& file, int templ, Rng& rng) {
  const auto& t = kRuntimeCatalog[templ];
  std::string trace;
  const bool thread_header = rng.bernoulli(0.5);
  if (thread_header) trace += "Exception in thread \"main\" ";
  trace += t.exception_class;
  if (t.detail != nullptr) trace += std::string(": ") + t.detail;
  const int frames = static_cast<int>(rng.uniform_int(1, 3));
  const std::string cls = file.substr(0, file.size() - 5);  // strip ".java"
  for (int fidx = 0; fidx < frames; ++fidx) {
    trace += "\n\tat " + cls + (fidx == 0 ? ".run(" : ".main(") + file + ":" +
             std::to_string(rng.uniform_int(5, 90)) + ")";
  }
  return trace;
}

// --- ground-truth scorer --------------------------------------------------
// Direct scan over (failed?, type index, count) tuples; deliberately kept
// separate from the measures module so the pipeline round-trip check
// compares two implementations.

struct TruthEntry {
  bool failed = false;
  int type = -1;
  int count = 0;
};

void score_stream(const std::vector<TruthEntry>& seq, ErrorKind kind, MeasureSet& set) {
  double ec = 0.0;
  for (const auto& e : seq) {
    if (e.failed) ec += e.count;
  }

  double eq_num = 0.0;
  const std::size_t pairs = seq.size() >= 2 ? seq.size() - 1 : 0;
  for (std::size_t i = 1; i < seq.size(); ++i) {
    if (seq[i - 1].failed && seq[i].failed) {
      eq_num += 8.0;
      if (seq[i - 1].type == seq[i].type) eq_num += 3.0;
    }
  }
  const double eq = pairs == 0 ? 0.0 : eq_num / (11.0 * static_cast<double>(pairs));

  double red = 0.0;
  std::size_t run_len = 0;
  int run_type = -1;
  const auto close = [&] {
    if (run_len >= 2) {
      const double r = static_cast<double>(run_len - 1);
      red += r * r / (r + 1.0);
    }
    run_len = 0;
  };
  for (const auto& e : seq) {
    if (!e.failed) {
      close();
    } else if (run_len > 0 && e.type == run_type) {
      ++run_len;
    } else {
      close();
      run_type = e.type;
      run_len = 1;
    }
  }
  close();

  set.at(kind, Measure::EC) = ec;
  set.at(kind, Measure::EQ) = eq;
  set.at(kind, Measure::RED) = red;
}

void validate(const SynthConfig& cfg) {
  const auto bad = [](const std::string& why) { throw ConfigError("synth config: " + why); };
  if (cfg.assignments.empty()) bad("assignments set is empty");
  for (int k : cfg.assignments) {
    if (k < kFirstAssignment || k > kLastAssignment) bad("assignment label outside 3..8");
  }
  if (cfg.n_students < 1) bad("n_students must be positive");
  if (cfg.min_events < 1 || cfg.max_events < cfg.min_events) bad("bad event count range");
  if (cfg.compiler_alphabet < 2 || cfg.compiler_alphabet > kCompilerCatalogSize ||
      cfg.runtime_alphabet < 2 || cfg.runtime_alphabet > kRuntimeCatalogSize) {
    bad("alphabet sizes must lie in 2..8");
  }
  for (double prob : {cfg.repeat_low_skill, cfg.repeat_high_skill, cfg.compile_fail_low_skill,
                      cfg.compile_fail_high_skill, cfg.runtime_fail_low_skill,
                      cfg.runtime_fail_high_skill, cfg.invalid_rate, cfg.long_gap_rate}) {
    if (prob < 0.0 || prob > 1.0 || !std::isfinite(prob)) bad("probability outside [0,1]");
  }
  if (cfg.grade_eq_weight < 0.0 || cfg.grade_runtime_eq_weight < 0.0) {
    bad("grade weights must be non-negative");
  }
  if (!(cfg.grade_noise_sigma >= 0.0) || !std::isfinite(cfg.grade_noise_sigma)) {
    bad("noise sigma must be finite and non-negative");
  }
}

}  // namespace

SynthResult generate_cohort(const SynthConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);
  SynthResult result;

  std::vector<std::string> ids;
  std::vector<double> thetas;
  ids.reserve(static_cast<std::size_t>(cfg.n_students));
  for (int s = 0; s < cfg.n_students; ++s) {
    char id[16];
    std::snprintf(id, sizeof(id), "s%04d", s + 1);
    ids.emplace_back(id);
    thetas.push_back(rng.uniform01());
    result.truth.theta[ids.back()] = thetas.back();
  }

  const Timestamp base =
      std::chrono::sys_days{std::chrono::year{2020} / 9 / 7} + std::chrono::hours{10};

  for (int s = 0; s < cfg.n_students; ++s) {
    const double theta = thetas[static_cast<std::size_t>(s)];
    const double p_fail = lerp(cfg.compile_fail_low_skill, cfg.compile_fail_high_skill, theta);
    const double p_rfail = lerp(cfg.runtime_fail_low_skill, cfg.runtime_fail_high_skill, theta);
    const double rho = lerp(cfg.repeat_low_skill, cfg.repeat_high_skill, theta);

    for (std::size_t ai = 0; ai < cfg.assignments.size(); ++ai) {
      const int hw = cfg.assignments[ai];
      const std::string file = "Hw" + std::to_string(hw) + ".java";
      Timestamp now = base + std::chrono::days{14 * static_cast<int>(ai)} +
                      std::chrono::seconds{131 * s};
      int seq_no = 0;
      const auto next_id = [&] {
        char sid[32];
        std::snprintf(sid, sizeof(sid), "%s-hw%d-%04d",
                      ids[static_cast<std::size_t>(s)].c_str(), hw, seq_no++);
        return std::string(sid);
      };
      const auto advance_clock = [&] {
        const bool long_gap = rng.bernoulli(cfg.long_gap_rate);
        const auto minutes = long_gap ? rng.uniform_int(11, 45) : rng.uniform_int(1, 9);
        now += std::chrono::minutes{minutes} + std::chrono::seconds{rng.uniform_int(0, 59)} +
               std::chrono::milliseconds{rng.uniform_int(0, 999)};
      };

      std::vector<TruthEntry> compiler_seq;
      std::vector<TruthEntry> runtime_seq;
      int prev_compiler_fail = -1;  // type of previous event iff it failed
      int prev_runtime_fail = -1;

      const int n_events = static_cast<int>(rng.uniform_int(cfg.min_events, cfg.max_events));
      for (int i = 0; i < n_events; ++i) {
        if (rng.bernoulli(cfg.invalid_rate)) {
          SnapshotEvent inv;
          inv.student_id = ids[static_cast<std::size_t>(s)];
          inv.assignment = hw;
          inv.timestamp = now;
          inv.snapshot_id = next_id();
          inv.valid = false;
          inv.compile_ok = false;
          inv.compiler_diagnostics = {"required file " + file + " not found"};
          result.events.push_back(std::move(inv));
          advance_clock();
        }

        SnapshotEvent e;
        e.student_id = ids[static_cast<std::size_t>(s)];
        e.assignment = hw;
        e.timestamp = now;
        e.snapshot_id = next_id();
        e.valid = true;

        const auto pick_type = [&](int prev, int alphabet) {
          if (prev >= 0 && rng.bernoulli(rho)) return prev;
          if (prev < 0) return static_cast<int>(rng.uniform_int(0, alphabet - 1));
          // A different type, uniformly.
          const int offset = static_cast<int>(rng.uniform_int(1, alphabet - 1));
          return (prev + offset) % alphabet;
        };

        if (rng.bernoulli(p_fail)) {
          const int type = pick_type(prev_compiler_fail, cfg.compiler_alphabet);
          const int count = 1 + (rng.bernoulli(0.3) ? static_cast<int>(rng.uniform_int(1, 3)) : 0);
          e.compile_ok = false;
          e.compiler_diagnostics = {
              render_compiler_block(file, count, type, rng, cfg.compiler_alphabet)};
          compiler_seq.push_back({true, type, count});
          prev_compiler_fail = type;
        } else {
          e.compile_ok = true;
          compiler_seq.push_back({false, -1, 0});
          prev_compiler_fail = -1;
          if (rng.bernoulli(p_rfail)) {
            const int type = pick_type(prev_runtime_fail, cfg.runtime_alphabet);
            const int count = 1 + (rng.bernoulli(0.25) ? 1 : 0);
            for (int t = 0; t < count; ++t) {
              const int tt = t == 0 ? type : static_cast<int>(rng.uniform_int(0, cfg.runtime_alphabet - 1));
              e.runtime_traces.push_back(render_trace(file, tt, rng));
            }
            e.tests_passed = rng.uniform_int(0, 10);
            e.tests_failed = rng.uniform_int(1, 5);
            runtime_seq.push_back({true, type, count});
            prev_runtime_fail = type;
          } else {
            e.tests_passed = rng.uniform_int(5, 30);
            e.tests_failed = rng.uniform_int(0, 2);
            runtime_seq.push_back({false, -1, 0});
            prev_runtime_fail = -1;
          }
        }
        result.events.push_back(std::move(e));
        advance_clock();
      }

      MeasureSet set;
      score_stream(compiler_seq, ErrorKind::Compiler, set);
      score_stream(runtime_seq, ErrorKind::Runtime, set);
      result.truth.cells.emplace(CohortKey{ids[static_cast<std::size_t>(s)], hw}, set);
    }
  }

  // Grades from the true EQ values (exam 1 covers hw <= 4, exam 2 all).
  for (int s = 0; s < cfg.n_students; ++s) {
    const std::string& id = ids[static_cast<std::size_t>(s)];
    const auto mean_eq = [&](ErrorKind kind, bool exam1_scope) {
      double sum = 0.0;
      int count = 0;
      for (int hw : cfg.assignments) {
        if (exam1_scope && hw > 4) continue;
        sum += result.truth.cells.at(CohortKey{id, hw}).at(kind, Measure::EQ);
        ++count;
      }
      return count == 0 ? 0.0 : sum / count;
    };
    const bool has_early = std::any_of(cfg.assignments.begin(), cfg.assignments.end(),
                                       [](int k) { return k <= 4; });

    GradeRow row;
    const double e1 = cfg.grade_base -
                      cfg.grade_eq_weight * mean_eq(ErrorKind::Compiler, has_early) -
                      cfg.grade_runtime_eq_weight * mean_eq(ErrorKind::Runtime, has_early) +
                      cfg.grade_noise_sigma * rng.normal();
    const double e2 = cfg.grade_base -
                      cfg.grade_eq_weight * mean_eq(ErrorKind::Compiler, false) -
                      cfg.grade_runtime_eq_weight * mean_eq(ErrorKind::Runtime, false) +
                      cfg.grade_noise_sigma * rng.normal();
    row.exam1 = round1(clamp_grade(e1));
    row.exam2 = round1(clamp_grade(e2));
    const double theta = thetas[static_cast<std::size_t>(s)];
    for (int k = kFirstAssignment; k <= kLastAssignment; ++k) {
      const bool in_scope =
          std::find(cfg.assignments.begin(), cfg.assignments.end(), k) != cfg.assignments.end();
      row.hw_points[k] =
          in_scope ? round1(clamp_grade(55.0 + 45.0 * theta + 4.0 * rng.normal())) : 0.0;
    }
    result.grades.rows.emplace(id, std::move(row));
  }

  return result;
}

Cohort SynthResult::cohort(Duration idle_gap) const {
  Cohort c = sessionize(events, idle_gap);
  c.grades = grades;
  return c;
}

void write_ground_truth_csv(std::ostream& out, const GroundTruth& truth) {
  csv::write_row(out, {"student_id", "assignment", "measure", "kind", "value"});
  char buf[64];
  for (const auto& [key, set] : truth.cells) {
    for (Measure m : {Measure::EC, Measure::EQ, Measure::RED}) {
      for (ErrorKind kind : {ErrorKind::Compiler, ErrorKind::Runtime}) {
        const double v = set.at(kind, m);
        if (m == Measure::EC) {
          std::snprintf(buf, sizeof(buf), "%.0f", v);
        } else {
          std::snprintf(buf, sizeof(buf), "%.12g", v);
        }
        csv::write_row(out, {key.student_id, std::to_string(key.assignment), to_string(m),
                             to_string(kind), buf});
      }
    }
  }
}

void write_grades_csv(std::ostream& out, const GradeBook& grades) {
  csv::write_row(out, {"student_id", "exam1", "exam2", "hw3", "hw4", "hw5", "hw6", "hw7", "hw8"});
  char buf[64];
  const auto cell = [&](std::optional<double> v) -> std::string {
    if (!v) return "";
    std::snprintf(buf, sizeof(buf), "%.12g", *v);
    return buf;
  };
  for (const auto& [id, row] : grades.rows) {
    std::vector<std::string> fields = {id, cell(row.exam1), cell(row.exam2)};
    for (int k = kFirstAssignment; k <= kLastAssignment; ++k) {
      auto it = row.hw_points.find(k);
      fields.push_back(cell(it == row.hw_points.end() ? std::optional<double>{}
                                                      : std::optional<double>{it->second}));
    }
    csv::write_row(out, fields);
  }
  (void)buf;
}

}  // namespace errql
