#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "errql/measures.hpp"

namespace errql {

// Synthetic-cohort parameters. Each student draws a latent skill theta in
// [0,1]; failure rates and the propensity to repeat the previous error
// type interpolate linearly between the *_low_skill (theta=0) and
// *_high_skill (theta=1) endpoints. Exam grades follow
//   grade = base - eq_weight * mean(compiler EQ)
//                - runtime_eq_weight * mean(runtime EQ) + noise,
// clamped to [0,100], so higher error repetition drags grades down.
struct SynthConfig {
  std::uint64_t seed = 42;
  int n_students = 280;
  std::vector<int> assignments = {3, 4, 5, 6, 7, 8};

  double repeat_low_skill = 0.85;
  double repeat_high_skill = 0.05;
  double compile_fail_low_skill = 0.65;
  double compile_fail_high_skill = 0.10;
  double runtime_fail_low_skill = 0.50;
  double runtime_fail_high_skill = 0.08;

  int min_events = 8;
  int max_events = 40;
  double invalid_rate = 0.03;
  double long_gap_rate = 0.15;

  double grade_base = 98.0;
  double grade_eq_weight = 60.0;          // g1, on compiler EQ
  double grade_runtime_eq_weight = 40.0;  // g2, on runtime EQ
  double grade_noise_sigma = 3.0;

  int compiler_alphabet = 4;  // 2..8 canonical compiler error types
  int runtime_alphabet = 4;   // 2..8 exception classes
};

// True measure values per cell, scored at generation time by a direct
// scan of the generated sequences (independent of the measures module).
struct GroundTruth {
  std::map<CohortKey, MeasureSet> cells;
  std::map<std::string, double> theta;
};

struct SynthResult {
  std::vector<SnapshotEvent> events;  // includes the invalid snapshots
  GradeBook grades;
  GroundTruth truth;

  Cohort cohort(Duration idle_gap = kDefaultIdleGap) const;
};

// Deterministic for a fixed config (single pinned random stream).
SynthResult generate_cohort(const SynthConfig& cfg);

// Same layout as the measures export, for direct diffing.
void write_ground_truth_csv(std::ostream& out, const GroundTruth& truth);
void write_grades_csv(std::ostream& out, const GradeBook& grades);

}  // namespace errql
