#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "errql/features.hpp"

namespace errql {

// Wilcoxon score vector a(i) = sqrt(12) * (i/(n+1) - 1/2), i = 1..n.
// Centered (sums to zero) and strictly increasing.
struct ScoreVector {
  int n = 0;
  Eigen::VectorXd a;
};

ScoreVector wilcoxon_scores(int n);

// Midranks (1-based, ties averaged) of a vector.
Eigen::VectorXd midranks(const Eigen::VectorXd& v);

// Jaeckel dispersion D = sum_i a(R(e_i)) * e_i over rank-scored residuals.
// Non-negative; invariant to adding a constant to the residuals.
double dispersion(const Eigen::VectorXd& residuals);
double dispersion(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                  const Eigen::VectorXd& beta);

struct OlsFit {
  Eigen::VectorXd slopes;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Closed-form least squares with intercept; rank-deficient designs throw
// NumericError naming the dependent columns. Used as cross-check oracle
// and as the rank-fit initializer.
OlsFit fit_ols_baseline(const DesignMatrix& dm);
OlsFit fit_ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
               const std::vector<std::string>& labels);

enum class TauMethod { Window, Bootstrap };
enum class LogBase { Base10, Natural };

// Scale parameter of the Wilcoxon-score fit (the inference analogue of
// sigma in least squares). Window estimator: density of pairwise residual
// differences at zero over a bandwidth ~ n^(-1/5), with a degrees-of-
// freedom correction. Bootstrap method: median of 200 seeded window
// estimates on resampled residuals. Throws NumericError when all
// residuals are identical.
double estimate_tau(const Eigen::VectorXd& residuals, int p,
                    TauMethod method = TauMethod::Window);

struct CoefTest {
  std::string label;
  double estimate = 0.0;
  double std_error = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
  std::string stars;
};

struct FTest {
  double stat = 0.0;
  int df1 = 0;
  int df2 = 0;
  double p_value = 1.0;
  std::string stars;
};

struct FitOptions {
  double tolerance = 1e-8;      // relative dispersion improvement
  int max_iterations = 500;     // polytope iterations per restart, scaled by p
  int max_restarts = 8;
  TauMethod tau_method = TauMethod::Window;
  LogBase bic_log = LogBase::Base10;
};

struct RankFit {
  Eigen::VectorXd beta;
  double intercept = 0.0;           // median of residuals at beta
  double dispersion_at_fit = 0.0;   // D(beta_hat)
  double dispersion_null = 0.0;     // D at the zero-slope model
  double tau_hat = 0.0;
  double robust_r2 = 0.0;
  FTest model_f;
  std::vector<CoefTest> coef_tests;
  double bic_prime = 0.0;
  bool converged = false;
  int iterations = 0;

  double reduction_in_dispersion() const { return dispersion_null - dispersion_at_fit; }
};

struct InferenceReport {
  std::vector<CoefTest> coefficients;
  std::string model_stars;
};

// (***) < 0.001 < (**) < 0.01 < (*) < 0.05; empty otherwise.
std::string significance_stars(double p_value);

// Minimizes the convex dispersion over the slope vector with a
// deterministic derivative-free polytope search started at the OLS
// solution (restarted from shrinking perturbations), then fills in scale,
// inference and model-comparison statistics.
RankFit fit_rank_regression(const DesignMatrix& dm, const FitOptions& opts = {});

InferenceReport coefficient_tests(const RankFit& fit, const DesignMatrix& dm);

// Drop-in-dispersion model test: F = (RD/p) / (tau/2) on (p, n-p-1).
FTest drop_in_dispersion_test(const RankFit& fit, const DesignMatrix& dm);

// RD / (RD + (n-p-1) * tau/2), clamped to [0,1].
double robust_r_squared(const RankFit& fit, const DesignMatrix& dm);

// BIC' = n*log(1-R2) + p*log(n); base-10 logarithms by default, natural
// log selectable. More negative is better. Throws on r2 outside [0,1).
double bic_prime(int n, double r2, int p, LogBase base = LogBase::Base10);

nlohmann::json fit_to_json(const ModelSpec& spec, const RankFit& fit);
std::pair<ModelSpec, RankFit> fit_from_json(const nlohmann::json& j);

}  // namespace errql
