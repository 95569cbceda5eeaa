#include "errql/rankfit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "errql/errors.hpp"
#include "errql/rng.hpp"

namespace errql {

namespace {

constexpr double kSqrt12 = 3.4641016151377545870548926830117;
constexpr double kTauFloor = 1e-9;

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + static_cast<long>(n / 2), v.end());
  double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<long>(n / 2));
  return 0.5 * (lo + hi);
}

double median_abs_deviation(const Eigen::VectorXd& v) {
  std::vector<double> tmp(v.data(), v.data() + v.size());
  const double med = median_of(tmp);
  for (double& x : tmp) x = std::abs(x - med);
  return median_of(tmp);
}

}  // namespace

ScoreVector wilcoxon_scores(int n) {
  if (n < 2) throw NumericError("wilcoxon_scores requires n >= 2");
  ScoreVector s;
  s.n = n;
  s.a.resize(n);
  for (int i = 1; i <= n; ++i) {
    s.a(i - 1) = kSqrt12 * (static_cast<double>(i) / (n + 1) - 0.5);
  }
  return s;
}

Eigen::VectorXd midranks(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return v(a) < v(b); });

  Eigen::VectorXd ranks(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && v(idx[static_cast<std::size_t>(j + 1)]) == v(idx[static_cast<std::size_t>(i)])) ++j;
    const double mid = 0.5 * static_cast<double>((i + 1) + (j + 1));
    for (int k = i; k <= j; ++k) ranks(idx[static_cast<std::size_t>(k)]) = mid;
    i = j + 1;
  }
  return ranks;
}

double dispersion(const Eigen::VectorXd& residuals) {
  const int n = static_cast<int>(residuals.size());
  if (n == 0) return 0.0;
  const Eigen::VectorXd ranks = midranks(residuals);
  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    d += kSqrt12 * (ranks(i) / (n + 1) - 0.5) * residuals(i);
  }
  return std::max(d, 0.0);
}

double dispersion(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                  const Eigen::VectorXd& beta) {
  if (X.cols() == 0) return dispersion(y);
  return dispersion(y - X * beta);
}

OlsFit fit_ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
               const std::vector<std::string>& labels) {
  const int n = static_cast<int>(y.size());
  const int p = static_cast<int>(X.cols());
  Eigen::MatrixXd Xf(n, p + 1);
  Xf.col(0).setOnes();
  if (p > 0) Xf.rightCols(p) = X;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xf);
  qr.setThreshold(1e-10);
  if (qr.rank() < p + 1) {
    std::string bad;
    const auto perm = qr.colsPermutation().indices();
    for (int k = qr.rank(); k < p + 1; ++k) {
      const int col = perm(k);
      if (!bad.empty()) bad += ", ";
      bad += col == 0 ? std::string("intercept")
                      : (static_cast<std::size_t>(col - 1) < labels.size()
                             ? labels[static_cast<std::size_t>(col - 1)]
                             : "x" + std::to_string(col));
    }
    throw NumericError("design matrix is rank deficient; dependent columns: " + bad);
  }

  const Eigen::VectorXd coef = qr.solve(y);
  OlsFit fit;
  fit.intercept = coef(0);
  fit.slopes = coef.tail(p);

  const Eigen::VectorXd resid = y - Xf * coef;
  const double ss_res = resid.squaredNorm();
  const double ss_tot = (y.array() - y.mean()).square().sum();
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
  return fit;
}

OlsFit fit_ols_baseline(const DesignMatrix& dm) { return fit_ols(dm.y, dm.X, dm.labels); }

double estimate_tau(const Eigen::VectorXd& residuals, int p, TauMethod method) {
  const int n = static_cast<int>(residuals.size());
  if (n <= p + 1) throw NumericError("estimate_tau requires n > p + 1");

  std::vector<double> e(residuals.data(), residuals.data() + n);
  std::sort(e.begin(), e.end());
  const double spread = e.back() - e.front();
  if (spread == 0.0) throw NumericError("degenerate scale: all residuals identical");

  double scale = 1.4826 * median_abs_deviation(residuals);
  if (scale <= 0.0) {
    const double q1 = e[static_cast<std::size_t>(n) / 4];
    const double q3 = e[(3 * static_cast<std::size_t>(n)) / 4];
    scale = (q3 - q1) / 1.349;
  }
  if (scale <= 0.0) scale = spread / 4.0;

  const auto window_estimate = [p](std::vector<double> sorted, double s) {
    const int m = static_cast<int>(sorted.size());
    double h = std::max(s * std::pow(static_cast<double>(m), -0.2), 1e-9);
    double pairs_in_window = 0.0;
    for (int widen = 0; widen < 60; ++widen) {
      pairs_in_window = 0.0;
      std::size_t lo = 0;
      for (std::size_t hi = 1; hi < sorted.size(); ++hi) {
        while (sorted[hi] - sorted[lo] >= h) ++lo;
        pairs_in_window += static_cast<double>(hi - lo);
      }
      if (pairs_in_window > 0.0) break;
      h *= 2.0;
    }
    const double total_pairs = 0.5 * m * (m - 1.0);
    const double density_at_zero = pairs_in_window / (total_pairs * 2.0 * h);
    const double df_correction = std::sqrt(static_cast<double>(m) / (m - p - 1));
    return df_correction / (kSqrt12 * density_at_zero);
  };

  if (method == TauMethod::Window) {
    return std::max(window_estimate(e, scale), kTauFloor);
  }

  // Bootstrap: median of window estimates over seeded resamples.
  constexpr int kResamples = 200;
  Rng rng(0x7a75u);
  std::vector<double> estimates;
  estimates.reserve(kResamples);
  std::vector<double> sample(static_cast<std::size_t>(n));
  for (int b = 0; b < kResamples; ++b) {
    for (auto& x : sample) {
      x = e[static_cast<std::size_t>(rng.uniform_int(0, n - 1))];
    }
    std::sort(sample.begin(), sample.end());
    if (sample.back() - sample.front() == 0.0) continue;
    estimates.push_back(window_estimate(sample, scale));
  }
  if (estimates.empty()) throw NumericError("degenerate scale in every bootstrap resample");
  return std::max(median_of(std::move(estimates)), kTauFloor);
}

std::string significance_stars(double p_value) {
  if (p_value < 0.001) return "***";
  if (p_value < 0.01) return "**";
  if (p_value < 0.05) return "*";
  return "";
}

namespace {

// Nelder-Mead over the dispersion surface. The objective is convex and
// piecewise linear, so plain simplex steps plus shrinking restarts reach
// the minimizer reliably for the p <= 12 designs handled here.
struct PolytopeResult {
  Eigen::VectorXd x;
  double fx = 0.0;
  int iterations = 0;
};

template <typename F>
PolytopeResult nelder_mead(const F& f, const Eigen::VectorXd& x0,
                           const Eigen::VectorXd& step, int max_iter) {
  const int p = static_cast<int>(x0.size());
  const int m = p + 1;
  std::vector<Eigen::VectorXd> xs(static_cast<std::size_t>(m), x0);
  std::vector<double> fs(static_cast<std::size_t>(m));
  for (int j = 0; j < p; ++j) xs[static_cast<std::size_t>(j + 1)](j) += step(j);
  for (int j = 0; j < m; ++j) fs[static_cast<std::size_t>(j)] = f(xs[static_cast<std::size_t>(j)]);

  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  const auto sort_simplex = [&] {
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fs[static_cast<std::size_t>(a)] < fs[static_cast<std::size_t>(b)]; });
  };

  int iter = 0;
  for (; iter < max_iter; ++iter) {
    sort_simplex();
    const int best = order[0];
    const int worst = order[static_cast<std::size_t>(m - 1)];
    const int second_worst = order[static_cast<std::size_t>(m - 2)];

    const double fbest = fs[static_cast<std::size_t>(best)];
    const double fworst = fs[static_cast<std::size_t>(worst)];
    if (fworst - fbest <= 1e-12 * (std::abs(fbest) + 1e-300)) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(p);
    for (int j = 0; j < m; ++j) {
      if (j != worst) centroid += xs[static_cast<std::size_t>(j)];
    }
    centroid /= static_cast<double>(p);

    const Eigen::VectorXd reflected = centroid + (centroid - xs[static_cast<std::size_t>(worst)]);
    const double fr = f(reflected);
    if (fr < fbest) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - xs[static_cast<std::size_t>(worst)]);
      const double fe = f(expanded);
      if (fe < fr) {
        xs[static_cast<std::size_t>(worst)] = expanded;
        fs[static_cast<std::size_t>(worst)] = fe;
      } else {
        xs[static_cast<std::size_t>(worst)] = reflected;
        fs[static_cast<std::size_t>(worst)] = fr;
      }
      continue;
    }
    if (fr < fs[static_cast<std::size_t>(second_worst)]) {
      xs[static_cast<std::size_t>(worst)] = reflected;
      fs[static_cast<std::size_t>(worst)] = fr;
      continue;
    }
    const bool outside = fr < fworst;
    const Eigen::VectorXd contracted =
        outside ? centroid + 0.5 * (reflected - centroid)
                : centroid + 0.5 * (xs[static_cast<std::size_t>(worst)] - centroid);
    const double fc = f(contracted);
    if (fc < std::min(fr, fworst)) {
      xs[static_cast<std::size_t>(worst)] = contracted;
      fs[static_cast<std::size_t>(worst)] = fc;
      continue;
    }
    // Shrink toward the best vertex.
    for (int j = 0; j < m; ++j) {
      if (j == order[0]) continue;
      xs[static_cast<std::size_t>(j)] =
          xs[static_cast<std::size_t>(order[0])] +
          0.5 * (xs[static_cast<std::size_t>(j)] - xs[static_cast<std::size_t>(order[0])]);
      fs[static_cast<std::size_t>(j)] = f(xs[static_cast<std::size_t>(j)]);
    }
  }

  sort_simplex();
  PolytopeResult result;
  result.x = xs[static_cast<std::size_t>(order[0])];
  result.fx = fs[static_cast<std::size_t>(order[0])];
  result.iterations = iter;
  return result;
}

Eigen::VectorXd column_sds(const Eigen::MatrixXd& X) {
  Eigen::VectorXd sd(X.cols());
  for (int j = 0; j < X.cols(); ++j) {
    const double mean = X.col(j).mean();
    sd(j) = std::sqrt((X.col(j).array() - mean).square().sum() /
                      std::max<int>(1, static_cast<int>(X.rows()) - 1));
  }
  return sd;
}

}  // namespace

RankFit fit_rank_regression(const DesignMatrix& dm, const FitOptions& opts) {
  const int n = dm.n();
  const int p = dm.p();
  if (p < 1) throw NumericError("fit_rank_regression requires at least one predictor");
  if (n <= p + 1) {
    throw NumericError("fit_rank_regression requires n > p + 1 (n=" + std::to_string(n) +
                       ", p=" + std::to_string(p) + ")");
  }

  // Rank check + initializer in one step.
  const OlsFit ols = fit_ols(dm.y, dm.X, dm.labels);

  const auto objective = [&](const Eigen::VectorXd& beta) {
    return dispersion(dm.y - dm.X * beta);
  };

  // Per-coordinate simplex steps sized from the data scale so the search
  // path is equivariant under rescaling of y or of predictor columns.
  const Eigen::VectorXd sx = column_sds(dm.X);
  const double sy = std::sqrt((dm.y.array() - dm.y.mean()).square().sum() /
                              std::max(1, n - 1));
  Eigen::VectorXd base_step(p);
  for (int j = 0; j < p; ++j) {
    const double scale_floor = sx(j) > 0.0 ? 2.5e-4 * sy / sx(j) : 2.5e-4;
    base_step(j) = std::max(0.05 * std::abs(ols.slopes(j)), scale_floor);
  }

  RankFit fit;
  fit.dispersion_null = dispersion(dm.y);

  Eigen::VectorXd best = ols.slopes;
  double best_f = objective(best);
  {
    // The zero-slope model is always a candidate; keeps D(fit) <= D(null).
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(p);
    if (fit.dispersion_null < best_f) {
      best = zero;
      best_f = fit.dispersion_null;
    }
  }

  const int per_restart_iters = opts.max_iterations * std::max(1, p);
  int total_iters = 0;
  bool converged = false;
  double shrink = 1.0;
  for (int restart = 0; restart < opts.max_restarts; ++restart) {
    const PolytopeResult res = nelder_mead(objective, best, shrink * base_step, per_restart_iters);
    total_iters += res.iterations;
    const double improvement = best_f - res.fx;
    if (res.fx < best_f) {
      best = res.x;
      best_f = res.fx;
    }
    if (improvement <= opts.tolerance * std::max(best_f, 1e-300)) {
      converged = true;
      break;
    }
    shrink *= 0.25;
  }

  fit.beta = best;
  fit.dispersion_at_fit = best_f;
  fit.converged = converged;
  fit.iterations = total_iters;

  const Eigen::VectorXd residuals = dm.y - dm.X * fit.beta;
  {
    std::vector<double> r(residuals.data(), residuals.data() + n);
    fit.intercept = median_of(std::move(r));
  }

  try {
    fit.tau_hat = estimate_tau(residuals, p, opts.tau_method);
  } catch (const NumericError&) {
    fit.tau_hat = 1e-9;  // exact fit: no residual scale left
  }

  fit.model_f = drop_in_dispersion_test(fit, dm);
  fit.robust_r2 = robust_r_squared(fit, dm);
  fit.bic_prime = bic_prime(n, std::min(fit.robust_r2, 1.0 - 1e-15), p, opts.bic_log);
  fit.coef_tests = coefficient_tests(fit, dm).coefficients;
  return fit;
}

InferenceReport coefficient_tests(const RankFit& fit, const DesignMatrix& dm) {
  const int n = dm.n();
  const int p = dm.p();
  if (fit.tau_hat <= 0.0) throw NumericError("coefficient_tests: tau_hat is not positive");

  Eigen::MatrixXd Xc = dm.X;
  for (int j = 0; j < p; ++j) Xc.col(j).array() -= Xc.col(j).mean();
  const Eigen::MatrixXd gram = Xc.transpose() * Xc;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (!lu.isInvertible()) {
    throw NumericError("coefficient_tests: centered Gram matrix is singular");
  }
  const Eigen::MatrixXd gram_inv = lu.inverse();

  const boost::math::students_t tdist(n - p - 1);
  InferenceReport report;
  for (int j = 0; j < p; ++j) {
    CoefTest test;
    test.label = dm.labels[static_cast<std::size_t>(j)];
    test.estimate = fit.beta(j);
    test.std_error = fit.tau_hat * std::sqrt(gram_inv(j, j));
    test.t_stat = test.estimate / test.std_error;
    test.p_value = 2.0 * boost::math::cdf(boost::math::complement(tdist, std::abs(test.t_stat)));
    test.stars = significance_stars(test.p_value);
    report.coefficients.push_back(std::move(test));
  }
  report.model_stars = fit.model_f.stars;
  return report;
}

FTest drop_in_dispersion_test(const RankFit& fit, const DesignMatrix& dm) {
  const int n = dm.n();
  const int p = dm.p();
  if (fit.tau_hat <= 0.0) throw NumericError("drop_in_dispersion_test: degenerate tau");

  FTest f;
  f.df1 = p;
  f.df2 = n - p - 1;
  const double rd = std::max(fit.reduction_in_dispersion(), 0.0);
  f.stat = (rd / p) / (fit.tau_hat / 2.0);
  const boost::math::fisher_f fdist(f.df1, f.df2);
  f.p_value = boost::math::cdf(boost::math::complement(fdist, f.stat));
  f.stars = significance_stars(f.p_value);
  return f;
}

double robust_r_squared(const RankFit& fit, const DesignMatrix& dm) {
  const int n = dm.n();
  const int p = dm.p();
  const double rd = std::max(fit.reduction_in_dispersion(), 0.0);
  const double denom = rd + (n - p - 1) * fit.tau_hat / 2.0;
  if (denom <= 0.0) return 0.0;
  return std::clamp(rd / denom, 0.0, 1.0);
}

double bic_prime(int n, double r2, int p, LogBase base) {
  if (n < 1 || p < 0) throw NumericError("bic_prime: bad dimensions");
  if (r2 < 0.0 || r2 >= 1.0) {
    throw NumericError("bic_prime: r2 must lie in [0, 1), got " + std::to_string(r2));
  }
  if (base == LogBase::Base10) {
    return n * std::log10(1.0 - r2) + p * std::log10(static_cast<double>(n));
  }
  return n * std::log(1.0 - r2) + p * std::log(static_cast<double>(n));
}

nlohmann::json fit_to_json(const ModelSpec& spec, const RankFit& fit) {
  nlohmann::json beta = nlohmann::json::object();
  nlohmann::json tests = nlohmann::json::array();
  const auto labels = spec.predictor_labels();
  for (std::size_t j = 0; j < labels.size(); ++j) {
    beta[labels[j]] = fit.beta(static_cast<int>(j));
  }
  for (const auto& t : fit.coef_tests) {
    tests.push_back({{"label", t.label},
                     {"est", t.estimate},
                     {"se", t.std_error},
                     {"t", t.t_stat},
                     {"p", t.p_value},
                     {"stars", t.stars}});
  }
  return {{"spec",
           {{"exam", spec.exam},
            {"family", to_string(spec.family)},
            {"scope", to_string(spec.scope)},
            {"id", spec.id()}}},
          {"beta", beta},
          {"intercept", fit.intercept},
          {"dispersion_at_fit", fit.dispersion_at_fit},
          {"dispersion_null", fit.dispersion_null},
          {"tau_hat", fit.tau_hat},
          {"r2", fit.robust_r2},
          {"f",
           {{"stat", fit.model_f.stat},
            {"df1", fit.model_f.df1},
            {"df2", fit.model_f.df2},
            {"p", fit.model_f.p_value}}},
          {"bic_prime", fit.bic_prime},
          {"coef_tests", tests},
          {"converged", fit.converged},
          {"iterations", fit.iterations}};
}

std::pair<ModelSpec, RankFit> fit_from_json(const nlohmann::json& j) {
  ModelSpec spec;
  const auto& js = j.at("spec");
  spec.exam = js.at("exam").get<int>();
  const std::string family = js.at("family").get<std::string>();
  if (family == "EC") spec.family = PredictorFamily::EC;
  else if (family == "EQ") spec.family = PredictorFamily::EQ;
  else if (family == "RED") spec.family = PredictorFamily::RED;
  else if (family == "HW grades") spec.family = PredictorFamily::HWGrades;
  else throw ParseError("unknown predictor family in fit JSON: " + family);
  const std::string scope = js.at("scope").get<std::string>();
  if (scope == "compiler") spec.scope = ErrorScope::CompilerOnly;
  else if (scope == "compiler + runtime") spec.scope = ErrorScope::CompilerAndRuntime;
  else if (scope == "n/a") spec.scope = ErrorScope::NotApplicable;
  else throw ParseError("unknown error scope in fit JSON: " + scope);

  RankFit fit;
  const auto labels = spec.predictor_labels();
  fit.beta.resize(static_cast<int>(labels.size()));
  for (std::size_t k = 0; k < labels.size(); ++k) {
    fit.beta(static_cast<int>(k)) = j.at("beta").at(labels[k]).get<double>();
  }
  fit.intercept = j.at("intercept").get<double>();
  fit.dispersion_at_fit = j.at("dispersion_at_fit").get<double>();
  fit.dispersion_null = j.at("dispersion_null").get<double>();
  fit.tau_hat = j.at("tau_hat").get<double>();
  fit.robust_r2 = j.at("r2").get<double>();
  fit.model_f.stat = j.at("f").at("stat").get<double>();
  fit.model_f.df1 = j.at("f").at("df1").get<int>();
  fit.model_f.df2 = j.at("f").at("df2").get<int>();
  fit.model_f.p_value = j.at("f").at("p").get<double>();
  fit.model_f.stars = significance_stars(fit.model_f.p_value);
  fit.bic_prime = j.at("bic_prime").get<double>();
  fit.converged = j.at("converged").get<bool>();
  fit.iterations = j.at("iterations").get<int>();
  for (const auto& t : j.at("coef_tests")) {
    CoefTest test;
    test.label = t.at("label").get<std::string>();
    test.estimate = t.at("est").get<double>();
    test.std_error = t.at("se").get<double>();
    test.t_stat = t.at("t").get<double>();
    test.p_value = t.at("p").get<double>();
    test.stars = significance_stars(test.p_value);
    fit.coef_tests.push_back(std::move(test));
  }
  return {spec, fit};
}

}  // namespace errql
