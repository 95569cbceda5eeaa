#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "errql/errors.hpp"
#include "errql/rankfit.hpp"
#include "fit_helpers.hpp"

using namespace errql;
using errql::testing::make_design;

namespace {
constexpr double kTauNormal = 1.0233267079464885;  // sqrt(pi/3)
}

TEST_CASE("wilcoxon scores are centered, increasing, and match the n=2,3 values") {
  const ScoreVector s2 = wilcoxon_scores(2);
  CHECK(s2.a(0) == doctest::Approx(-0.57735026919).epsilon(1e-10));
  CHECK(s2.a(1) == doctest::Approx(0.57735026919).epsilon(1e-10));

  const ScoreVector s3 = wilcoxon_scores(3);
  CHECK(s3.a(1) == doctest::Approx(0.0));

  for (int n : {2, 3, 10, 97, 280}) {
    const ScoreVector s = wilcoxon_scores(n);
    CHECK(std::abs(s.a.sum()) < 1e-12);
    for (int i = 1; i < n; ++i) CHECK(s.a(i) > s.a(i - 1));
  }
  CHECK_THROWS_AS(wilcoxon_scores(1), NumericError);
}

TEST_CASE("dispersion of constant residuals is zero") {
  Eigen::VectorXd r = Eigen::VectorXd::Constant(9, 3.25);
  CHECK(dispersion(r) == 0.0);
}

TEST_CASE("dispersion hand example: y = (1,2,3) with no predictors") {
  Eigen::VectorXd y(3);
  y << 1, 2, 3;
  CHECK(dispersion(y) == doctest::Approx(std::sqrt(12.0) * 0.5).epsilon(1e-12));
  CHECK(dispersion(y, Eigen::MatrixXd(3, 0), Eigen::VectorXd(0)) ==
        doctest::Approx(std::sqrt(12.0) * 0.5).epsilon(1e-12));
}

TEST_CASE("dispersion ignores a constant shift") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd r(20);
    for (int i = 0; i < 20; ++i) r(i) = rng.normal();
    const double base = dispersion(r);
    CHECK(dispersion((r.array() + 17.5).matrix()) == doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("dispersion is convex along random segments") {
  Rng rng(23);
  const auto dm = make_design(60, (Eigen::VectorXd(2) << 2.0, -1.0).finished(), 0.0, 1.0, rng);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd b1(2), b2(2);
    b1 << 8.0 * rng.normal(), 8.0 * rng.normal();
    b2 << 8.0 * rng.normal(), 8.0 * rng.normal();
    const double lambda = rng.uniform01();
    const double left = dispersion(dm.y, dm.X, lambda * b1 + (1.0 - lambda) * b2);
    const double right =
        lambda * dispersion(dm.y, dm.X, b1) + (1.0 - lambda) * dispersion(dm.y, dm.X, b2);
    CHECK(left <= right + 1e-9);
  }
}

TEST_CASE("OLS recovers exact lines and the hand-computed 3-point fit") {
  DesignMatrix dm;
  dm.spec = ModelSpec{1, PredictorFamily::EC, ErrorScope::CompilerOnly};
  dm.labels = {"x"};
  dm.X.resize(3, 1);
  dm.y.resize(3);
  dm.X << 0, 1, 2;
  dm.y << 1, 3, 5;  // y = 2x + 1
  dm.student_ids = {"a", "b", "c"};
  const OlsFit exact = fit_ols_baseline(dm);
  CHECK(exact.slopes(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(exact.intercept == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(exact.r_squared == doctest::Approx(1.0).epsilon(1e-12));

  dm.y << 0, 1, 4;
  const OlsFit hand = fit_ols_baseline(dm);
  CHECK(hand.slopes(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(hand.intercept == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("OLS is invariant under row permutation") {
  Rng rng(5);
  const auto dm = make_design(40, (Eigen::VectorXd(2) << 1.5, -2.5).finished(), 3.0, 0.5, rng);
  DesignMatrix shuffled = dm;
  // Reverse the rows.
  shuffled.X = dm.X.colwise().reverse().eval();
  shuffled.y = dm.y.reverse().eval();
  const OlsFit a = fit_ols_baseline(dm);
  const OlsFit b = fit_ols_baseline(shuffled);
  CHECK((a.slopes - b.slopes).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(a.intercept == doctest::Approx(b.intercept).epsilon(1e-10));
}

TEST_CASE("rank-deficient designs are rejected with the dependent column named") {
  DesignMatrix dm;
  dm.spec = ModelSpec{1, PredictorFamily::EC, ErrorScope::CompilerOnly};
  dm.labels = {"c3", "c4"};
  dm.X.resize(5, 2);
  dm.y.resize(5);
  for (int i = 0; i < 5; ++i) {
    dm.X(i, 0) = i;
    dm.X(i, 1) = 2.0 * i;  // exact multiple of column 0
    dm.y(i) = i;
    dm.student_ids.push_back("s" + std::to_string(i));
  }
  try {
    fit_ols_baseline(dm);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    // Either column of the collinear pair may be reported as dependent.
    const std::string what = e.what();
    CHECK((what.find("c3") != std::string::npos || what.find("c4") != std::string::npos));
  }
  CHECK_THROWS_AS(fit_rank_regression(dm), NumericError);
}

TEST_CASE("noiseless linear data is recovered exactly") {
  Rng rng(101);
  Eigen::VectorXd beta(3);
  beta << 4.0, -2.0, 0.5;
  const auto dm = make_design(50, beta, 7.0, 0.0, rng);
  const RankFit fit = fit_rank_regression(dm);
  CHECK(fit.converged);
  CHECK((fit.beta - beta).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(fit.dispersion_at_fit < 1e-8);
  CHECK(fit.intercept == doctest::Approx(7.0).epsilon(1e-6));
  CHECK(fit.robust_r2 > 1.0 - 1e-3);
}

TEST_CASE("rank fit tracks OLS on clean Gaussian data") {
  Rng rng(202);
  Eigen::VectorXd beta(3);
  beta << 10.0, -8.0, 6.0;
  const auto dm = make_design(200, beta, 2.0, 1.0, rng);
  const RankFit fit = fit_rank_regression(dm);
  const OlsFit ols = fit_ols_baseline(dm);
  REQUIRE(fit.converged);
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(fit.beta(j) - ols.slopes(j)) < 0.05 * std::abs(ols.slopes(j)));
  }
}

TEST_CASE("rank fit resists gross outliers better than OLS") {
  int rank_wins = 0;
  Eigen::VectorXd beta(2);
  beta << 5.0, -3.0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(3000 + static_cast<std::uint64_t>(trial));
    const auto dm = make_design(120, beta, 1.0, 1.0, rng, /*outlier_frac=*/0.10);
    const RankFit fit = fit_rank_regression(dm);
    const OlsFit ols = fit_ols_baseline(dm);
    const double rank_err = (fit.beta - beta).norm();
    const double ols_err = (ols.slopes - beta).norm();
    if (rank_err < ols_err) ++rank_wins;
  }
  CHECK(rank_wins >= 16);
}

TEST_CASE("fitting is deterministic") {
  Rng rng(77);
  const auto dm = make_design(80, (Eigen::VectorXd(2) << 1.0, 2.0).finished(), 0.0, 1.0, rng);
  const RankFit a = fit_rank_regression(dm);
  const RankFit b = fit_rank_regression(dm);
  CHECK(a.beta == b.beta);
  CHECK(a.tau_hat == b.tau_hat);
  CHECK(a.bic_prime == b.bic_prime);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("tau on standard normal residuals approaches sqrt(pi/3)") {
  Rng rng(404);
  Eigen::VectorXd residuals(1000);
  for (int i = 0; i < 1000; ++i) residuals(i) = rng.normal();
  const double window = estimate_tau(residuals, 3, TauMethod::Window);
  CHECK(std::abs(window - kTauNormal) < 0.08);
  const double bootstrap = estimate_tau(residuals, 3, TauMethod::Bootstrap);
  CHECK(std::abs(bootstrap - kTauNormal) < 0.10);
}

TEST_CASE("tau scales linearly with the residuals") {
  Rng rng(505);
  Eigen::VectorXd residuals(800);
  for (int i = 0; i < 800; ++i) residuals(i) = rng.normal();
  const double base = estimate_tau(residuals, 2);
  for (double c : {0.5, 3.0, 250.0}) {
    const double scaled = estimate_tau((residuals * c).eval(), 2);
    CHECK(std::abs(scaled - c * base) < 0.02 * c * base);
  }
}

TEST_CASE("identical residuals are a degenerate scale") {
  Eigen::VectorXd constant = Eigen::VectorXd::Constant(50, 1.5);
  CHECK_THROWS_AS(estimate_tau(constant, 2), NumericError);
  CHECK_THROWS_AS(estimate_tau(Eigen::VectorXd::Zero(10), 1), NumericError);
}

TEST_CASE("strong negative signal earns three stars with a negative estimate") {
  Rng rng(606);
  Eigen::VectorXd beta(1);
  beta << -5.0;
  const auto dm = make_design(150, beta, 0.0, 1.0, rng);
  const RankFit fit = fit_rank_regression(dm);
  REQUIRE(fit.coef_tests.size() == 1);
  CHECK(fit.coef_tests[0].estimate < 0.0);
  CHECK(fit.coef_tests[0].stars == "***");
  CHECK(fit.model_f.stars == "***");
}

TEST_CASE("pure-noise predictors are mostly unstarred at the nominal level") {
  int unstarred = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(7000 + static_cast<std::uint64_t>(trial));
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(1);
    const auto dm = make_design(280, beta, 50.0, 5.0, rng);
    const RankFit fit = fit_rank_regression(dm);
    if (fit.coef_tests[0].stars.empty()) ++unstarred;
  }
  CHECK(unstarred >= 93);  // nominal 5% level
}

TEST_CASE("star thresholds follow the caption rule") {
  CHECK(significance_stars(0.0009) == "***");
  CHECK(significance_stars(0.001) == "**");
  CHECK(significance_stars(0.0099) == "**");
  CHECK(significance_stars(0.01) == "*");
  CHECK(significance_stars(0.049) == "*");
  CHECK(significance_stars(0.05) == "");
  CHECK(significance_stars(0.9) == "");
}

TEST_CASE("constant response gives RD = 0 and F = 0") {
  DesignMatrix dm;
  dm.spec = ModelSpec{1, PredictorFamily::EC, ErrorScope::CompilerOnly};
  dm.labels = {"x"};
  dm.X.resize(12, 1);
  dm.y = Eigen::VectorXd::Constant(12, 42.0);
  for (int i = 0; i < 12; ++i) {
    dm.X(i, 0) = i;
    dm.student_ids.push_back("s" + std::to_string(i));
  }
  const RankFit fit = fit_rank_regression(dm);
  CHECK(fit.reduction_in_dispersion() == doctest::Approx(0.0));
  CHECK(fit.model_f.stat == doctest::Approx(0.0));
  CHECK(fit.robust_r2 == doctest::Approx(0.0));
}

TEST_CASE("model statistics are invariant to scaling y") {
  Rng rng(808);
  Eigen::VectorXd beta(2);
  beta << 3.0, -2.0;
  const auto dm = make_design(120, beta, 5.0, 1.0, rng);
  const RankFit base = fit_rank_regression(dm);

  for (double c : {2.0, 0.25, 40.0}) {
    DesignMatrix scaled = dm;
    scaled.y = dm.y * c;
    const RankFit fit = fit_rank_regression(scaled);
    CHECK(std::abs(fit.robust_r2 - base.robust_r2) < 1e-6);
    CHECK(std::abs(fit.model_f.stat - base.model_f.stat) < 1e-6 * base.model_f.stat);
    CHECK(std::abs(fit.bic_prime - base.bic_prime) < 1e-6 * std::abs(base.bic_prime));
    CHECK((fit.beta - c * base.beta).cwiseAbs().maxCoeff() < 1e-6 * c);
    CHECK(std::abs(fit.tau_hat - c * base.tau_hat) < 1e-6 * c * base.tau_hat);
  }
}

TEST_CASE("scaling one predictor column only rescales its coefficient") {
  Rng rng(909);
  Eigen::VectorXd beta(2);
  beta << 3.0, -2.0;
  const auto dm = make_design(120, beta, 5.0, 1.0, rng);
  const RankFit base = fit_rank_regression(dm);

  const double c = 8.0;
  DesignMatrix scaled = dm;
  scaled.X.col(0) *= c;
  const RankFit fit = fit_rank_regression(scaled);
  CHECK(std::abs(fit.beta(0) - base.beta(0) / c) < 1e-6);
  CHECK(std::abs(fit.beta(1) - base.beta(1)) < 1e-6);
  CHECK(std::abs(fit.robust_r2 - base.robust_r2) < 1e-6);
  CHECK(std::abs(fit.model_f.stat - base.model_f.stat) < 1e-6 * base.model_f.stat);
  CHECK(std::abs(fit.bic_prime - base.bic_prime) < 1e-6 * std::abs(base.bic_prime));
}

TEST_CASE("adding a constant to y moves only the intercept") {
  Rng rng(1010);
  Eigen::VectorXd beta(2);
  beta << 1.0, 4.0;
  const auto dm = make_design(100, beta, 2.0, 1.0, rng);
  const RankFit base = fit_rank_regression(dm);

  DesignMatrix shifted = dm;
  shifted.y = (dm.y.array() + 25.0).matrix();
  const RankFit fit = fit_rank_regression(shifted);
  CHECK((fit.beta - base.beta).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(fit.intercept == doctest::Approx(base.intercept + 25.0).epsilon(1e-9));
  CHECK(std::abs(fit.robust_r2 - base.robust_r2) < 1e-9);
}

TEST_CASE("adding a pure-noise column never decreases the dispersion reduction") {
  for (int trial = 0; trial < 10; ++trial) {
    Rng rng(1100 + static_cast<std::uint64_t>(trial));
    Eigen::VectorXd beta(2);
    beta << 2.0, -1.0;
    const auto dm = make_design(100, beta, 0.0, 2.0, rng);
    const RankFit base = fit_rank_regression(dm);

    DesignMatrix wide = dm;
    wide.labels.push_back("noise");
    wide.X.conservativeResize(Eigen::NoChange, 3);
    for (int i = 0; i < wide.X.rows(); ++i) wide.X(i, 2) = rng.normal();
    const RankFit fit = fit_rank_regression(wide);
    CHECK(fit.reduction_in_dispersion() >=
          base.reduction_in_dispersion() - 1e-6 * base.dispersion_null);
  }
}

TEST_CASE("bic_prime reproduces the published reference points") {
  CHECK(bic_prime(280, 0.181, 2) == doctest::Approx(-19.39).epsilon(0.001));
  CHECK(bic_prime(280, 0.330, 6) == doctest::Approx(-34.02).epsilon(0.001));
  CHECK(bic_prime(280, 0.072, 6) == doctest::Approx(5.60).epsilon(0.004));
  CHECK(bic_prime(280, 0.0, 0) == 0.0);
}

TEST_CASE("bic_prime domain checks and the natural-log variant") {
  CHECK_THROWS_AS(bic_prime(280, 1.0, 2), NumericError);
  CHECK_THROWS_AS(bic_prime(280, 1.5, 2), NumericError);
  CHECK_THROWS_AS(bic_prime(280, -0.1, 2), NumericError);
  // Natural log yields a very different scale (ln 10 times the base-10 value
  // of the n*log(1-r2) term).
  const double natural = bic_prime(280, 0.181, 2, LogBase::Natural);
  CHECK(natural == doctest::Approx(280.0 * std::log(0.819) + 2.0 * std::log(280.0)).epsilon(1e-12));
  CHECK(natural < -40.0);
}

TEST_CASE("fit JSON round trips through fit_from_json") {
  Rng rng(1212);
  Eigen::VectorXd beta(2);
  beta << 1.5, -0.5;
  auto dm = make_design(60, beta, 3.0, 1.0, rng);
  dm.spec = ModelSpec{1, PredictorFamily::EQ, ErrorScope::CompilerOnly};
  dm.labels = dm.spec.predictor_labels();
  const RankFit fit = fit_rank_regression(dm);
  const nlohmann::json j = fit_to_json(dm.spec, fit);
  const auto [spec2, fit2] = fit_from_json(j);
  CHECK(spec2.id() == dm.spec.id());
  CHECK(fit2.beta == fit.beta);
  CHECK(fit2.bic_prime == fit.bic_prime);
  CHECK(fit2.model_f.p_value == fit.model_f.p_value);
  CHECK(fit2.coef_tests.size() == fit.coef_tests.size());
  CHECK(fit2.coef_tests[0].stars == fit.coef_tests[0].stars);
}

TEST_CASE("preconditions: too few rows or predictors") {
  Rng rng(1);
  const auto dm = make_design(4, (Eigen::VectorXd(3) << 1, 2, 3).finished(), 0.0, 1.0, rng);
  CHECK_THROWS_AS(fit_rank_regression(dm), NumericError);  // n <= p + 1
}
