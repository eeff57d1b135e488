#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"
#include "oracles.hpp"

using namespace towarx;

namespace {

DesignMatrix simple(const std::vector<double>& xs, const std::vector<double>& ys) {
  DesignMatrix dm;
  dm.columns = {ColumnDescriptor::intercept(), ColumnDescriptor::temp_lag(0)};
  dm.x.resize(static_cast<Eigen::Index>(xs.size()), 2);
  dm.y.resize(static_cast<Eigen::Index>(ys.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    dm.x(static_cast<Eigen::Index>(i), 0) = 1.0;
    dm.x(static_cast<Eigen::Index>(i), 1) = xs[i];
    dm.y(static_cast<Eigen::Index>(i)) = ys[i];
  }
  return dm;
}

} // namespace

TEST(Regression, ExactLine) {
  const auto m = fit_ols(simple({0, 1, 2, 3, 4}, {1, 3, 5, 7, 9}));
  EXPECT_NEAR(m.coefficients[0], 1.0, 1e-12);
  EXPECT_NEAR(m.coefficients[1], 2.0, 1e-12);
  EXPECT_TRUE(m.exact_fit);
  EXPECT_DOUBLE_EQ(m.rss, 0.0);
  EXPECT_DOUBLE_EQ(m.r2, 1.0);
  EXPECT_TRUE(std::isinf(m.t_values[1]));
  EXPECT_DOUBLE_EQ(m.p_values[1], 0.0);
  EXPECT_TRUE(std::isinf(m.f_stat));
  EXPECT_DOUBLE_EQ(m.f_pvalue, 0.0);
  EXPECT_EQ(m.bic, -std::numeric_limits<double>::infinity());
}

TEST(Regression, ConstantResponse) {
  const auto m = fit_ols(simple({0, 1, 2, 3, 4}, {5, 5, 5, 5, 5}));
  EXPECT_NEAR(m.coefficients[0], 5.0, 1e-12);
  EXPECT_NEAR(m.coefficients[1], 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(m.r2, 1.0);
  EXPECT_DOUBLE_EQ(m.t_values[1], 0.0);
  EXPECT_DOUBLE_EQ(m.p_values[1], 1.0);
  EXPECT_TRUE(std::isnan(m.f_stat));
}

TEST(Regression, HandStatistics) {
  // y = [1, 2, 2, 4] on x = [0, 1, 2, 3]: slope 0.9, intercept 0.9.
  const auto m = fit_ols(simple({0, 1, 2, 3}, {1, 2, 2, 4}));
  EXPECT_NEAR(m.coefficients[0], 0.9, 1e-12);
  EXPECT_NEAR(m.coefficients[1], 0.9, 1e-12);
  // Residuals 0.1, 0.2, -0.7, 0.4; RSS = 0.7; TSS = 4.75.
  EXPECT_NEAR(m.rss, 0.7, 1e-12);
  EXPECT_NEAR(m.r2, 1.0 - 0.7 / 4.75, 1e-12);
  EXPECT_NEAR(m.sigma2, 0.35, 1e-12);
  EXPECT_NEAR(m.std_errors[1], std::sqrt(0.35 / 5.0), 1e-12);
  EXPECT_NEAR(m.f_stat, (4.75 - 0.7) / 0.35, 1e-10);
  EXPECT_NEAR(m.adj_r2, 1.0 - (0.7 / 4.75) * 3.0 / 2.0, 1e-12);
  EXPECT_EQ(m.n, 4u);
  EXPECT_EQ(m.k, 2u);
}

TEST(Regression, MatchesNormalEquations) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const auto dm = testing_util::random_design(rng, 200, 8, 0.5);
    const auto m = fit_ols(dm);
    const Eigen::VectorXd ref = testing_util::normal_equations(dm.x, dm.y);
    for (int j = 0; j < 8; ++j) EXPECT_LT(testing_util::rel_diff(m.coefficients[static_cast<std::size_t>(j)], ref(j)), 1e-8);
    // Residuals are orthogonal to every column.
    Eigen::Map<const Eigen::VectorXd> e(m.residuals.data(), static_cast<Eigen::Index>(m.residuals.size()));
    EXPECT_LT((dm.x.transpose() * e).cwiseAbs().maxCoeff(), 1e-8 * dm.y.norm());
  }
}

TEST(Regression, ScaleEquivariance) {
  std::mt19937_64 rng(12);
  auto dm = testing_util::random_design(rng, 100, 4, 1.0);
  const auto a = fit_ols(dm);
  dm.x.col(2) *= 1000.0;
  const auto b = fit_ols(dm);
  EXPECT_NEAR(b.coefficients[2] * 1000.0, a.coefficients[2], 1e-9 * std::abs(a.coefficients[2]) + 1e-12);
  EXPECT_NEAR(b.t_values[2], a.t_values[2], 1e-8 * std::abs(a.t_values[2]));
  EXPECT_NEAR(b.rss, a.rss, 1e-9 * a.rss);
}

TEST(Regression, RankDeficientColumnIsDropped) {
  std::mt19937_64 rng(13);
  auto dm = testing_util::random_design(rng, 50, 3, 1.0);
  dm.x.conservativeResize(Eigen::NoChange, 4);
  dm.x.col(3) = 2.0 * dm.x.col(1) - dm.x.col(2);
  dm.columns.push_back(ColumnDescriptor::irr_lag(0));
  const auto m = fit_ols(dm);
  EXPECT_EQ(m.k, 3u);
  ASSERT_EQ(m.dropped_columns.size(), 1u);
  EXPECT_FALSE(m.warnings.empty());
  EXPECT_TRUE(m.find(ColumnDescriptor::intercept()).has_value());
}

TEST(Regression, InsufficientRows) {
  std::mt19937_64 rng(14);
  const auto dm = testing_util::random_design(rng, 3, 3, 1.0);
  EXPECT_THROW(fit_ols(dm), DataError);
}

TEST(Regression, RequiresIntercept) {
  auto dm = simple({0, 1, 2}, {1, 2, 4});
  dm.columns[0] = ColumnDescriptor::irr_lag(3);
  EXPECT_THROW(fit_ols(dm), InputError);
}

TEST(Regression, PValueFixtures) {
  EXPECT_NEAR(t_pvalue(2.228, 10), 0.05, 1e-4);
  EXPECT_LT(t_pvalue(100.0, 30), 1e-12);
  EXPECT_DOUBLE_EQ(t_pvalue(0.0, 5), 1.0);
  EXPECT_DOUBLE_EQ(t_pvalue(-2.0, 7), t_pvalue(2.0, 7));
  EXPECT_NEAR(f_pvalue(4.96, 1, 10), 0.05, 1e-3);
  EXPECT_THROW(t_pvalue(1.0, 0.0), InputError);
}

TEST(Regression, PValuesMatchQuadrature) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> tdist(-8.0, 8.0), fdist(0.01, 30.0);
  std::uniform_int_distribution<int> df(1, 500);
  for (int i = 0; i < 200; ++i) {
    const double t = tdist(rng);
    const double d = df(rng);
    EXPECT_NEAR(t_pvalue(t, d), oracle::t_pvalue(t, d), 1e-6) << t << " " << d;
    const double f = fdist(rng);
    const double d1 = df(rng) % 40 + 1;
    EXPECT_NEAR(f_pvalue(f, d1, d), oracle::f_pvalue(f, d1, d), 1e-6) << f << " " << d1 << " " << d;
  }
}

TEST(Regression, InformationCriteria) {
  const auto a = information_criteria(100.0, 100, 2);
  EXPECT_NEAR(a.aic, 4.0, 1e-12);
  EXPECT_NEAR(a.bic, 2.0 * std::log(100.0), 1e-12);
  EXPECT_NEAR(a.bic, 9.2103, 1e-4);
  const auto b = information_criteria(50.0, 200, 3);
  EXPECT_NEAR(b.aic, 200.0 * std::log(0.25) + 6.0, 1e-9);
  EXPECT_NEAR(b.aic, -271.26, 1e-2);
  EXPECT_THROW(information_criteria(1.0, 3, 3), InputError);
}

TEST(Regression, PredictRowUsesColumnOrder) {
  FittedModel m;
  m.columns = {ColumnDescriptor::intercept(), ColumnDescriptor::load_lag(1)};
  m.coefficients = {2.0, 0.5};
  EXPECT_DOUBLE_EQ(predict_row(m, std::vector<double>{1.0, 10.0}), 7.0);
}
