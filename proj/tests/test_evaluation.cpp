#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "randens/gw_test.hpp"
#include "randens/metrics.hpp"
#include "randens/random.hpp"

using namespace randens;

namespace {

Matrix row(std::initializer_list<double> v) {
  Matrix m(1, static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) m(0, i++) = x;
  return m;
}

Matrix gaussian(Rng& rng, Eigen::Index r, Eigen::Index c, double mean = 0.0, double sd = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(mean, sd);
  return m;
}

}  // namespace

TEST(Metrics, WorkedExample) {
  const auto r = compute_metrics(row({100, 200}), row({110, 190}));
  EXPECT_DOUBLE_EQ(r.mape, 7.5);
  EXPECT_DOUBLE_EQ(r.mpe, -2.5);
  EXPECT_DOUBLE_EQ(r.median_ape, 7.5);
  EXPECT_DOUBLE_EQ(r.rmse, 10.0);
  EXPECT_DOUBLE_EQ(r.std_pe, 7.5);
  EXPECT_EQ(r.n_days, 1u);
  EXPECT_EQ(r.n_points, 2u);
}

TEST(Metrics, PerfectForecastIsZero) {
  const Matrix a = row({5, 7, 9});
  const auto r = compute_metrics(a, a);
  EXPECT_EQ(r.mape, 0.0);
  EXPECT_EQ(r.rmse, 0.0);
  EXPECT_EQ(r.mpe, 0.0);
  EXPECT_EQ(r.std_pe, 0.0);
}

TEST(Metrics, UnderpredictionHasPositiveMpe) {
  EXPECT_GT(compute_metrics(row({100, 100}), row({90, 95})).mpe, 0.0);
  EXPECT_LT(compute_metrics(row({100, 100}), row({110, 105})).mpe, 0.0);
}

TEST(Metrics, InvariantsOnRandomData) {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto days = static_cast<Eigen::Index>(1 + rng.below(20));
    const Matrix a = gaussian(rng, days, 24, 1000.0, 100.0);
    const Matrix f = a + gaussian(rng, days, 24, 0.0, 30.0);
    const auto r = compute_metrics(a, f);
    EXPECT_GE(r.mape, 0.0);
    EXPECT_GE(r.rmse, 0.0);
    EXPECT_GE(r.std_pe, 0.0);
    EXPECT_LE(std::abs(r.mpe), r.mape + 1e-12);
    // Mean |PE| is at most the RMS of PE.
    EXPECT_LE(r.mape, std::sqrt(r.mpe * r.mpe + r.std_pe * r.std_pe) + 1e-9);
  }
}

TEST(Metrics, PermutationInvariant) {
  Rng rng(13);
  const Matrix a = gaussian(rng, 6, 24, 500.0, 50.0);
  const Matrix f = a + gaussian(rng, 6, 24, 0.0, 20.0);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(6);
  perm.indices() << 3, 0, 5, 1, 4, 2;
  const auto r1 = compute_metrics(a, f);
  const auto r2 = compute_metrics(perm * a, perm * f);
  EXPECT_NEAR(r1.mape, r2.mape, 1e-12);
  EXPECT_NEAR(r1.rmse, r2.rmse, 1e-12);
  EXPECT_NEAR(r1.mpe, r2.mpe, 1e-12);
  EXPECT_EQ(r1.median_ape, r2.median_ape);
}

TEST(Metrics, Errors) {
  try {
    compute_metrics(row({1, 2}), row({1, 2, 3}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
  try {
    compute_metrics(row({0, 2}), row({1, 2}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroActual);
  }
  try {
    compute_metrics(row({1, 2}), row({NAN, 2}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFinite);
  }
}

TEST(ApeDistribution, Examples) {
  // APEs 1..5 percent.
  const auto d = ape_distribution(row({100, 100, 100, 100, 100}), row({99, 98, 97, 96, 95}));
  EXPECT_DOUBLE_EQ(d.quantiles[2], 3.0);
  EXPECT_DOUBLE_EQ(d.quantiles[0], 1.2);
  EXPECT_DOUBLE_EQ(d.quantiles[4], 4.8);
  const auto c = ape_distribution(row({10, 10, 10}), row({9, 11, 9}));
  for (double q : c.quantiles) EXPECT_DOUBLE_EQ(q, 10.0);
}

TEST(ApeDistribution, MatchesSortAndIndexOracle) {
  Rng rng(14);
  const Matrix a = gaussian(rng, 100, 100, 1000.0, 100.0);
  const Matrix f = a + gaussian(rng, 100, 100, 0.0, 50.0);
  const auto d = ape_distribution(a, f);
  std::vector<double> ape;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    ape.push_back(std::abs(100.0 * (a.data()[i] - f.data()[i]) / a.data()[i]));
  ASSERT_EQ(ape.size(), 10000u);
  for (std::size_t k = 0; k < d.levels.size(); ++k)
    EXPECT_NEAR(d.quantiles[k], oracle::sort_and_index_quantile(ape, d.levels[k] / 100.0), 1e-12);
  EXPECT_TRUE(std::is_sorted(d.sorted_ape.begin(), d.sorted_ape.end()));
}

TEST(GwTest, IdenticalLossesAreDegenerate) {
  Rng rng(15);
  const Matrix l = gaussian(rng, 30, 24).cwiseAbs();
  const auto r = gw_test(l, l);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.p_value, 1.0);
  EXPECT_EQ(r.direction, GwDirection::None);
}

TEST(GwTest, ConstantAdvantageIsSignificant) {
  Rng rng(16);
  const Matrix lb = gaussian(rng, 100, 24).cwiseAbs();
  const auto r = gw_test(lb.array() + 1.0, lb);
  EXPECT_EQ(r.direction, GwDirection::FavorsB);
  EXPECT_LT(r.p_value, 0.01);
  EXPECT_TRUE(r.regularized);
  EXPECT_TRUE(std::isfinite(r.statistic));
  // The same data read the other way round strongly favors A.
  const auto flipped = gw_test(lb, lb.array() + 1.0);
  EXPECT_GT(flipped.p_value, 0.99);
  EXPECT_EQ(flipped.direction, GwDirection::FavorsA);
}

TEST(GwTest, SymmetricUnderSwap) {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = gaussian(rng, 60, 24).cwiseAbs();
    const Matrix b = gaussian(rng, 60, 24, 0.1).cwiseAbs();
    const auto ab = gw_test(a, b);
    const auto ba = gw_test(b, a);
    EXPECT_NEAR(ab.statistic, ba.statistic, 1e-9 * std::max(1.0, ab.statistic));
    EXPECT_NEAR(ab.p_value + ba.p_value, 1.0, 1e-12);
    EXPECT_NE(ab.direction, ba.direction);
  }
}

TEST(GwTest, StatisticMatchesDirectFormula) {
  Rng rng(18);
  const Matrix a = gaussian(rng, 40, 3).cwiseAbs();
  const Matrix b = gaussian(rng, 40, 3).cwiseAbs();
  std::vector<double> d(40);
  for (Eigen::Index t = 0; t < 40; ++t) d[static_cast<std::size_t>(t)] = (a.row(t) - b.row(t)).mean();
  double s1 = 0, s2 = 0, o11 = 0, o12 = 0, o22 = 0;
  for (std::size_t t = 0; t + 1 < d.size(); ++t) {
    const double z1 = d[t + 1], z2 = d[t] * d[t + 1];
    s1 += z1;
    s2 += z2;
    o11 += z1 * z1;
    o12 += z1 * z2;
    o22 += z2 * z2;
  }
  const double T = 39;
  s1 /= T, s2 /= T, o11 /= T, o12 /= T, o22 /= T;
  const double det = o11 * o22 - o12 * o12;
  const double stat = T * (o22 * s1 * s1 - 2 * o12 * s1 * s2 + o11 * s2 * s2) / det;
  const auto r = gw_test(a, b);
  EXPECT_NEAR(r.statistic, stat, 1e-9 * stat);
  EXPECT_NEAR(r.p_two_sided, std::exp(-stat / 2), 1e-12);
}

TEST(GwTest, SizeUnderNull) {
  Rng rng(19);
  int rejections = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const Matrix a = gaussian(rng, 200, 1);
    const Matrix b = gaussian(rng, 200, 1);
    if (gw_test(a, b).p_value < 0.10) ++rejections;
  }
  EXPECT_GE(rejections, 80);
  EXPECT_LE(rejections, 120);
}

TEST(GwTest, Errors) {
  const Matrix a = Matrix::Ones(9, 24);
  try {
    gw_test(a, a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
  }
  try {
    gw_test(Matrix::Ones(12, 24), Matrix::Ones(12, 23));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}

TEST(Chi2, SurvivalOfTwoDof) {
  EXPECT_EQ(chi2_sf_dof2(0.0), 1.0);
  EXPECT_NEAR(chi2_sf_dof2(5.991464547107979), 0.05, 1e-12);
  EXPECT_NEAR(chi2_sf_dof2(4.605170185988091), 0.10, 1e-12);
}
