#include <gtest/gtest.h>

#include <cmath>

#include "psgla/experiments.hpp"

using namespace psgla;

TEST(Data, ReproducibleAndStandard) {
  const auto a = make_wishart_spec(3, 7.0, 20, 42);
  const auto b = make_wishart_spec(3, 7.0, 20, 42);
  EXPECT_EQ(a.data, b.data);
  EXPECT_NE(a.data, make_wishart_spec(3, 7.0, 20, 43).data);

  RngStream rng(1, 0);
  const auto big = generate_gaussian_data(10000, 1, rng);
  double s = 0.0, s2 = 0.0;
  for (const auto& v : big) {
    s += v[0];
    s2 += v[0] * v[0];
  }
  const double mean = s / 10000.0;
  EXPECT_NEAR(s2 / 10000.0 - mean * mean, 1.0, 0.05);
  RngStream r2(1, 0);
  EXPECT_THROW(generate_gaussian_data(0, 1, r2), std::invalid_argument);
}

TEST(GroundTruth, Examples) {
  WishartExperimentSpec s;
  s.d = 1;
  s.nu = 3.0;
  EXPECT_DOUBLE_EQ(posterior_ground_truth(s).m_star[0], 3.0);
  s.nu = 5.0;
  s.data = {{1.0}, {1.0}};
  // (nu + n) / (1 + sum D^2)
  EXPECT_DOUBLE_EQ(posterior_ground_truth(s).m_star[0], 7.0 / 3.0);
  s.nu = 4.0;
  s.data = {{2.0}};
  EXPECT_DOUBLE_EQ(posterior_ground_truth(s).m_star[0], 1.0);

  WishartExperimentSpec m;
  m.d = 2;
  m.nu = 4.0;
  m.data = {{1.0, 0.0}};
  const auto gt = posterior_ground_truth(m);
  EXPECT_DOUBLE_EQ(gt.posterior_nu, 5.0);
  EXPECT_NEAR(gt.m_star.at(0, 0), 2.5, 1e-14);
  EXPECT_NEAR(gt.m_star.at(1, 1), 5.0, 1e-14);
  EXPECT_NEAR(gt.m_star.at(0, 1), 0.0, 1e-14);
}

TEST(GroundTruth, MatchesGammaMean) {
  const auto spec = make_wishart_spec(1, 5.0, 50, 3);
  const auto p = gamma_posterior_params(spec);
  EXPECT_NEAR(p.shape / p.rate, posterior_ground_truth(spec).m_star[0], 1e-13);
}

TEST(Gamma, Quantiles) {
  EXPECT_NEAR(gamma_quantile({1.0, 1.0}, 0.5), std::log(2.0), 1e-10);
  const GammaParams p{27.5, 24.0};
  double prev = 0.0;
  for (double u = 0.01; u < 1.0; u += 0.01) {
    const double q = gamma_quantile(p, u);
    EXPECT_GT(q, prev);
    EXPECT_NEAR(gamma_cdf(p, q), u, 1e-8);
    prev = q;
  }
  // Mean by trapezoid on the quantile function.
  const int n = 20000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += gamma_quantile(p, (i + 0.5) / n);
  EXPECT_NEAR(s / n, p.shape / p.rate, 1e-3);
  EXPECT_THROW(gamma_quantile(p, 0.0), std::invalid_argument);
  EXPECT_THROW(gamma_quantile(p, 1.0), std::invalid_argument);
}

TEST(TruncGauss, Quantiles) {
  const TruncGaussSpec sym{0.0, -1.0, 1.0};
  EXPECT_NEAR(trunc_gauss_quantile(sym, 0.5), 0.0, 1e-12);
  const TruncGaussSpec wide{0.0, -10.0, 10.0};
  EXPECT_NEAR(trunc_gauss_quantile(wide, 0.841345), 1.0, 1e-4);
  for (double u = 0.001; u < 1.0; u += 0.007) {
    const double q = trunc_gauss_quantile(sym, u);
    EXPECT_GE(q, -1.0);
    EXPECT_LE(q, 1.0);
    EXPECT_NEAR(trunc_gauss_cdf(sym, q), u, 1e-10);
  }
  EXPECT_THROW(trunc_gauss_quantile({0.0, 1.0, -1.0}, 0.5), std::invalid_argument);
}

TEST(Assemble, GammaPotentialExponents) {
  auto alpha_of = [](const NonsmoothPtr& g) {
    const auto lb = std::dynamic_pointer_cast<const LogBarrier>(g);
    return lb ? lb->alpha() : std::nan("");
  };
  EXPECT_DOUBLE_EQ(alpha_of(build_gamma_potential(5.0, 0, 1)), 1.5);
  EXPECT_DOUBLE_EQ(alpha_of(build_gamma_potential(3.0, 0, 1)), 0.5);
  const auto ld = std::dynamic_pointer_cast<const LogDetBarrier>(build_gamma_potential(14.0, 50, 10));
  ASSERT_TRUE(ld);
  EXPECT_DOUBLE_EQ(ld->alpha(), (14.0 + 50 - 11) / 2.0);
}

TEST(Assemble, KindsAndWarnings) {
  ExperimentSetup t;
  t.kind = ExperimentKind::TruncGauss;
  const auto tg = assemble_experiment(t);
  EXPECT_TRUE(tg.oracle.has_value());
  EXPECT_FALSE(tg.truth.has_value());
  EXPECT_DOUBLE_EQ(default_initial_point(tg, 0.1)[0], 1.0);

  ExperimentSetup p;
  p.kind = ExperimentKind::WishartPrecision;
  p.wishart = make_wishart_spec(3, 3.0, 1, 1);
  const auto low = assemble_experiment(p);
  EXPECT_FALSE(low.warnings.empty());
  EXPECT_TRUE(low.truth.has_value());
  EXPECT_FALSE(low.oracle.has_value());
  EXPECT_EQ(default_initial_point(low, 0.1), SpacePoint::identity(3));

  p.wishart = make_wishart_spec(1, 5.0, 50, 1);
  const auto one = assemble_experiment(p);
  EXPECT_TRUE(one.warnings.empty());
  EXPECT_TRUE(one.oracle.has_value());

  ExperimentSetup m;
  m.kind = ExperimentKind::WishartMean1d;
  m.wishart = make_wishart_spec(1, 3.0, 10, 1);
  EXPECT_FALSE(assemble_experiment(m).warnings.empty());
  m.wishart = make_wishart_spec(1, 9.0, 10, 1);
  EXPECT_TRUE(assemble_experiment(m).warnings.empty());

  EXPECT_EQ(parse_experiment_kind("wishart-precision"), ExperimentKind::WishartPrecision);
  EXPECT_FALSE(parse_experiment_kind("nope").has_value());
}
