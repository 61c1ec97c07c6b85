#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "psgla/potentials.hpp"

using namespace psgla;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

// Catalog instances used by the generic invariants.
std::vector<NonsmoothPtr> catalog() {
  return {std::make_shared<ZeroNonsmooth>(SpaceDescriptor::flat(3)),
          std::make_shared<BoxIndicator>(std::vector<double>{-1, 0, 2}, std::vector<double>{1, 0.5, 5}),
          std::make_shared<PsdIndicator>(3),
          std::make_shared<LogBarrier>(1.5, 0.5),
          std::make_shared<LogBarrier>(0.0, 0.5),
          std::make_shared<LogDetBarrier>(3, 2.0, 0.5),
          std::make_shared<L1Norm>(SpaceDescriptor::flat(3), 0.7),
          std::make_shared<L1Norm>(SpaceDescriptor::symmetric(2), 0.3)};
}

SpacePoint random_point(const SpaceDescriptor& desc, RngStream& rng, double scale = 3.0) {
  SpacePoint x = gaussian_standard(desc, rng);
  return x *= scale;
}

// A point of dom(G) built from a prox, which lands in the domain by contract.
SpacePoint domain_point(const NonsmoothPotential& g, RngStream& rng) {
  return g.prox(0.7, random_point(g.space(), rng));
}

}  // namespace

// --- Smooth ------------------------------------------------------------------

TEST(QuadraticSum, Examples) {
  const auto f = build_quadratic_sum({SpacePoint::scalar(0.0)});
  EXPECT_DOUBLE_EQ(f->full_gradient(SpacePoint::scalar(2.0))[0], 2.0);
  EXPECT_DOUBLE_EQ(f->evaluate(SpacePoint::scalar(2.0)), 2.0);

  const auto g = build_quadratic_sum({SpacePoint::scalar(1.0), SpacePoint::scalar(3.0)});
  const auto x = SpacePoint::scalar(0.0);
  EXPECT_DOUBLE_EQ(g->full_gradient(x)[0], -4.0);
  EXPECT_DOUBLE_EQ(g->lambda_F(), 2.0);
  EXPECT_DOUBLE_EQ(0.5 * (g->term_gradient(x, 0)[0] + g->term_gradient(x, 1)[0]), -4.0);
}

TEST(PrecisionLikelihood, Examples) {
  const auto f = build_precision_likelihood({{1.0, 0.0}});
  const auto x = SpacePoint::identity(2);
  EXPECT_DOUBLE_EQ(f->evaluate(x), 0.5);
  const auto g = f->full_gradient(x);
  EXPECT_DOUBLE_EQ(g.at(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(g.at(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(g.at(1, 1), 0.0);
  EXPECT_EQ(f->L(), 0.0);

  RngStream rng(1, 0);
  const auto h = build_precision_likelihood({{1, 2}, {0.5, -1}, {3, 0}});
  EXPECT_EQ(h->full_gradient(random_point(h->space(), rng)),
            h->full_gradient(random_point(h->space(), rng)));
}

TEST(PrecisionLikelihood, OneDimensionalIsFlat) {
  const auto f = build_precision_likelihood({{2.0}, {1.0}});
  EXPECT_EQ(f->space(), SpaceDescriptor::flat(1));
  EXPECT_DOUBLE_EQ(f->full_gradient(SpacePoint::scalar(7.0))[0], 2.5);
}

TEST(Smooth, UnbiasedVarianceAndConstants) {
  RngStream rng(2, 0);
  std::vector<SpacePoint> data;
  for (int i = 0; i < 7; ++i) data.push_back(random_point(SpaceDescriptor::flat(3), rng));
  std::vector<std::vector<double>> vecs;
  for (int i = 0; i < 6; ++i) vecs.push_back({rng.normal(), rng.normal(), rng.normal()});
  DenseMatrix a(3);
  for (int i = 0; i < 3; ++i) a(i, i) = 1.0 + i;
  a(0, 1) = a(1, 0) = 0.5;
  const std::vector<SmoothPtr> fs = {build_quadratic_sum(data), build_precision_likelihood(vecs),
                                     std::make_shared<QuadraticForm>(a, std::vector<double>{1, 2, 3}),
                                     std::make_shared<ZeroSmooth>(SpaceDescriptor::flat(3))};
  for (const auto& f : fs) {
    SCOPED_TRACE(f->name());
    for (int t = 0; t < 5; ++t) {
      const SpacePoint x = random_point(f->space(), rng, 10.0);
      SpacePoint avg(f->space());
      for (std::size_t i = 0; i < f->num_terms(); ++i) avg += f->term_gradient(x, i);
      avg *= 1.0 / static_cast<double>(f->num_terms());
      EXPECT_LE(distance(avg, f->full_gradient(x)), 1e-10 * std::max(1.0, norm(avg)));

      double s = 0.0, s2 = 0.0;
      const int draws = 10000;
      for (int k = 0; k < draws; ++k) {
        const double v = norm(f->stochastic_gradient(x, rng, 1));
        s += v;
        s2 += v * v;
      }
      const double var = s2 / draws - (s / draws) * (s / draws);
      EXPECT_LE(var, f->sigma_F() * f->sigma_F() * 1.1 + 1e-10 * std::max(1.0, s2 / draws));
      EXPECT_LE(f->gradient_norm_variance(x), f->sigma_F() * f->sigma_F() * (1 + 1e-12) + 1e-12);

      const SpacePoint y = random_point(f->space(), rng, 10.0);
      const double gap = distance(f->full_gradient(x), f->full_gradient(y));
      EXPECT_LE(gap, f->L() * distance(x, y) * (1 + 1e-12) + 1e-12);
      const double lower = f->evaluate(x) + inner(f->full_gradient(x), y - x) +
                           0.5 * f->lambda_F() * squared_norm(y - x);
      EXPECT_GE(f->evaluate(y), lower - 1e-9 * std::max(1.0, std::abs(lower)));
    }
  }
}

TEST(Smooth, MinibatchSigmaScales) {
  const auto f = build_quadratic_sum({SpacePoint::scalar(0), SpacePoint::scalar(2)});
  EXPECT_DOUBLE_EQ(f->sigma_F(std::nullopt), 0.0);
  EXPECT_DOUBLE_EQ(f->sigma_F(Minibatch{4}), f->sigma_F() / 2.0);
  RngStream a(1, 0), b(1, 0);
  EXPECT_EQ(f->stochastic_gradient(SpacePoint::scalar(1), a, std::nullopt),
            f->full_gradient(SpacePoint::scalar(1)));
  EXPECT_EQ(a, b);  // full gradients draw nothing
}

TEST(QuadraticForm, Constants) {
  DenseMatrix a(2);
  a(0, 0) = 2;
  a(1, 1) = 5;
  const QuadraticForm f(a, {1, -1});
  EXPECT_NEAR(f.L(), 5.0, 1e-12);
  EXPECT_NEAR(f.lambda_F(), 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(f.evaluate(SpacePoint::flat({1, -1})), 0.0);
}

// --- Prox catalog -----------------------------------------------------------

TEST(ProxBox, Examples) {
  const std::vector<double> lo{0}, hi{1};
  EXPECT_DOUBLE_EQ(prox_box(1.0, SpacePoint::scalar(0.5), lo, hi)[0], 0.5);
  EXPECT_DOUBLE_EQ(prox_box(7.0, SpacePoint::scalar(-3.0), lo, hi)[0], 0.0);
  const std::vector<double> lo2{0, 0}, hi2{1, 1};
  EXPECT_EQ(prox_box(1.0, SpacePoint::flat({2.4, -0.1}), lo2, hi2), SpacePoint::flat({1, 0}));
}

TEST(ProxPsd, Examples) {
  EXPECT_LE(distance(prox_psd(1.0, SpacePoint::identity(2)), SpacePoint::identity(2)), 1e-14);
  EXPECT_LE(distance(prox_psd(1.0, SpacePoint::diagonal({1, -2})), SpacePoint::diagonal({1, 0})),
            1e-14);
  SpacePoint neg = SpacePoint::identity(3);
  neg *= -1.0;
  EXPECT_LE(norm(prox_psd(1.0, neg)), 1e-14);
}

TEST(ProxLogBarrier, Examples) {
  EXPECT_NEAR(prox_logbarrier_scalar(1.0, 1.0, 0.5, 0.5), 1.0, 1e-14);
  EXPECT_NEAR(prox_logbarrier_scalar(1.0, 0.0, 1.0, 0.0), 1.0, 1e-14);
  EXPECT_DOUBLE_EQ(prox_logbarrier_scalar(1.0, 2.0, 0.0, 0.0), 2.0);
  EXPECT_DOUBLE_EQ(prox_logbarrier_scalar(1.0, -2.0, 0.0, 0.0), 0.0);
}

TEST(ProxLogBarrier, MatchesScalarOracle) {
  RngStream rng(3, 0);
  for (int t = 0; t < 500; ++t) {
    const double gamma = std::exp(rng.normal());
    const double alpha = std::exp(rng.normal());
    const double beta = rng.normal();
    const double s = 5.0 * rng.normal();
    const double got = prox_logbarrier_scalar(gamma, s, alpha, beta);
    // Stationarity of the prox objective, solved by bisection on t > 0.
    const double ref = oracle::bisect_increasing(
        [&](double u) { return -alpha / u + beta + (u - s) / gamma; }, 0.0,
        std::abs(s) + gamma * std::abs(beta) + std::sqrt(gamma * alpha) + 1.0);
    EXPECT_NEAR(got, ref, 1e-10 * std::max(1.0, ref));
    EXPECT_GT(got, 0.0);
  }
}

TEST(ProxLogBarrier, FarNegativeInputStaysPositive) {
  const double t = prox_logbarrier_scalar(1.0, -1e8, 1.0, 0.0);
  EXPECT_GT(t, 0.0);
  EXPECT_NEAR(t, 1e-8, 1e-15);
}

TEST(ProxLogdet, Examples) {
  EXPECT_LE(distance(prox_logdet(1.0, SpacePoint::identity(2), 0.5, 0.5), SpacePoint::identity(2)),
            1e-12);
  const auto got = prox_logdet(1.0, SpacePoint::diagonal({0, 2}), 0.5, 0.5);
  EXPECT_NEAR(got.at(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(got.at(1, 1), (1.5 + std::sqrt(4.25)) / 2.0, 1e-12);
  EXPECT_NEAR(got.at(0, 1), 0.0, 1e-12);
}

TEST(ProxLogdet, GoldenSectionOracleAndEquivariance) {
  RngStream rng(4, 0);
  for (int d : {2, 5, 10}) {
    for (int t = 0; t < 10; ++t) {
      const double gamma = std::exp(rng.normal()), alpha = std::exp(rng.normal()),
                   beta = rng.uniform();
      const SpacePoint s = random_point(SpaceDescriptor::symmetric(d), rng, 2.0);
      const auto got = prox_logdet(gamma, s, alpha, beta);
      const auto e = sym_eigendecomposition(s);
      std::vector<double> vals;
      for (double lam : e.eigenvalues) {
        auto phi = [&](double u) {
          return -alpha * std::log(u) + beta * u + (u - lam) * (u - lam) / (2.0 * gamma);
        };
        const double hi = std::max(lam, 0.0) + std::sqrt(gamma * alpha) + 1.0;
        vals.push_back(oracle::golden_min(phi, 1e-300, hi));
      }
      // Plain golden section resolves the minimizer to about sqrt(machine eps).
      EXPECT_LE(distance(got, e.reassemble(vals)), 1e-6);
      const auto q = oracle::random_orthogonal(d, rng);
      EXPECT_LE(distance(prox_logdet(gamma, oracle::rotate(q, s), alpha, beta),
                         oracle::rotate(q, got)),
                1e-9);
    }
  }
}

TEST(DualFromPrimal, Examples) {
  RngStream rng(5, 0);
  const ZeroNonsmooth zero(SpaceDescriptor::flat(2));
  EXPECT_EQ(norm(dual_from_primal(0.3, random_point(zero.space(), rng), zero)), 0.0);
  const BoxIndicator box({0}, {1});
  EXPECT_DOUBLE_EQ(dual_from_primal(2.0, SpacePoint::scalar(3.0), box)[0], 1.0);
  EXPECT_DOUBLE_EQ(dual_from_primal(2.0, SpacePoint::scalar(0.5), box)[0], 0.0);
}

TEST(MoreauGradient, Examples) {
  const BoxIndicator box({0}, {1});
  EXPECT_DOUBLE_EQ(moreau_gradient(0.5, SpacePoint::scalar(0.3), box)[0], 0.0);
  EXPECT_DOUBLE_EQ(moreau_gradient(0.5, SpacePoint::scalar(2.0), box)[0], 2.0);
  const LogBarrier barrier(1.0, 0.0);
  for (double lambda : {1e-3, 0.01, 0.1, 1.0, 10.0, 100.0})
    EXPECT_LE(std::abs(moreau_gradient(lambda, SpacePoint::scalar(2.0), barrier)[0]), 0.5 + 1e-15);
  EXPECT_THROW(moreau_gradient(0.0, SpacePoint::scalar(2.0), barrier), std::invalid_argument);
}

TEST(GammaPotential, Examples) {
  const auto g = build_gamma_potential(3.0, 0, 1);
  const auto* lb = dynamic_cast<const LogBarrier*>(g.get());
  ASSERT_NE(lb, nullptr);
  EXPECT_DOUBLE_EQ(lb->alpha(), 0.5);
  EXPECT_DOUBLE_EQ(lb->beta(), 0.5);
  EXPECT_EQ(g->evaluate(SpacePoint::scalar(-1.0)), kInf);

  const auto m = build_gamma_potential(5.0, 0, 2);
  EXPECT_TRUE(m->in_domain(SpacePoint::diagonal({1, 1})));
  EXPECT_FALSE(m->in_domain(SpacePoint::diagonal({1, -1})));
  EXPECT_EQ(m->evaluate(SpacePoint::diagonal({1, -1})), kInf);
  EXPECT_THROW(build_gamma_potential(1.0, 0, 3), std::invalid_argument);
}

TEST(LogDetBarrier, GradientMatchesFiniteDifference) {
  const LogDetBarrier g(2, 1.5, 0.5);
  SpacePoint x = SpacePoint::diagonal({2, 3});
  x.set(0, 1, 0.4);
  const SpacePoint grad = g.subgradient_min(x);
  RngStream rng(6, 0);
  const SpacePoint dir = random_point(x.descriptor(), rng, 1.0);
  const double h = 1e-6;
  const double fd = (g.evaluate(x + h * dir) - g.evaluate(x - h * dir)) / (2 * h);
  EXPECT_NEAR(inner(grad, dir), fd, 1e-6);
}

TEST(Indicators, SubgradientOnlyInInterior) {
  const BoxIndicator box({0}, {1});
  EXPECT_EQ(box.subgradient_min(SpacePoint::scalar(0.5))[0], 0.0);
  EXPECT_THROW(box.subgradient_min(SpacePoint::scalar(1.0)), DomainError);
  EXPECT_THROW(box.subgradient_min(SpacePoint::scalar(3.0)), DomainError);
  const PsdIndicator psd(2);
  EXPECT_EQ(norm(psd.subgradient_min(SpacePoint::identity(2))), 0.0);
  EXPECT_THROW(psd.subgradient_min(SpacePoint::diagonal({1, 0})), DomainError);
}

TEST(L1Norm, SoftThreshold) {
  const L1Norm abs(SpaceDescriptor::flat(1), 1.0);
  EXPECT_DOUBLE_EQ(abs.prox(1.0, SpacePoint::scalar(3.0))[0], 2.0);
  EXPECT_DOUBLE_EQ(abs.prox(1.0, SpacePoint::scalar(-0.5))[0], 0.0);
  const L1Norm mat(SpaceDescriptor::symmetric(2), 1.0);
  SpacePoint x = SpacePoint::diagonal({3, 0});
  x.set(0, 1, 2.0);
  EXPECT_DOUBLE_EQ(mat.evaluate(x), 3.0 + 2.0 * 2.0);
  const auto p = mat.prox(0.5, x);
  EXPECT_DOUBLE_EQ(p.at(0, 0), 2.5);
  EXPECT_DOUBLE_EQ(p.at(0, 1), 1.5);
}

TEST(LipschitzProxTerm, Draws) {
  RngStream a(1, 0), b(1, 0);
  const auto zero = LipschitzProxTerm::zero(SpaceDescriptor::flat(2));
  EXPECT_TRUE(zero.is_zero());
  EXPECT_EQ(zero.draw(a), 0u);
  EXPECT_EQ(a, b);
  const auto l1 = LipschitzProxTerm::l1(SpaceDescriptor::flat(2), {1.0, 3.0});
  EXPECT_NEAR(l1.M(), std::sqrt((1.0 * 2 + 9.0 * 2) / 2.0), 1e-14);
  int ones = 0;
  for (int i = 0; i < 10000; ++i) ones += static_cast<int>(l1.draw(a));
  EXPECT_NEAR(ones, 5000, 300);
}

// --- Generic invariants ---------------------------------------------------------

TEST(Catalog, ProxContractInvariants) {
  RngStream rng(10, 0);
  for (const auto& g : catalog()) {
    SCOPED_TRACE(g->name() + " on " + g->space().to_string());
    for (int t = 0; t < 1000; ++t) {
      const double gamma = std::exp(1.5 * rng.normal());
      const SpacePoint x = random_point(g->space(), rng);
      const SpacePoint y = random_point(g->space(), rng);
      const SpacePoint px = g->prox(gamma, x), py = g->prox(gamma, y);
      ASSERT_TRUE(g->in_domain(px));
      // Firm nonexpansiveness.
      ASSERT_LE(squared_norm(px - py), inner(px - py, x - y) + 1e-9 * (1 + squared_norm(x - y)));
      // Optimality against a random domain point.
      const SpacePoint z = domain_point(*g, rng);
      const double lhs = g->evaluate(px) + inner((1.0 / gamma) * (x - px), z - px);
      ASSERT_LE(lhs, g->evaluate(z) + 1e-8 * std::max(1.0, std::abs(g->evaluate(z))));
      // Moreau identity as restated by dual_from_primal.
      SpacePoint r = x - px;
      r.axpy(-gamma, dual_from_primal(gamma, x, *g));
      ASSERT_LE(norm(r), 1e-10 * std::max(1.0, norm(x)));
      // Fenchel-Young holds with equality at the prox pair.
      if (g->has_conjugate()) {
        const SpacePoint yd = dual_from_primal(gamma, x, *g);
        const double fy = g->evaluate(px) + g->conjugate_evaluate(yd) - inner(px, yd);
        ASSERT_LE(std::abs(fy), 1e-8 * std::max(1.0, norm(x) * norm(yd)));
      }
    }
  }
}

TEST(Catalog, MoreauGradientIsLipschitz) {
  RngStream rng(11, 0);
  for (const auto& g : catalog()) {
    SCOPED_TRACE(g->name());
    for (int t = 0; t < 200; ++t) {
      const double lambda = std::exp(rng.normal());
      const SpacePoint x = random_point(g->space(), rng), y = random_point(g->space(), rng);
      ASSERT_LE(distance(moreau_gradient(lambda, x, *g), moreau_gradient(lambda, y, *g)),
                distance(x, y) / lambda * (1 + 1e-10) + 1e-12);
    }
  }
}

TEST(Catalog, RejectsBadStepAndWrongSpace) {
  for (const auto& g : catalog()) {
    const SpacePoint x(g->space());
    EXPECT_THROW(g->prox(0.0, x), std::invalid_argument);
    EXPECT_THROW(g->prox(-1.0, x), std::invalid_argument);
    EXPECT_THROW(g->prox(1.0, SpacePoint::flat({1, 2, 3, 4, 5, 6, 7})), DimensionError);
  }
}

TEST(Conjugates, SupportFunctionAndCones) {
  const BoxIndicator box({0}, {1});
  EXPECT_DOUBLE_EQ(box.conjugate_evaluate(SpacePoint::scalar(2.0)), 2.0);
  EXPECT_DOUBLE_EQ(box.conjugate_evaluate(SpacePoint::scalar(-2.0)), 0.0);
  const PsdIndicator psd(2);
  EXPECT_EQ(psd.conjugate_evaluate(SpacePoint::diagonal({-1, -2})), 0.0);
  EXPECT_EQ(psd.conjugate_evaluate(SpacePoint::diagonal({1, -2})), kInf);
  const LogBarrier lb(1.0, 0.5);
  EXPECT_FALSE(lb.has_conjugate());
  EXPECT_THROW((void)lb.conjugate_evaluate(SpacePoint::scalar(0.0)), DomainError);
}
