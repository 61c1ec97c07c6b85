#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psgla/potentials.hpp"
#include "psgla/rng.hpp"
#include "psgla/samplers.hpp"
#include "psgla/space.hpp"

namespace psgla {

/// Equally weighted point cloud on one space.
class EmpiricalMeasure {
 public:
  explicit EmpiricalMeasure(std::vector<SpacePoint> points);
  /// 1-D measure from scalars.
  static EmpiricalMeasure from_scalars(std::span<const double> values);

  [[nodiscard]] const std::vector<SpacePoint>& points() const { return points_; }
  [[nodiscard]] std::size_t size() const { return points_.size(); }
  [[nodiscard]] const SpaceDescriptor& descriptor() const { return points_.front().descriptor(); }
  /// Coordinates of a 1-D measure; throws DimensionError otherwise.
  [[nodiscard]] std::vector<double> scalars() const;

 private:
  std::vector<SpacePoint> points_;
};

/// Analytic 1-D target described by its quantile function on (0, 1).
struct QuantileOracle {
  std::function<double(double)> quantile;
};

/// Exact W2^2 between two equal-size 1-D empirical measures (sorted matching).
double wasserstein2_1d(std::span<const double> a, std::span<const double> b);
/// W2^2 between a 1-D sample and a target: mean of (x_(i) - Q((i - 1/2)/N))^2.
double wasserstein2_1d(std::span<const double> a, const QuantileOracle& target);
double wasserstein2_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b);
double wasserstein2_1d(const EmpiricalMeasure& a, const QuantileOracle& target);

/// Average over `num_projections` uniform directions u of the 1-D W2^2
/// between the projections <u, .> of the two samples.
double sliced_wasserstein2(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                           std::size_t num_projections, RngStream& rng);

/// Mean of recorded primal iterates after dropping the first `burn_in` entries.
SpacePoint ergodic_mean(const ChainTrace& trace, std::size_t burn_in);
SpacePoint ergodic_mean(std::span<const SpacePoint> points);

struct CEstimate {
  double value = 0.0;
  double gradient_term = 0.0;  // mean of ||grad G||^2 over usable samples
  std::size_t used = 0;
  std::size_t skipped = 0;
};

/// mean ||grad G||^2 over samples where G is differentiable + 2 (L d + sigma_F^2),
/// d the ambient dimension. Throws DomainError if no sample is usable.
CEstimate estimate_C(const EmpiricalMeasure& mu_star_samples, const NonsmoothPotential& g,
                     double L, std::size_t d, double sigma_F);

/// RHS - LHS of the one-step primal-dual inequality for x' = prox(gamma, x),
/// y' = dual_from_primal(gamma, x):
///   ||x - x*||^2 - 2 gamma (G*(y') - G*(y*) - <y', x*> + <y*, x>)
///   - gamma (lambda_G* + gamma) ||y' - y*||^2 + gamma^2 ||y*||^2 - ||x' - x*||^2.
/// Nonnegative for every x, x*, y* and gamma > 0.
double lemma2_residual(double gamma, const SpacePoint& x, const SpacePoint& x_star,
                       const SpacePoint& y_star, const NonsmoothPotential& g);

struct PdpgReport {
  double min_residual = 0.0;
  double min_gap = 0.0;
  std::vector<double> residuals;
  std::vector<double> gaps;
  SpacePoint x_star;
  SpacePoint y_star;
};

struct PdpgOptions {
  /// Fixed point; computed by running proximal gradient to convergence when empty.
  std::optional<SpacePoint> x_star;
  double fixed_point_tolerance = 1e-13;
  std::int64_t fixed_point_max_iters = 1000000;
};

/// Runs x^{k+1} = prox_{gamma G}(x^k - gamma grad F(x^k)) and records, for
/// each iteration, the residual of
///   ||x^{k+1} - x*||^2 <= (1 - gamma lambda_F) ||x^k - x*||^2
///       - gamma (lambda_G* + gamma) ||y^{k+1} - y*||^2
///       - 2 gamma (Lag(x^{k+1/2}, y*) - Lag(x*, y^{k+1})) + gamma^2 ||y*||^2
/// with Lag(x, y) = F(x) - G*(y) + <x, y>, y* = -grad F(x*), and the
/// duality gap Lag(x^{k+1/2}, y*) - Lag(x*, y^{k+1}).
PdpgReport pdpg_gap_check(const SmoothPotential& f, const NonsmoothPotential& g, double gamma,
                          const SpacePoint& x0, std::int64_t num_iters, PdpgOptions opts = {});

/// Fraction of recorded primal iterates in dom(G). Throws on an empty trace.
double feasibility_fraction(const ChainTrace& trace, const NonsmoothPotential& g);

/// Bootstrap standard error (over resampled points) of W2^2 against a target.
double bootstrap_w2_standard_error(std::span<const double> sample, const QuantileOracle& target,
                                   std::size_t resamples, RngStream& rng);

}  // namespace psgla
