#include "psgla/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace psgla {

EmpiricalMeasure::EmpiricalMeasure(std::vector<SpacePoint> points) : points_(std::move(points)) {
  if (points_.empty()) throw std::invalid_argument("empirical measure needs at least one point");
  const auto& desc = points_.front().descriptor();
  for (const auto& p : points_) {
    if (!(p.descriptor() == desc)) throw DimensionError("empirical measure mixes spaces");
  }
}

EmpiricalMeasure EmpiricalMeasure::from_scalars(std::span<const double> values) {
  std::vector<SpacePoint> pts;
  pts.reserve(values.size());
  for (double v : values) pts.push_back(SpacePoint::scalar(v));
  return EmpiricalMeasure(std::move(pts));
}

std::vector<double> EmpiricalMeasure::scalars() const {
  if (descriptor().ambient_dim() != 1) {
    throw DimensionError("scalar view needs a 1-D measure, got " + descriptor().to_string());
  }
  std::vector<double> out;
  out.reserve(points_.size());
  for (const auto& p : points_) out.push_back(p[0]);
  return out;
}

double wasserstein2_1d(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("W2 matching needs equal sample sizes");
  if (a.empty()) throw std::invalid_argument("W2 of empty samples");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    const double d = sa[i] - sb[i];
    acc += d * d;
  }
  return acc / static_cast<double>(sa.size());
}

double wasserstein2_1d(std::span<const double> a, const QuantileOracle& target) {
  if (a.empty()) throw std::invalid_argument("W2 of an empty sample");
  std::vector<double> sa(a.begin(), a.end());
  std::sort(sa.begin(), sa.end());
  const auto n = static_cast<double>(sa.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    const double q = target.quantile((static_cast<double>(i) + 0.5) / n);
    const double d = sa[i] - q;
    acc += d * d;
  }
  return acc / n;
}

double wasserstein2_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  return wasserstein2_1d(a.scalars(), b.scalars());
}

double wasserstein2_1d(const EmpiricalMeasure& a, const QuantileOracle& target) {
  return wasserstein2_1d(a.scalars(), target);
}

double sliced_wasserstein2(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                           std::size_t num_projections, RngStream& rng) {
  if (!(a.descriptor() == b.descriptor())) throw DimensionError("sliced W2 across spaces");
  if (num_projections == 0) throw std::invalid_argument("sliced W2 needs projections");
  std::vector<double> pa(a.size()), pb(b.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < num_projections; ++k) {
    const SpacePoint u = uniform_direction(a.descriptor(), rng);
    for (std::size_t i = 0; i < a.size(); ++i) pa[i] = inner(u, a.points()[i]);
    for (std::size_t i = 0; i < b.size(); ++i) pb[i] = inner(u, b.points()[i]);
    acc += wasserstein2_1d(pa, pb);
  }
  return acc / static_cast<double>(num_projections);
}

SpacePoint ergodic_mean(std::span<const SpacePoint> points) {
  if (points.empty()) throw std::invalid_argument("ergodic mean of no iterates");
  SpacePoint acc = SpacePoint::zeros(points.front().descriptor());
  for (const auto& p : points) acc += p;
  acc *= 1.0 / static_cast<double>(points.size());
  return acc;
}

SpacePoint ergodic_mean(const ChainTrace& trace, std::size_t burn_in) {
  if (burn_in >= trace.size()) throw std::invalid_argument("burn-in covers the whole trace");
  return ergodic_mean(std::span<const SpacePoint>(trace.primal).subspan(burn_in));
}

CEstimate estimate_C(const EmpiricalMeasure& mu_star_samples, const NonsmoothPotential& g,
                     double L, std::size_t d, double sigma_F) {
  CEstimate out;
  double acc = 0.0;
  for (const auto& p : mu_star_samples.points()) {
    auto sub = g.try_subgradient_min(p);
    if (!sub) {
      ++out.skipped;
      continue;
    }
    acc += squared_norm(*sub);
    ++out.used;
  }
  if (out.used == 0) throw DomainError("no sample lies where G is differentiable");
  out.gradient_term = acc / static_cast<double>(out.used);
  out.value = out.gradient_term + 2.0 * (L * static_cast<double>(d) + sigma_F * sigma_F);
  return out;
}

double lemma2_residual(double gamma, const SpacePoint& x, const SpacePoint& x_star,
                       const SpacePoint& y_star, const NonsmoothPotential& g) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  const SpacePoint xp = g.prox(gamma, x);
  SpacePoint yp = x - xp;
  yp *= 1.0 / gamma;
  const double conj_gap = g.conjugate_evaluate(yp) - g.conjugate_evaluate(y_star) -
                          inner(yp, x_star) + inner(y_star, x);
  return squared_norm(x - x_star) - 2.0 * gamma * conj_gap -
         gamma * (g.lambda_Gstar() + gamma) * squared_norm(yp - y_star) +
         gamma * gamma * squared_norm(y_star) - squared_norm(xp - x_star);
}

namespace {

SpacePoint solve_fixed_point(const SmoothPotential& f, const NonsmoothPotential& g, double gamma,
                             SpacePoint x, const PdpgOptions& opts) {
  for (std::int64_t it = 0; it < opts.fixed_point_max_iters; ++it) {
    SpacePoint next = g.prox(gamma, x - gamma * f.full_gradient(x));
    const double move = distance(next, x);
    x = std::move(next);
    if (move <= opts.fixed_point_tolerance * std::max(1.0, norm(x))) return x;
  }
  throw NumericalError("proximal gradient did not reach a fixed point");
}

double lagrangian(const SmoothPotential& f, const NonsmoothPotential& g, const SpacePoint& x,
                  const SpacePoint& y) {
  return f.evaluate(x) - g.conjugate_evaluate(y) + inner(x, y);
}

}  // namespace

PdpgReport pdpg_gap_check(const SmoothPotential& f, const NonsmoothPotential& g, double gamma,
                          const SpacePoint& x0, std::int64_t num_iters, PdpgOptions opts) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (f.L() > 0.0 && gamma > 1.0 / f.L()) {
    throw std::invalid_argument("pdpg check needs gamma <= 1/L");
  }
  if (!g.has_conjugate()) throw std::invalid_argument(g.name() + " has no conjugate");

  PdpgReport rep;
  rep.x_star = opts.x_star ? *opts.x_star : solve_fixed_point(f, g, gamma, x0, opts);
  rep.y_star = -1.0 * f.full_gradient(rep.x_star);
  const double lam_f = f.lambda_F();
  const double lam_g = g.lambda_Gstar();
  const double ystar_sq = squared_norm(rep.y_star);

  SpacePoint x = x0;
  rep.residuals.reserve(static_cast<std::size_t>(std::max<std::int64_t>(num_iters, 0)));
  rep.gaps.reserve(rep.residuals.capacity());
  for (std::int64_t k = 0; k < num_iters; ++k) {
    const SpacePoint half = x - gamma * f.full_gradient(x);
    const SpacePoint next = g.prox(gamma, half);
    SpacePoint y = half - next;
    y *= 1.0 / gamma;
    const double gap = lagrangian(f, g, half, rep.y_star) - lagrangian(f, g, rep.x_star, y);
    const double rhs = (1.0 - gamma * lam_f) * squared_norm(x - rep.x_star) -
                       gamma * (lam_g + gamma) * squared_norm(y - rep.y_star) - 2.0 * gamma * gap +
                       gamma * gamma * ystar_sq;
    rep.residuals.push_back(rhs - squared_norm(next - rep.x_star));
    rep.gaps.push_back(gap);
    x = next;
  }
  if (!rep.residuals.empty()) {
    rep.min_residual = *std::min_element(rep.residuals.begin(), rep.residuals.end());
    rep.min_gap = *std::min_element(rep.gaps.begin(), rep.gaps.end());
  }
  return rep;
}

double feasibility_fraction(const ChainTrace& trace, const NonsmoothPotential& g) {
  if (trace.size() == 0) throw std::invalid_argument("feasibility of an empty trace");
  std::size_t ok = 0;
  for (const auto& p : trace.primal) ok += g.in_domain(p) ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(trace.size());
}

double bootstrap_w2_standard_error(std::span<const double> sample, const QuantileOracle& target,
                                   std::size_t resamples, RngStream& rng) {
  if (sample.empty() || resamples < 2) throw std::invalid_argument("bootstrap needs data");
  // Target quantiles do not change between resamples.
  const auto n = sample.size();
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) {
    q[i] = target.quantile((static_cast<double>(i) + 0.5) / static_cast<double>(n));
  }
  std::vector<double> stats;
  stats.reserve(resamples);
  std::vector<double> draw(n);
  for (std::size_t r = 0; r < resamples; ++r) {
    for (auto& v : draw) v = sample[rng.uniform_index(n)];
    stats.push_back(wasserstein2_1d(draw, q));
  }
  double mean = 0.0;
  for (double s : stats) mean += s;
  mean /= static_cast<double>(resamples);
  double var = 0.0;
  for (double s : stats) var += (s - mean) * (s - mean);
  return std::sqrt(var / static_cast<double>(resamples - 1));
}

}  // namespace psgla
