#include "psgla/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace psgla {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive_step(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("step size must be positive and finite");
}

void require_space(const SpacePoint& x, const SpaceDescriptor& desc) {
  if (!(x.descriptor() == desc))
    throw DimensionError("point in " + x.descriptor().to_string() + " given to a potential on " +
                         desc.to_string());
}

double min_eigenvalue(const SpacePoint& x) {
  const auto eig = sym_eigendecomposition(x);
  return eig.eigenvalues.front();
}

// Entry weights of the full matrix for each packed coordinate: 1 on the
// diagonal, 2 off it (each off-diagonal entry appears twice).
double entry_multiplicity(const SpaceDescriptor& desc, std::size_t k) {
  if (!desc.is_matrix()) return 1.0;
  const int d = desc.d;
  std::size_t start = 0;
  for (int i = 0; i < d; ++i) {
    const auto row = static_cast<std::size_t>(d - i);
    if (k < start + row) return k == start ? 1.0 : 2.0;
    start += row;
  }
  return 1.0;
}

}  // namespace

// --- SmoothPotential ---------------------------------------------------------

SpacePoint SmoothPotential::stochastic_gradient(const SpacePoint& x, RngStream& rng,
                                                Minibatch batch) const {
  if (!batch) return full_gradient(x);
  if (*batch == 0) throw std::invalid_argument("minibatch size must be at least 1");
  const std::size_t n = num_terms();
  if (*batch == 1) return term_gradient(x, rng.uniform_index(n));
  SpacePoint g(space());
  for (std::size_t b = 0; b < *batch; ++b) g += term_gradient(x, rng.uniform_index(n));
  return g *= 1.0 / static_cast<double>(*batch);
}

double SmoothPotential::sigma_F(Minibatch batch) const {
  if (!batch) return 0.0;
  return sigma_F() / std::sqrt(static_cast<double>(*batch));
}

double SmoothPotential::gradient_norm_variance(const SpacePoint& x) const {
  const std::size_t n = num_terms();
  double mean = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = norm(term_gradient(x, i));
    mean += v;
    sq += v * v;
  }
  mean /= static_cast<double>(n);
  return std::max(0.0, sq / static_cast<double>(n) - mean * mean);
}

SpacePoint ZeroSmooth::full_gradient(const SpacePoint& x) const {
  require_space(x, desc_);
  return SpacePoint(desc_);
}

SpacePoint ZeroSmooth::term_gradient(const SpacePoint& x, std::size_t) const {
  return full_gradient(x);
}

QuadraticSum::QuadraticSum(std::vector<SpacePoint> data) : data_(std::move(data)) {
  if (data_.empty()) throw std::invalid_argument("quadratic sum needs at least one datum");
  sum_ = SpacePoint(data_.front().descriptor());
  for (const auto& p : data_) sum_ += p;
  // Var(||Z||) <= E||Z - EZ||^2, so n^2 times the data spread bounds the
  // variance of the single-index estimator n (x - D_I) at every x.
  const double n = static_cast<double>(data_.size());
  const SpacePoint mean = (1.0 / n) * sum_;
  double spread = 0.0;
  for (const auto& p : data_) spread += squared_norm(p - mean);
  sigma_ = n * std::sqrt(spread / n);
}

double QuadraticSum::evaluate(const SpacePoint& x) const {
  double s = 0.0;
  for (const auto& p : data_) s += 0.5 * squared_norm(x - p);
  return s;
}

SpacePoint QuadraticSum::full_gradient(const SpacePoint& x) const {
  SpacePoint g = static_cast<double>(data_.size()) * x;
  return g -= sum_;
}

SpacePoint QuadraticSum::term_gradient(const SpacePoint& x, std::size_t i) const {
  return static_cast<double>(data_.size()) * (x - data_.at(i));
}

PrecisionLikelihood::PrecisionLikelihood(std::vector<std::vector<double>> data) {
  if (data.empty()) throw std::invalid_argument("precision likelihood needs at least one datum");
  const auto d = static_cast<int>(data.front().size());
  if (d < 1) throw DimensionError("data vectors must be nonempty");
  desc_ = d == 1 ? SpaceDescriptor::flat(1) : SpaceDescriptor::symmetric(d);
  scatter_ = SpacePoint(desc_);
  for (const auto& v : data) {
    if (static_cast<int>(v.size()) != d) throw DimensionError("data vectors differ in length");
    SpacePoint o(desc_);
    if (d == 1) {
      o[0] = v[0] * v[0];
    } else {
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j)
          o.set(i, j, v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(j)]);
    }
    scatter_ += o;
    outer_.push_back(std::move(o));
  }
  gradient_ = 0.5 * scatter_;
  const double n = static_cast<double>(outer_.size());
  double mean = 0.0, sq = 0.0;
  for (const auto& o : outer_) {
    const double v = 0.5 * n * norm(o);
    mean += v;
    sq += v * v;
  }
  mean /= n;
  sigma_ = std::sqrt(std::max(0.0, sq / n - mean * mean));
}

double PrecisionLikelihood::evaluate(const SpacePoint& x) const { return inner(gradient_, x); }

SpacePoint PrecisionLikelihood::full_gradient(const SpacePoint& x) const {
  require_space(x, desc_);
  return gradient_;
}

SpacePoint PrecisionLikelihood::term_gradient(const SpacePoint& x, std::size_t i) const {
  require_space(x, desc_);
  return (0.5 * static_cast<double>(outer_.size())) * outer_.at(i);
}

QuadraticForm::QuadraticForm(DenseMatrix a, std::vector<double> center)
    : a_(std::move(a)), center_(std::move(center)) {
  if (center_.size() != static_cast<std::size_t>(a_.size()))
    throw DimensionError("quadratic form center has wrong length");
  const auto eig = sym_eigendecomposition(SpacePoint::from_dense(a_, 1e-12));
  lambda_ = std::max(0.0, eig.eigenvalues.front());
  L_ = eig.eigenvalues.back();
  if (eig.eigenvalues.front() < -1e-12 * std::max(1.0, L_))
    throw std::invalid_argument("quadratic form matrix must be positive semidefinite");
}

double QuadraticForm::evaluate(const SpacePoint& x) const {
  const SpacePoint g = full_gradient(x);
  double s = 0.0;
  for (std::size_t i = 0; i < center_.size(); ++i) s += (x[i] - center_[i]) * g[i];
  return 0.5 * s;
}

SpacePoint QuadraticForm::full_gradient(const SpacePoint& x) const {
  require_space(x, space());
  const int n = a_.size();
  SpacePoint g(space());
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      s += a_(i, j) * (x[static_cast<std::size_t>(j)] - center_[static_cast<std::size_t>(j)]);
    g[static_cast<std::size_t>(i)] = s;
  }
  return g;
}

SpacePoint QuadraticForm::term_gradient(const SpacePoint& x, std::size_t) const {
  return full_gradient(x);
}

// --- NonsmoothPotential ------------------------------------------------------

double NonsmoothPotential::conjugate_evaluate(const SpacePoint&) const {
  throw DomainError("conjugate of " + name() + " is not available");
}

SpacePoint NonsmoothPotential::subgradient_min(const SpacePoint& x) const {
  auto g = try_subgradient_min(x);
  if (!g) throw DomainError(name() + ": no gradient available at this point");
  return std::move(*g);
}

SpacePoint ZeroNonsmooth::prox(double gamma, const SpacePoint& x) const {
  require_positive_step(gamma);
  require_space(x, desc_);
  return x;
}

std::optional<SpacePoint> ZeroNonsmooth::try_subgradient_min(const SpacePoint& x) const {
  require_space(x, desc_);
  return SpacePoint(desc_);
}

double ZeroNonsmooth::conjugate_evaluate(const SpacePoint& y) const {
  require_space(y, desc_);
  // Conjugate cone memberships are tested to 1e-10 so duals recovered from
  // rounded prox values still count.
  return norm(y) <= 1e-10 ? 0.0 : kInf;
}

BoxIndicator::BoxIndicator(std::vector<double> lo, std::vector<double> hi)
    : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.empty() || lo_.size() != hi_.size())
    throw DimensionError("box bounds must be nonempty and of equal length");
  for (std::size_t i = 0; i < lo_.size(); ++i)
    if (!(lo_[i] <= hi_[i]))
      throw std::invalid_argument("box lower bound exceeds upper bound at coordinate " +
                                  std::to_string(i));
}

double BoxIndicator::evaluate(const SpacePoint& x) const { return in_domain(x) ? 0.0 : kInf; }

SpacePoint BoxIndicator::prox(double gamma, const SpacePoint& x) const {
  return prox_box(gamma, x, lo_, hi_);
}

bool BoxIndicator::in_domain(const SpacePoint& x) const {
  require_space(x, space());
  for (std::size_t i = 0; i < lo_.size(); ++i)
    if (!(x[i] >= lo_[i] && x[i] <= hi_[i])) return false;
  return true;
}

std::optional<SpacePoint> BoxIndicator::try_subgradient_min(const SpacePoint& x) const {
  require_space(x, space());
  for (std::size_t i = 0; i < lo_.size(); ++i)
    if (!(x[i] > lo_[i] && x[i] < hi_[i])) return std::nullopt;
  return SpacePoint(space());
}

double BoxIndicator::conjugate_evaluate(const SpacePoint& y) const {
  require_space(y, space());
  double s = 0.0;
  for (std::size_t i = 0; i < lo_.size(); ++i) s += std::max(lo_[i] * y[i], hi_[i] * y[i]);
  return s;
}

double PsdIndicator::evaluate(const SpacePoint& x) const { return in_domain(x) ? 0.0 : kInf; }

SpacePoint PsdIndicator::prox(double gamma, const SpacePoint& x) const {
  require_space(x, space());
  return prox_psd(gamma, x);
}

bool PsdIndicator::in_domain(const SpacePoint& x) const {
  require_space(x, space());
  return min_eigenvalue(x) >= -1e-12 * std::max(1.0, norm(x));
}

std::optional<SpacePoint> PsdIndicator::try_subgradient_min(const SpacePoint& x) const {
  require_space(x, space());
  if (min_eigenvalue(x) > 1e-12 * std::max(1.0, norm(x))) return SpacePoint(space());
  return std::nullopt;
}

double PsdIndicator::conjugate_evaluate(const SpacePoint& y) const {
  require_space(y, space());
  const auto eig = sym_eigendecomposition(y);
  return eig.eigenvalues.back() <= 1e-10 * std::max(1.0, norm(y)) ? 0.0 : kInf;
}

LogBarrier::LogBarrier(double alpha, double beta) : alpha_(alpha), beta_(beta) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("log-barrier weight alpha must be >= 0");
}

double LogBarrier::evaluate(const SpacePoint& x) const {
  if (!in_domain(x)) return kInf;
  const double t = x.value();
  return (alpha_ > 0.0 ? -alpha_ * std::log(t) : 0.0) + beta_ * t;
}

SpacePoint LogBarrier::prox(double gamma, const SpacePoint& x) const {
  return SpacePoint::scalar(prox_logbarrier_scalar(gamma, x.value(), alpha_, beta_));
}

bool LogBarrier::in_domain(const SpacePoint& x) const {
  const double t = x.value();
  return alpha_ > 0.0 ? t > 0.0 : t >= 0.0;
}

std::optional<SpacePoint> LogBarrier::try_subgradient_min(const SpacePoint& x) const {
  const double t = x.value();
  if (!(t > 0.0)) return std::nullopt;
  return SpacePoint::scalar(-alpha_ / t + beta_);
}

LogDetBarrier::LogDetBarrier(int d, double alpha, double beta) : d_(d), alpha_(alpha), beta_(beta) {
  if (d < 1) throw DimensionError("matrix side must be positive");
  if (!(alpha >= 0.0)) throw std::invalid_argument("log-det weight alpha must be >= 0");
}

double LogDetBarrier::evaluate(const SpacePoint& x) const {
  require_space(x, space());
  double trace = 0.0;
  for (int i = 0; i < d_; ++i) trace += x.at(i, i);
  if (alpha_ == 0.0) return in_domain(x) ? beta_ * trace : kInf;
  DenseMatrix l;
  if (!cholesky(x, l)) return kInf;
  double logdet = 0.0;
  for (int i = 0; i < d_; ++i) logdet += 2.0 * std::log(l(i, i));
  return -alpha_ * logdet + beta_ * trace;
}

SpacePoint LogDetBarrier::prox(double gamma, const SpacePoint& x) const {
  require_space(x, space());
  return prox_logdet(gamma, x, alpha_, beta_);
}

bool LogDetBarrier::in_domain(const SpacePoint& x) const {
  require_space(x, space());
  if (alpha_ == 0.0) return min_eigenvalue(x) >= -1e-12 * std::max(1.0, norm(x));
  DenseMatrix l;
  return cholesky(x, l);
}

std::optional<SpacePoint> LogDetBarrier::try_subgradient_min(const SpacePoint& x) const {
  require_space(x, space());
  DenseMatrix l;
  if (!cholesky(x, l)) return std::nullopt;
  SpacePoint g = (-alpha_) * spd_inverse(x);
  for (int i = 0; i < d_; ++i) g.set(i, i, g.at(i, i) + beta_);
  return g;
}

L1Norm::L1Norm(SpaceDescriptor desc, double weight) : desc_(desc), weight_(weight) {
  if (!(weight >= 0.0)) throw std::invalid_argument("l1 weight must be >= 0");
}

double L1Norm::evaluate(const SpacePoint& x) const {
  require_space(x, desc_);
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += entry_multiplicity(desc_, k) * std::abs(x[k]);
  return weight_ * s;
}

SpacePoint L1Norm::prox(double gamma, const SpacePoint& x) const {
  require_positive_step(gamma);
  require_space(x, desc_);
  // Under tr(AB) an off-diagonal pair carries weight 2 in both the penalty
  // and the quadratic, so every stored entry is thresholded at gamma * w.
  const double t = gamma * weight_;
  SpacePoint p = x;
  for (double& v : p.coords()) v = v > t ? v - t : (v < -t ? v + t : 0.0);
  return p;
}

std::optional<SpacePoint> L1Norm::try_subgradient_min(const SpacePoint& x) const {
  require_space(x, desc_);
  SpacePoint g(desc_);
  for (std::size_t k = 0; k < x.size(); ++k)
    g[k] = x[k] > 0.0 ? weight_ : (x[k] < 0.0 ? -weight_ : 0.0);
  return g;
}

double L1Norm::conjugate_evaluate(const SpacePoint& y) const {
  require_space(y, desc_);
  const double bound = weight_ * (1.0 + 1e-12) + 1e-300;
  for (double v : y.coords())
    if (std::abs(v) > bound) return kInf;
  return 0.0;
}

// --- LipschitzProxTerm -------------------------------------------------------

LipschitzProxTerm::LipschitzProxTerm(std::vector<NonsmoothPtr> terms, double second_moment_bound)
    : terms_(std::move(terms)), M_(second_moment_bound) {
  if (terms_.empty()) throw std::invalid_argument("Lipschitz prox term needs at least one term");
  if (!(M_ >= 0.0)) throw std::invalid_argument("second-moment bound must be >= 0");
}

LipschitzProxTerm LipschitzProxTerm::zero(SpaceDescriptor desc) {
  LipschitzProxTerm r({std::make_shared<ZeroNonsmooth>(desc)}, 0.0);
  r.zero_ = true;
  return r;
}

LipschitzProxTerm LipschitzProxTerm::l1(SpaceDescriptor desc, std::vector<double> weights) {
  if (weights.empty()) throw std::invalid_argument("l1 term needs at least one weight");
  std::vector<NonsmoothPtr> terms;
  double mean_sq = 0.0;
  // ||d0 (w ||.||_1)||^2 <= w^2 * (number of matrix entries) in the trace norm.
  double entries = static_cast<double>(desc.d);
  if (desc.is_matrix()) entries *= desc.d;
  for (double w : weights) {
    terms.push_back(std::make_shared<L1Norm>(desc, w));
    mean_sq += w * w * entries;
  }
  mean_sq /= static_cast<double>(weights.size());
  return {std::move(terms), std::sqrt(mean_sq)};
}

std::size_t LipschitzProxTerm::draw(RngStream& rng) const {
  return terms_.size() == 1 ? 0 : rng.uniform_index(terms_.size());
}

// --- Operations --------------------------------------------------------------

SpacePoint prox_box(double gamma, const SpacePoint& x, std::span<const double> lo,
                    std::span<const double> hi) {
  require_positive_step(gamma);
  if (x.descriptor().is_matrix() || lo.size() != x.size() || hi.size() != x.size())
    throw DimensionError("box prox needs a flat point matching the bounds");
  SpacePoint p = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(lo[i] <= hi[i]))
      throw std::invalid_argument("box lower bound exceeds upper bound at coordinate " +
                                  std::to_string(i));
    p[i] = std::clamp(x[i], lo[i], hi[i]);
  }
  return p;
}

SpacePoint prox_psd(double gamma, const SpacePoint& s) {
  require_positive_step(gamma);
  if (!s.descriptor().is_matrix()) throw DimensionError("PSD prox needs a matrix point");
  return spectral_apply([](double t) { return std::max(t, 0.0); }, s);
}

double prox_logbarrier_scalar(double gamma, double s, double alpha, double beta) {
  require_positive_step(gamma);
  if (!(alpha >= 0.0)) throw std::invalid_argument("log-barrier weight alpha must be >= 0");
  const double shifted = s - gamma * beta;
  if (alpha == 0.0) return std::max(shifted, 0.0);
  // Positive root of t^2 - shifted t - gamma alpha = 0, written without
  // cancellation on either side of zero.
  const double root = std::hypot(shifted, 2.0 * std::sqrt(gamma * alpha));
  if (shifted >= 0.0) return 0.5 * (shifted + root);
  return 2.0 * gamma * alpha / (root - shifted);
}

SpacePoint prox_logdet(double gamma, const SpacePoint& s, double alpha, double beta) {
  require_positive_step(gamma);
  if (!(alpha >= 0.0)) throw std::invalid_argument("log-det weight alpha must be >= 0");
  if (!s.descriptor().is_matrix()) throw DimensionError("log-det prox needs a matrix point");
  return spectral_apply(
      [=](double t) { return prox_logbarrier_scalar(gamma, t, alpha, beta); }, s);
}

SpacePoint dual_from_primal(double gamma, const SpacePoint& x, const NonsmoothPotential& g) {
  require_positive_step(gamma);
  SpacePoint y = x - g.prox(gamma, x);
  return y *= 1.0 / gamma;
}

SpacePoint moreau_gradient(double lambda, const SpacePoint& x, const NonsmoothPotential& g) {
  if (!(lambda > 0.0)) throw std::invalid_argument("Moreau-Yosida parameter must be positive");
  return dual_from_primal(lambda, x, g);
}

NonsmoothPtr build_gamma_potential(double nu, int n, int d) {
  if (d < 1 || n < 0) throw std::invalid_argument("need d >= 1 and n >= 0");
  const double alpha = ((nu + n) - d - 1) / 2.0;
  if (alpha < 0.0)
    throw std::invalid_argument("alpha = ((nu + n) - d - 1)/2 = " + std::to_string(alpha) +
                                " is negative; need nu + n >= d + 1");
  if (d == 1) return std::make_shared<LogBarrier>(alpha, 0.5);
  return std::make_shared<LogDetBarrier>(d, alpha, 0.5);
}

SmoothPtr build_quadratic_sum(std::vector<SpacePoint> data) {
  return std::make_shared<QuadraticSum>(std::move(data));
}

SmoothPtr build_precision_likelihood(std::vector<std::vector<double>> data) {
  return std::make_shared<PrecisionLikelihood>(std::move(data));
}

}  // namespace psgla
