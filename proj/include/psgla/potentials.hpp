#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "psgla/rng.hpp"
#include "psgla/space.hpp"

namespace psgla {

/// Thrown when a potential is asked for something it cannot provide at the
/// given point (e.g. a gradient on the boundary of an indicator).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Minibatch size for stochastic gradients; nullopt means the full gradient.
using Minibatch = std::optional<std::size_t>;

/// Smooth part F = (1/n) sum_i n f_i with a finite-sum stochastic gradient.
///
/// term_gradient(x, i) is the single-index unbiased estimator, scaled so that
/// its average over i equals full_gradient(x).
class SmoothPotential {
 public:
  virtual ~SmoothPotential() = default;

  [[nodiscard]] virtual SpaceDescriptor space() const = 0;
  [[nodiscard]] virtual double evaluate(const SpacePoint& x) const = 0;
  [[nodiscard]] virtual SpacePoint full_gradient(const SpacePoint& x) const = 0;
  [[nodiscard]] virtual std::size_t num_terms() const = 0;
  [[nodiscard]] virtual SpacePoint term_gradient(const SpacePoint& x, std::size_t i) const = 0;

  /// Smoothness constant (0 for affine F).
  [[nodiscard]] virtual double L() const = 0;
  [[nodiscard]] virtual double lambda_F() const = 0;
  /// Bound on Var_xi(||grad f(x, xi)||) for the single-index estimator, valid
  /// for every x.
  [[nodiscard]] virtual double sigma_F() const = 0;
  [[nodiscard]] virtual std::string name() const = 0;

  /// Indices are drawn uniformly with replacement from `rng`; the minibatch
  /// average of b single-index estimators is returned. Full gradients draw
  /// nothing.
  [[nodiscard]] SpacePoint stochastic_gradient(const SpacePoint& x, RngStream& rng,
                                               Minibatch batch) const;
  /// sigma_F for a minibatch of size b (sigma_F / sqrt(b)); 0 for full.
  [[nodiscard]] double sigma_F(Minibatch batch) const;
  /// Exact Var_i(||term_gradient(x, i)||) by enumeration.
  [[nodiscard]] double gradient_norm_variance(const SpacePoint& x) const;
};

/// Nonsmooth part G with a proximity operator.
class NonsmoothPotential {
 public:
  virtual ~NonsmoothPotential() = default;

  [[nodiscard]] virtual SpaceDescriptor space() const = 0;
  /// G(x), +infinity outside the domain.
  [[nodiscard]] virtual double evaluate(const SpacePoint& x) const = 0;
  /// argmin_z G(z) + ||z - x||^2 / (2 gamma); gamma must be positive.
  [[nodiscard]] virtual SpacePoint prox(double gamma, const SpacePoint& x) const = 0;
  [[nodiscard]] virtual bool in_domain(const SpacePoint& x) const = 0;
  /// Minimal-norm subgradient where it is available; nullopt otherwise.
  [[nodiscard]] virtual std::optional<SpacePoint> try_subgradient_min(const SpacePoint& x) const = 0;
  [[nodiscard]] virtual bool has_conjugate() const { return false; }
  [[nodiscard]] virtual double conjugate_evaluate(const SpacePoint& y) const;
  /// Strong convexity of G* (0 when G is not smooth).
  [[nodiscard]] virtual double lambda_Gstar() const { return 0.0; }
  [[nodiscard]] virtual bool is_indicator() const { return false; }
  [[nodiscard]] virtual std::string name() const = 0;

  /// Throws DomainError where try_subgradient_min has no answer.
  [[nodiscard]] SpacePoint subgradient_min(const SpacePoint& x) const;
};

using SmoothPtr = std::shared_ptr<const SmoothPotential>;
using NonsmoothPtr = std::shared_ptr<const NonsmoothPotential>;

// --- Smooth catalog ----------------------------------------------------------

/// F = 0 on the given space.
class ZeroSmooth final : public SmoothPotential {
 public:
  explicit ZeroSmooth(SpaceDescriptor desc) : desc_(desc) {}
  SpaceDescriptor space() const override { return desc_; }
  double evaluate(const SpacePoint&) const override { return 0.0; }
  SpacePoint full_gradient(const SpacePoint& x) const override;
  std::size_t num_terms() const override { return 1; }
  SpacePoint term_gradient(const SpacePoint& x, std::size_t) const override;
  double L() const override { return 0.0; }
  double lambda_F() const override { return 0.0; }
  double sigma_F() const override { return 0.0; }
  std::string name() const override { return "zero"; }

 private:
  SpaceDescriptor desc_;
};

/// F(x) = sum_i ||x - D_i||^2 / 2. L = lambda_F = n.
class QuadraticSum final : public SmoothPotential {
 public:
  explicit QuadraticSum(std::vector<SpacePoint> data);
  SpaceDescriptor space() const override { return data_.front().descriptor(); }
  double evaluate(const SpacePoint& x) const override;
  SpacePoint full_gradient(const SpacePoint& x) const override;
  std::size_t num_terms() const override { return data_.size(); }
  SpacePoint term_gradient(const SpacePoint& x, std::size_t i) const override;
  double L() const override { return static_cast<double>(data_.size()); }
  double lambda_F() const override { return static_cast<double>(data_.size()); }
  double sigma_F() const override { return sigma_; }
  std::string name() const override { return "quadratic_sum"; }
  [[nodiscard]] const std::vector<SpacePoint>& data() const { return data_; }

 private:
  std::vector<SpacePoint> data_;
  SpacePoint sum_;
  double sigma_ = 0.0;
};

/// Gaussian precision likelihood F(X) = sum_i tr(D_i D_i^T X) / 2 on d x d
/// symmetric matrices (on the real line when d = 1). F is linear, so L = 0 and
/// any positive step is admissible; callers must choose gamma explicitly.
class PrecisionLikelihood final : public SmoothPotential {
 public:
  explicit PrecisionLikelihood(std::vector<std::vector<double>> data);
  SpaceDescriptor space() const override { return desc_; }
  double evaluate(const SpacePoint& x) const override;
  SpacePoint full_gradient(const SpacePoint& x) const override;
  std::size_t num_terms() const override { return outer_.size(); }
  SpacePoint term_gradient(const SpacePoint& x, std::size_t i) const override;
  double L() const override { return 0.0; }
  double lambda_F() const override { return 0.0; }
  double sigma_F() const override { return sigma_; }
  std::string name() const override { return "precision_likelihood"; }
  /// sum_i D_i D_i^T as a point of the space.
  [[nodiscard]] const SpacePoint& scatter() const { return scatter_; }

 private:
  SpaceDescriptor desc_;
  std::vector<SpacePoint> outer_;  // D_i D_i^T
  SpacePoint scatter_;
  SpacePoint gradient_;
  double sigma_ = 0.0;
};

/// F(x) = (x - c)^T A (x - c) / 2 with A symmetric positive semidefinite, on
/// flat vectors. L and lambda_F are the extreme eigenvalues of A.
class QuadraticForm final : public SmoothPotential {
 public:
  QuadraticForm(DenseMatrix a, std::vector<double> center);
  SpaceDescriptor space() const override { return SpaceDescriptor::flat(a_.size()); }
  double evaluate(const SpacePoint& x) const override;
  SpacePoint full_gradient(const SpacePoint& x) const override;
  std::size_t num_terms() const override { return 1; }
  SpacePoint term_gradient(const SpacePoint& x, std::size_t) const override;
  double L() const override { return L_; }
  double lambda_F() const override { return lambda_; }
  double sigma_F() const override { return 0.0; }
  std::string name() const override { return "quadratic_form"; }

 private:
  DenseMatrix a_;
  std::vector<double> center_;
  double L_ = 0.0;
  double lambda_ = 0.0;
};

// --- Nonsmooth catalog -------------------------------------------------------

/// G = 0. Its conjugate is the indicator of {0}.
class ZeroNonsmooth final : public NonsmoothPotential {
 public:
  explicit ZeroNonsmooth(SpaceDescriptor desc) : desc_(desc) {}
  SpaceDescriptor space() const override { return desc_; }
  double evaluate(const SpacePoint&) const override { return 0.0; }
  SpacePoint prox(double gamma, const SpacePoint& x) const override;
  bool in_domain(const SpacePoint&) const override { return true; }
  std::optional<SpacePoint> try_subgradient_min(const SpacePoint& x) const override;
  bool has_conjugate() const override { return true; }
  double conjugate_evaluate(const SpacePoint& y) const override;
  std::string name() const override { return "zero"; }

 private:
  SpaceDescriptor desc_;
};

/// Indicator of the box [lo, hi] in R^d.
class BoxIndicator final : public NonsmoothPotential {
 public:
  BoxIndicator(std::vector<double> lo, std::vector<double> hi);
  SpaceDescriptor space() const override { return SpaceDescriptor::flat(static_cast<int>(lo_.size())); }
  double evaluate(const SpacePoint& x) const override;
  SpacePoint prox(double gamma, const SpacePoint& x) const override;
  bool in_domain(const SpacePoint& x) const override;
  std::optional<SpacePoint> try_subgradient_min(const SpacePoint& x) const override;
  bool has_conjugate() const override { return true; }
  /// Support function sum_i max(lo_i y_i, hi_i y_i).
  double conjugate_evaluate(const SpacePoint& y) const override;
  bool is_indicator() const override { return true; }
  std::string name() const override { return "box"; }
  [[nodiscard]] const std::vector<double>& lo() const { return lo_; }
  [[nodiscard]] const std::vector<double>& hi() const { return hi_; }

 private:
  std::vector<double> lo_, hi_;
};

/// Indicator of the positive semidefinite cone.
class PsdIndicator final : public NonsmoothPotential {
 public:
  explicit PsdIndicator(int d) : d_(d) {}
  SpaceDescriptor space() const override { return SpaceDescriptor::symmetric(d_); }
  double evaluate(const SpacePoint& x) const override;
  SpacePoint prox(double gamma, const SpacePoint& x) const override;
  /// Smallest eigenvalue >= -1e-12 max(1, ||x||_F).
  bool in_domain(const SpacePoint& x) const override;
  std::optional<SpacePoint> try_subgradient_min(const SpacePoint& x) const override;
  bool has_conjugate() const override { return true; }
  /// Indicator of the negative semidefinite cone (same tolerance).
  double conjugate_evaluate(const SpacePoint& y) const override;
  bool is_indicator() const override { return true; }
  std::string name() const override { return "psd"; }

 private:
  int d_;
};

/// G(t) = -alpha log t + beta t on t > 0 (t >= 0 when alpha = 0), +inf elsewhere.
class LogBarrier final : public NonsmoothPotential {
 public:
  LogBarrier(double alpha, double beta);
  SpaceDescriptor space() const override { return SpaceDescriptor::flat(1); }
  double evaluate(const SpacePoint& x) const override;
  SpacePoint prox(double gamma, const SpacePoint& x) const override;
  bool in_domain(const SpacePoint& x) const override;
  std::optional<SpacePoint> try_subgradient_min(const SpacePoint& x) const override;
  std::string name() const override { return "log_barrier"; }
  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] double beta() const { return beta_; }

 private:
  double alpha_, beta_;
};

/// G(X) = -alpha log det X + beta tr X on positive definite X (semidefinite
/// when alpha = 0), +inf elsewhere.
class LogDetBarrier final : public NonsmoothPotential {
 public:
  LogDetBarrier(int d, double alpha, double beta);
  SpaceDescriptor space() const override { return SpaceDescriptor::symmetric(d_); }
  double evaluate(const SpacePoint& x) const override;
  SpacePoint prox(double gamma, const SpacePoint& x) const override;
  bool in_domain(const SpacePoint& x) const override;
  std::optional<SpacePoint> try_subgradient_min(const SpacePoint& x) const override;
  std::string name() const override { return "log_det_barrier"; }
  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] double beta() const { return beta_; }

 private:
  int d_;
  double alpha_, beta_;
};

/// G(x) = w sum |x_k| over all entries (both triangles for matrices).
/// Prox is entrywise soft-thresholding at gamma * w; G is w-Lipschitz per entry.
class L1Norm final : public NonsmoothPotential {
 public:
  L1Norm(SpaceDescriptor desc, double weight);
  SpaceDescriptor space() const override { return desc_; }
  double evaluate(const SpacePoint& x) const override;
  SpacePoint prox(double gamma, const SpacePoint& x) const override;
  bool in_domain(const SpacePoint&) const override { return true; }
  std::optional<SpacePoint> try_subgradient_min(const SpacePoint& x) const override;
  bool has_conjugate() const override { return true; }
  /// Indicator of {|Y_ij| <= w}.
  double conjugate_evaluate(const SpacePoint& y) const override;
  std::string name() const override { return "l1"; }
  [[nodiscard]] double weight() const { return weight_; }

 private:
  SpaceDescriptor desc_;
  double weight_;
};

/// Stochastic Lipschitz proximable term R = E r(., xi), r(., xi) drawn from a
/// finite family. `second_moment_bound` is M with E ||d0 r(x, xi)||^2 <= M^2.
class LipschitzProxTerm {
 public:
  LipschitzProxTerm(std::vector<NonsmoothPtr> terms, double second_moment_bound);

  /// R = 0 (SPLA then coincides with PSGLA).
  static LipschitzProxTerm zero(SpaceDescriptor desc);
  /// r(., xi) = w_xi ||.||_1 with xi uniform over the given weights.
  static LipschitzProxTerm l1(SpaceDescriptor desc, std::vector<double> weights);

  [[nodiscard]] std::size_t num_terms() const { return terms_.size(); }
  [[nodiscard]] const NonsmoothPotential& term(std::size_t i) const { return *terms_.at(i); }
  /// Draws xi; a single-term family draws nothing from the stream.
  [[nodiscard]] std::size_t draw(RngStream& rng) const;
  [[nodiscard]] double M() const { return M_; }
  [[nodiscard]] bool is_zero() const { return zero_; }

 private:
  std::vector<NonsmoothPtr> terms_;
  double M_;
  bool zero_ = false;
};

// --- Operations --------------------------------------------------------------

/// Componentwise clamp to [lo, hi]; gamma does not matter for an indicator.
SpacePoint prox_box(double gamma, const SpacePoint& x, std::span<const double> lo,
                    std::span<const double> hi);
/// Eigenvalue clipping at zero.
SpacePoint prox_psd(double gamma, const SpacePoint& s);
/// Minimizer over t > 0 of -alpha log t + beta t + (t - s)^2 / (2 gamma).
double prox_logbarrier_scalar(double gamma, double s, double alpha, double beta);
/// Spectral prox of -alpha log det + beta tr: scalar prox on each eigenvalue.
SpacePoint prox_logdet(double gamma, const SpacePoint& s, double alpha, double beta);

/// y' = (x - prox_{gamma G}(x)) / gamma, which equals prox_{G*/gamma}(x/gamma).
SpacePoint dual_from_primal(double gamma, const SpacePoint& x, const NonsmoothPotential& g);
/// Gradient of the Moreau-Yosida envelope G^lambda at x.
SpacePoint moreau_gradient(double lambda, const SpacePoint& x, const NonsmoothPotential& g);

/// Wishart-type potential with alpha = ((nu + n) - d - 1) / 2, beta = 1/2:
/// a scalar log barrier for d = 1, a log-det barrier otherwise.
NonsmoothPtr build_gamma_potential(double nu, int n, int d);
SmoothPtr build_quadratic_sum(std::vector<SpacePoint> data);
SmoothPtr build_precision_likelihood(std::vector<std::vector<double>> data);

}  // namespace psgla
