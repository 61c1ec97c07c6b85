#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psgla/diagnostics.hpp"
#include "psgla/potentials.hpp"
#include "psgla/rng.hpp"
#include "psgla/space.hpp"

namespace psgla {

enum class ExperimentKind { TruncGauss, WishartMean1d, WishartPrecision };

std::string_view to_string(ExperimentKind kind);
/// Parses "trunc-gauss", "wishart-mean-1d", "wishart-precision".
std::optional<ExperimentKind> parse_experiment_kind(std::string_view name);

/// Wishart prior W(nu, V = I) on d x d matrices and n Gaussian data points.
struct WishartExperimentSpec {
  int d = 1;
  double nu = 5.0;
  std::vector<std::vector<double>> data;
  std::uint64_t data_seed = 0;

  [[nodiscard]] int n() const { return static_cast<int>(data.size()); }
  /// Throws std::invalid_argument unless nu > d - 1 and every D_i has length d.
  void validate() const;
};

struct GroundTruth {
  double posterior_nu = 0.0;   // n + nu
  SpacePoint posterior_V_inv;  // I + sum D_i D_i^T
  SpacePoint m_star;           // (n + nu) (I + sum D_i D_i^T)^{-1}
};

/// Target exp(-(x - m)^2 / 2) restricted to [a, b].
struct TruncGaussSpec {
  double m = 0.0;
  double a = -1.0;
  double b = 1.0;

  void validate() const;
};

/// n i.i.d. standard Gaussian d-vectors. Throws if n == 0.
std::vector<std::vector<double>> generate_gaussian_data(int n, int d, RngStream& rng);
/// Convenience: spec with data drawn from stream (data_seed, 0).
WishartExperimentSpec make_wishart_spec(int d, double nu, int n, std::uint64_t data_seed);

GroundTruth posterior_ground_truth(const WishartExperimentSpec& spec);

/// Posterior Gamma(shape (nu + n)/2, rate (1 + sum D_i^2)/2) of the d = 1 case.
struct GammaParams {
  double shape;
  double rate;
};
GammaParams gamma_posterior_params(const WishartExperimentSpec& spec);
double gamma_cdf(const GammaParams& p, double x);
/// Quantile by bisection on the CDF; throws unless u in (0, 1).
double gamma_posterior_quantile(const WishartExperimentSpec& spec, double u);
double gamma_quantile(const GammaParams& p, double u);

double standard_normal_cdf(double z);
double trunc_gauss_cdf(const TruncGaussSpec& spec, double x);
double trunc_gauss_quantile(const TruncGaussSpec& spec, double u);

/// Potentials and ground truth for one experiment.
struct AssembledExperiment {
  ExperimentKind kind{};
  SmoothPtr smooth;
  NonsmoothPtr nonsmooth;
  std::optional<LipschitzProxTerm> lipschitz;
  std::optional<GroundTruth> truth;      // wishart experiments
  std::optional<QuantileOracle> oracle;  // 1-D targets with a closed-form law
  /// Warnings such as parameter regimes outside the convergence theory.
  std::vector<std::string> warnings;
};

struct ExperimentSetup {
  ExperimentKind kind = ExperimentKind::TruncGauss;
  TruncGaussSpec trunc;
  WishartExperimentSpec wishart;
  /// Per-entry weights w of r(., xi) = w ||.||_1 for SPLA; empty means R = 0.
  std::vector<double> spla_l1_weights;
};

/// Wires F, G, R and the ground truth:
///   trunc-gauss: F = (x - m)^2 / 2, G = box [a, b], truncated-normal oracle;
///   wishart-mean-1d: F = sum |x - D_i|^2 / 2, G with alpha = (nu - d - 1)/2;
///   wishart-precision: F linear, G with alpha = ((nu + n) - d - 1)/2, m*.
/// Throws std::invalid_argument when alpha < 0.
AssembledExperiment assemble_experiment(const ExperimentSetup& setup);

/// Default starting point: prox_{gamma G}(1) in 1-D, the identity for matrices.
SpacePoint default_initial_point(const AssembledExperiment& exp, double gamma);

}  // namespace psgla
