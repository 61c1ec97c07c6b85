#include "psgla/experiments.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <stdexcept>

namespace psgla {

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::TruncGauss: return "trunc-gauss";
    case ExperimentKind::WishartMean1d: return "wishart-mean-1d";
    case ExperimentKind::WishartPrecision: return "wishart-precision";
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_experiment_kind(std::string_view name) {
  if (name == "trunc-gauss") return ExperimentKind::TruncGauss;
  if (name == "wishart-mean-1d") return ExperimentKind::WishartMean1d;
  if (name == "wishart-precision") return ExperimentKind::WishartPrecision;
  return std::nullopt;
}

void WishartExperimentSpec::validate() const {
  if (d < 1) throw std::invalid_argument("d must be at least 1");
  if (!(nu > d - 1)) throw std::invalid_argument("nu must exceed d - 1");
  for (const auto& v : data) {
    if (static_cast<int>(v.size()) != d) throw DimensionError("data point length differs from d");
  }
}

void TruncGaussSpec::validate() const {
  if (!(a < b)) throw std::invalid_argument("trunc-gauss needs a < b");
  if (!std::isfinite(m) || !std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("trunc-gauss parameters must be finite");
  }
}

std::vector<std::vector<double>> generate_gaussian_data(int n, int d, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("need at least one data point");
  if (d < 1) throw std::invalid_argument("need d >= 1");
  std::vector<std::vector<double>> out(static_cast<std::size_t>(n), std::vector<double>(d));
  for (auto& v : out) {
    for (auto& c : v) c = rng.normal();
  }
  return out;
}

WishartExperimentSpec make_wishart_spec(int d, double nu, int n, std::uint64_t data_seed) {
  WishartExperimentSpec spec;
  spec.d = d;
  spec.nu = nu;
  spec.data_seed = data_seed;
  if (n > 0) {
    RngStream rng(data_seed, 0);
    spec.data = generate_gaussian_data(n, d, rng);
  }
  spec.validate();
  return spec;
}

GroundTruth posterior_ground_truth(const WishartExperimentSpec& spec) {
  spec.validate();
  const int d = spec.d;
  const auto desc = d == 1 ? SpaceDescriptor::flat(1) : SpaceDescriptor::symmetric(d);
  SpacePoint vinv = SpacePoint::zeros(desc);
  if (d == 1) {
    double s = 1.0;
    for (const auto& v : spec.data) s += v[0] * v[0];
    vinv[0] = s;
  } else {
    vinv = SpacePoint::identity(d);
    for (const auto& v : spec.data) {
      for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) vinv[packed_index(d, i, j)] += v[i] * v[j];
      }
    }
  }
  GroundTruth gt;
  gt.posterior_nu = spec.nu + spec.n();
  gt.posterior_V_inv = vinv;
  if (d == 1) {
    gt.m_star = SpacePoint::scalar(gt.posterior_nu / vinv[0]);
  } else {
    gt.m_star = spd_inverse(vinv);
    gt.m_star *= gt.posterior_nu;
  }
  return gt;
}

GammaParams gamma_posterior_params(const WishartExperimentSpec& spec) {
  if (spec.d != 1) throw DimensionError("Gamma posterior needs d = 1");
  double s = 1.0;
  for (const auto& v : spec.data) s += v[0] * v[0];
  return {(spec.nu + spec.n()) / 2.0, s / 2.0};
}

double gamma_cdf(const GammaParams& p, double x) {
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(p.shape, p.rate * x);
}

double gamma_quantile(const GammaParams& p, double u) {
  if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1)");
  double lo = 0.0;
  double hi = p.shape / p.rate;
  while (gamma_cdf(p, hi) < u) hi *= 2.0;
  // Bisection on the CDF until the bracket's CDF values differ by <= 1e-10.
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (gamma_cdf(p, mid) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (gamma_cdf(p, hi) - gamma_cdf(p, lo) <= 1e-10 && hi - lo <= 1e-12 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

double gamma_posterior_quantile(const WishartExperimentSpec& spec, double u) {
  return gamma_quantile(gamma_posterior_params(spec), u);
}

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double trunc_gauss_cdf(const TruncGaussSpec& spec, double x) {
  if (x <= spec.a) return 0.0;
  if (x >= spec.b) return 1.0;
  const double pa = standard_normal_cdf(spec.a - spec.m);
  const double pb = standard_normal_cdf(spec.b - spec.m);
  return (standard_normal_cdf(x - spec.m) - pa) / (pb - pa);
}

double trunc_gauss_quantile(const TruncGaussSpec& spec, double u) {
  spec.validate();
  if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1)");
  const double pa = standard_normal_cdf(spec.a - spec.m);
  const double pb = standard_normal_cdf(spec.b - spec.m);
  const double target = pa + u * (pb - pa);
  double lo = spec.a - spec.m;
  double hi = spec.b - spec.m;
  while (hi - lo > 1e-12 * std::max(1.0, std::abs(hi))) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (standard_normal_cdf(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return spec.m + 0.5 * (lo + hi);
}

AssembledExperiment assemble_experiment(const ExperimentSetup& setup) {
  AssembledExperiment out;
  out.kind = setup.kind;
  switch (setup.kind) {
    case ExperimentKind::TruncGauss: {
      const TruncGaussSpec spec = setup.trunc;
      spec.validate();
      out.smooth = build_quadratic_sum({SpacePoint::scalar(spec.m)});
      out.nonsmooth = std::make_shared<BoxIndicator>(std::vector<double>{spec.a},
                                                     std::vector<double>{spec.b});
      out.oracle = QuantileOracle{[spec](double u) { return trunc_gauss_quantile(spec, u); }};
      break;
    }
    case ExperimentKind::WishartMean1d: {
      const auto& spec = setup.wishart;
      spec.validate();
      if (spec.d != 1) throw std::invalid_argument("wishart-mean-1d needs d = 1");
      if (spec.data.empty()) throw std::invalid_argument("wishart-mean-1d needs data");
      out.nonsmooth = build_gamma_potential(spec.nu, 0, 1);
      std::vector<SpacePoint> pts;
      for (const auto& v : spec.data) pts.push_back(SpacePoint::scalar(v[0]));
      out.smooth = build_quadratic_sum(std::move(pts));
      if (spec.nu - 2.0 <= 2.0) {
        out.warnings.push_back("prior exponent alpha <= 1: G is not differentiable with a bounded "
                               "gradient second moment near 0");
      }
      break;
    }
    case ExperimentKind::WishartPrecision: {
      const auto& spec = setup.wishart;
      spec.validate();
      if (spec.data.empty()) throw std::invalid_argument("wishart-precision needs data");
      out.nonsmooth = build_gamma_potential(spec.nu, spec.n(), spec.d);
      out.smooth = build_precision_likelihood(spec.data);
      out.truth = posterior_ground_truth(spec);
      if (spec.d == 1) {
        const GammaParams p = gamma_posterior_params(spec);
        out.oracle = QuantileOracle{[p](double u) { return gamma_quantile(p, u); }};
      }
      if (spec.nu + spec.n() <= spec.d + 3) {
        out.warnings.push_back("nu + n <= d + 3: alpha <= 1, so E||grad G||^2 may be infinite and "
                               "the convergence constant C is not finite");
      }
      break;
    }
  }
  if (!setup.spla_l1_weights.empty()) {
    out.lipschitz = LipschitzProxTerm::l1(out.smooth->space(), setup.spla_l1_weights);
  }
  return out;
}

SpacePoint default_initial_point(const AssembledExperiment& exp, double gamma) {
  const auto desc = exp.smooth->space();
  if (desc.is_matrix()) return SpacePoint::identity(desc.d);
  return exp.nonsmooth->prox(gamma, SpacePoint::scalar(1.0));
}

}  // namespace psgla
