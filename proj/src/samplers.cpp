#include "psgla/samplers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

namespace psgla {

std::string_view to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::Ula: return "ula";
    case SamplerKind::Psgla: return "psgla";
    case SamplerKind::Myula: return "myula";
    case SamplerKind::Projected: return "projected";
    case SamplerKind::Spla: return "spla";
  }
  return "unknown";
}

std::optional<SamplerKind> parse_sampler_kind(std::string_view name) {
  for (auto k : {SamplerKind::Ula, SamplerKind::Psgla, SamplerKind::Myula, SamplerKind::Projected,
                 SamplerKind::Spla})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

void SamplerConfig::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("gamma must be positive and finite");
  if (num_steps < 1) throw std::invalid_argument("num_steps must be at least 1");
  if (burn_in < 0 || burn_in >= num_steps)
    throw std::invalid_argument("burn_in must satisfy 0 <= burn_in < num_steps");
  if (record_every < 1) throw std::invalid_argument("record_every must be at least 1");
  if (minibatch && *minibatch == 0) throw std::invalid_argument("minibatch must be at least 1");
  if (myula_lambda < 0.0) throw std::invalid_argument("myula_lambda must be positive");
}

bool step_exceeds_smoothness(const SamplerConfig& cfg, const SmoothPotential& f) {
  return f.L() > 0.0 && cfg.gamma > 1.0 / f.L();
}

void Problem::validate() const {
  if (!smooth || !nonsmooth) throw std::invalid_argument("problem needs both F and G");
  const SpaceDescriptor desc = smooth->space();
  if (!(nonsmooth->space() == desc))
    throw DimensionError("F lives on " + desc.to_string() + " but G on " +
                         nonsmooth->space().to_string());
  if (!(initial.descriptor() == desc)) throw DimensionError("initial point is in the wrong space");
  if (lipschitz)
    for (std::size_t i = 0; i < lipschitz->num_terms(); ++i)
      if (!(lipschitz->term(i).space() == desc))
        throw DimensionError("Lipschitz term lives on the wrong space");
}

SpacePoint langevin_forward(const SpacePoint& x, const SpacePoint& gradient, double gamma,
                            const SpacePoint& noise) {
  SpacePoint out = x;
  out.axpy(-gamma, gradient);
  out.axpy(std::sqrt(2.0 * gamma), noise);
  return out;
}

StepResult psgla_backward(const SpacePoint& half, const NonsmoothPotential& g, double gamma) {
  StepResult r{half, g.prox(gamma, half), SpacePoint()};
  r.dual = half - r.next;
  r.dual *= 1.0 / gamma;
  return r;
}

StepResult spla_backward(const SpacePoint& pre, const NonsmoothPotential& r,
                         const NonsmoothPotential& g, double gamma) {
  return psgla_backward(r.prox(gamma, pre), g, gamma);
}

namespace {

SpacePoint forward(const SpacePoint& x, SpacePoint gradient, const SamplerConfig& cfg,
                   RngStream& rng) {
  const SpacePoint w = gaussian_standard(x.descriptor(), rng);
  return langevin_forward(x, gradient, cfg.gamma, w);
}

}  // namespace

SpacePoint step_ula(const SpacePoint& x, const SmoothPotential& f, const SamplerConfig& cfg,
                    RngStream& rng) {
  if (!(cfg.gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  return forward(x, f.stochastic_gradient(x, rng, cfg.minibatch), cfg, rng);
}

StepResult step_psgla(const SpacePoint& x, const SmoothPotential& f, const NonsmoothPotential& g,
                      const SamplerConfig& cfg, RngStream& rng) {
  return psgla_backward(step_ula(x, f, cfg, rng), g, cfg.gamma);
}

StepResult step_projected_langevin(const SpacePoint& x, const SmoothPotential& f,
                                   const NonsmoothPotential& indicator, const SamplerConfig& cfg,
                                   RngStream& rng) {
  if (!indicator.is_indicator())
    throw std::invalid_argument("projected Langevin needs a set indicator, got " +
                                indicator.name());
  return step_psgla(x, f, indicator, cfg, rng);
}

SpacePoint step_myula(const SpacePoint& x, const SmoothPotential& f, const NonsmoothPotential& g,
                      double lambda, const SamplerConfig& cfg, RngStream& rng) {
  if (!(cfg.gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  SpacePoint grad = f.stochastic_gradient(x, rng, cfg.minibatch);
  grad += moreau_gradient(lambda, x, g);
  return forward(x, std::move(grad), cfg, rng);
}

StepResult step_spla(const SpacePoint& x, const SmoothPotential& f, const LipschitzProxTerm& r,
                     const NonsmoothPotential& g, const SamplerConfig& cfg, RngStream& rng) {
  const SpacePoint pre = step_ula(x, f, cfg, rng);
  const std::size_t xi = r.draw(rng);
  return spla_backward(pre, r.term(xi), g, cfg.gamma);
}

StepResult advance(SamplerKind kind, const SpacePoint& x, const Problem& problem,
                   const SamplerConfig& cfg, RngStream& rng) {
  const SmoothPotential& f = *problem.smooth;
  const NonsmoothPotential& g = *problem.nonsmooth;
  switch (kind) {
    case SamplerKind::Ula: {
      SpacePoint next = step_ula(x, f, cfg, rng);
      SpacePoint zero(next.descriptor());
      return {next, next, std::move(zero)};
    }
    case SamplerKind::Myula: {
      SpacePoint next = step_myula(x, f, g, cfg.myula_lambda, cfg, rng);
      SpacePoint zero(next.descriptor());
      return {next, next, std::move(zero)};
    }
    case SamplerKind::Psgla: return step_psgla(x, f, g, cfg, rng);
    case SamplerKind::Projected: return step_projected_langevin(x, f, g, cfg, rng);
    case SamplerKind::Spla: {
      if (problem.lipschitz) return step_spla(x, f, *problem.lipschitz, g, cfg, rng);
      return step_spla(x, f, LipschitzProxTerm::zero(x.descriptor()), g, cfg, rng);
    }
  }
  throw std::logic_error("unknown sampler kind");
}

ChainDivergedError::ChainDivergedError(std::int64_t step, std::int64_t chain)
    : NumericalError("non-finite iterate at step " + std::to_string(step) +
                     (chain >= 0 ? " in chain " + std::to_string(chain) : std::string())),
      step_(step),
      chain_(chain) {}

namespace {

void check_kind(SamplerKind kind, const Problem& problem, const SamplerConfig& cfg) {
  cfg.validate();
  problem.validate();
  if (kind == SamplerKind::Myula && !(cfg.myula_lambda > 0.0))
    throw std::invalid_argument("myula requires myula_lambda > 0");
  if (kind == SamplerKind::Projected && !problem.nonsmooth->is_indicator())
    throw std::invalid_argument("projected sampler requires an indicator G");
}

}  // namespace

ChainTrace run_chain(SamplerKind kind, const Problem& problem, const SamplerConfig& cfg,
                     std::uint64_t stream_id) {
  check_kind(kind, problem, cfg);
  const auto start = std::chrono::steady_clock::now();
  RngStream rng(cfg.seed, stream_id);
  ChainTrace trace;
  const auto expected =
      static_cast<std::size_t>((cfg.num_steps - cfg.burn_in) / cfg.record_every + 1);
  trace.steps.reserve(expected);
  trace.primal.reserve(expected);

  SpacePoint x = problem.initial;
  for (std::int64_t k = 1; k <= cfg.num_steps; ++k) {
    StepResult r = advance(kind, x, problem, cfg, rng);
    if (!r.next.all_finite()) throw ChainDivergedError(k, static_cast<std::int64_t>(stream_id));
    x = std::move(r.next);
    if (k > cfg.burn_in && k % cfg.record_every == 0) {
      trace.steps.push_back(k);
      trace.feasible.push_back(problem.nonsmooth->in_domain(x));
      trace.primal.push_back(x);
      if (cfg.record_duals) {
        trace.half_steps.push_back(std::move(r.half));
        trace.duals.push_back(std::move(r.dual));
      }
    }
  }
  trace.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

namespace {

struct ChainOutcome {
  std::vector<SpacePoint> snapshot_points;
  std::vector<SpacePoint> snapshot_duals;
  std::vector<SpacePoint> running_sums;  // at each snapshot
  std::vector<std::int64_t> running_counts;
  std::optional<ChainTrace> trace;
  std::exception_ptr error;
};

ChainOutcome run_one(SamplerKind kind, const Problem& problem, const SamplerConfig& cfg,
                     const std::vector<std::int64_t>& snaps, std::uint64_t chain, bool keep) {
  ChainOutcome out;
  RngStream rng(cfg.seed, chain);
  const SpaceDescriptor desc = problem.space();
  SpacePoint x = problem.initial;
  SpacePoint sum(desc);
  std::int64_t count = 0;
  std::size_t next_snap = 0;
  auto take = [&](std::int64_t k, const SpacePoint* dual) {
    while (next_snap < snaps.size() && snaps[next_snap] == k) {
      out.snapshot_points.push_back(x);
      if (cfg.record_duals) out.snapshot_duals.push_back(dual ? *dual : SpacePoint(desc));
      out.running_sums.push_back(sum);
      out.running_counts.push_back(count);
      ++next_snap;
    }
  };
  if (keep) out.trace.emplace();
  take(0, nullptr);
  const std::int64_t last = snaps.empty() ? 0 : snaps.back();
  const std::int64_t horizon = std::max(cfg.num_steps, last);
  for (std::int64_t k = 1; k <= horizon; ++k) {
    StepResult r = advance(kind, x, problem, cfg, rng);
    if (!r.next.all_finite()) throw ChainDivergedError(k, static_cast<std::int64_t>(chain));
    x = std::move(r.next);
    if (k > cfg.burn_in) {
      sum += x;
      ++count;
    }
    if (keep && k <= cfg.num_steps && k > cfg.burn_in && k % cfg.record_every == 0) {
      out.trace->steps.push_back(k);
      out.trace->feasible.push_back(problem.nonsmooth->in_domain(x));
      out.trace->primal.push_back(x);
      if (cfg.record_duals) {
        out.trace->half_steps.push_back(r.half);
        out.trace->duals.push_back(r.dual);
      }
    }
    take(k, &r.dual);
  }
  return out;
}

}  // namespace

EnsembleResult run_ensemble(SamplerKind kind, const Problem& problem, const SamplerConfig& cfg,
                            const EnsembleOptions& opts) {
  check_kind(kind, problem, cfg);
  if (opts.num_chains < 1) throw std::invalid_argument("an ensemble needs at least one chain");
  std::vector<std::int64_t> snaps = opts.snapshot_steps;
  std::sort(snaps.begin(), snaps.end());
  snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());
  if (!snaps.empty() && snaps.front() < 0) throw std::invalid_argument("negative snapshot step");

  const std::size_t n = opts.num_chains;
  std::vector<ChainOutcome> outcomes(n);
  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));

  auto worker = [&](unsigned t) {
    for (std::size_t c = t; c < n; c += threads) {
      try {
        outcomes[c] = run_one(kind, problem, cfg, snaps, c, opts.keep_traces);
      } catch (...) {
        outcomes[c].error = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
  }

  for (std::size_t c = 0; c < n; ++c) {
    if (!outcomes[c].error) continue;
    try {
      std::rethrow_exception(outcomes[c].error);
    } catch (const ChainDivergedError&) {
      throw;
    } catch (const std::exception& e) {
      throw std::runtime_error("chain " + std::to_string(c) + ": " + e.what());
    }
  }

  EnsembleResult result;
  result.num_chains = n;
  const SpaceDescriptor desc = problem.space();
  for (std::size_t s = 0; s < snaps.size(); ++s) {
    Snapshot snap;
    snap.step = snaps[s];
    SpacePoint pooled(desc);
    std::int64_t total = 0;
    std::size_t feasible = 0;
    for (std::size_t c = 0; c < n; ++c) {
      ChainOutcome& o = outcomes[c];
      if (problem.nonsmooth->in_domain(o.snapshot_points[s])) ++feasible;
      pooled += o.running_sums[s];
      total += o.running_counts[s];
      snap.points.push_back(std::move(o.snapshot_points[s]));
      if (cfg.record_duals && snap.step > 0) snap.duals.push_back(std::move(o.snapshot_duals[s]));
    }
    if (total > 0) snap.ergodic_mean = (1.0 / static_cast<double>(total)) * pooled;
    snap.feasibility_fraction = static_cast<double>(feasible) / static_cast<double>(n);
    result.snapshots.push_back(std::move(snap));
  }
  if (opts.keep_traces)
    for (auto& o : outcomes) result.traces.push_back(std::move(*o.trace));
  return result;
}

TuningResult tune_for_epsilon(double eps, double L, double lambda_F, double C, double w0_sq) {
  if (!(lambda_F > 0.0))
    throw std::invalid_argument("tuning needs a strongly convex F (lambda_F > 0)");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!(C > 0.0)) throw std::invalid_argument("C must be positive");
  if (!(L >= 0.0) || !(w0_sq >= 0.0)) throw std::invalid_argument("L and W0^2 must be >= 0");
  const double inv_l = L > 0.0 ? 1.0 / L : std::numeric_limits<double>::infinity();
  const double gamma = std::min(inv_l, lambda_F * eps / (2.0 * C));
  const double factor = std::max(L / lambda_F, 2.0 * C / (lambda_F * lambda_F * eps));
  const double log_term = w0_sq > 0.0 ? std::log(2.0 * w0_sq / eps) : 0.0;
  const double bound = factor * log_term;
  const auto k = bound > 0.0 ? static_cast<std::int64_t>(std::ceil(bound)) : std::int64_t{0};
  return {gamma, k};
}

}  // namespace psgla
