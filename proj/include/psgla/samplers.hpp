#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psgla/potentials.hpp"
#include "psgla/rng.hpp"
#include "psgla/space.hpp"

namespace psgla {

enum class SamplerKind { Ula, Psgla, Myula, Projected, Spla };

std::string_view to_string(SamplerKind kind);
/// Parses "ula", "psgla", "myula", "projected", "spla".
std::optional<SamplerKind> parse_sampler_kind(std::string_view name);

struct SamplerConfig {
  double gamma = 0.01;
  std::int64_t num_steps = 1000;
  /// Recorded entries are steps k with k > burn_in and k % record_every == 0.
  std::int64_t burn_in = 0;
  Minibatch minibatch;  // nullopt: full gradient
  double myula_lambda = 0.0;
  std::uint64_t seed = 0;
  std::int64_t record_every = 1;
  bool record_duals = false;

  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
};

/// True when F has L > 0 and gamma > 1/L, outside the step range covered by
/// the convergence bounds. Sampling still runs; harnesses surface a warning.
bool step_exceeds_smoothness(const SamplerConfig& cfg, const SmoothPotential& f);

/// The target exp(-F - R - G) and the chain's starting point.
struct Problem {
  SmoothPtr smooth;
  NonsmoothPtr nonsmooth;
  /// Only used by SPLA; treated as R = 0 when empty.
  std::optional<LipschitzProxTerm> lipschitz;
  SpacePoint initial;

  [[nodiscard]] SpaceDescriptor space() const { return smooth->space(); }
  /// Throws if the pieces disagree on the space.
  void validate() const;
};

/// x^{k+1/2}, x^{k+1} and y^{k+1} = (x^{k+1/2} - x^{k+1}) / gamma of one step.
struct StepResult {
  SpacePoint half;
  SpacePoint next;
  SpacePoint dual;
};

/// x - gamma * gradient + sqrt(2 gamma) * noise.
SpacePoint langevin_forward(const SpacePoint& x, const SpacePoint& gradient, double gamma,
                            const SpacePoint& noise);

/// Backward (prox) half of a PSGLA step from a given x^{k+1/2}.
StepResult psgla_backward(const SpacePoint& half, const NonsmoothPotential& g, double gamma);
/// SPLA backward half: pre-prox value -> prox of r(., xi) -> prox of G.
StepResult spla_backward(const SpacePoint& pre, const NonsmoothPotential& r,
                         const NonsmoothPotential& g, double gamma);

// One-step kernels. Each draws, in order, the stochastic-gradient indices and
// then the Gaussian noise from `rng` (SPLA then draws xi for R).

SpacePoint step_ula(const SpacePoint& x, const SmoothPotential& f, const SamplerConfig& cfg,
                    RngStream& rng);
StepResult step_psgla(const SpacePoint& x, const SmoothPotential& f, const NonsmoothPotential& g,
                      const SamplerConfig& cfg, RngStream& rng);
/// PSGLA with G an indicator; rejects non-indicator G.
StepResult step_projected_langevin(const SpacePoint& x, const SmoothPotential& f,
                                   const NonsmoothPotential& indicator, const SamplerConfig& cfg,
                                   RngStream& rng);
/// ULA on F + G^lambda. The iterate is not projected and may leave dom(G).
SpacePoint step_myula(const SpacePoint& x, const SmoothPotential& f, const NonsmoothPotential& g,
                      double lambda, const SamplerConfig& cfg, RngStream& rng);
StepResult step_spla(const SpacePoint& x, const SmoothPotential& f, const LipschitzProxTerm& r,
                     const NonsmoothPotential& g, const SamplerConfig& cfg, RngStream& rng);

/// Advances x by one step of the chosen kernel. ULA and MYULA report the new
/// point as both half and next with a zero dual.
StepResult advance(SamplerKind kind, const SpacePoint& x, const Problem& problem,
                   const SamplerConfig& cfg, RngStream& rng);

/// Thrown when an iterate stops being finite.
class ChainDivergedError : public NumericalError {
 public:
  ChainDivergedError(std::int64_t step, std::int64_t chain);
  [[nodiscard]] std::int64_t step() const { return step_; }
  [[nodiscard]] std::int64_t chain() const { return chain_; }

 private:
  std::int64_t step_;
  std::int64_t chain_;
};

struct ChainTrace {
  std::vector<std::int64_t> steps;
  std::vector<SpacePoint> primal;
  std::vector<SpacePoint> half_steps;  // filled when record_duals
  std::vector<SpacePoint> duals;       // filled when record_duals
  std::vector<bool> feasible;
  double wall_time_seconds = 0.0;

  [[nodiscard]] std::size_t size() const { return primal.size(); }
};

/// Runs one chain on stream (cfg.seed, stream_id).
ChainTrace run_chain(SamplerKind kind, const Problem& problem, const SamplerConfig& cfg,
                     std::uint64_t stream_id = 0);

struct Snapshot {
  std::int64_t step = 0;
  std::vector<SpacePoint> points;  // one per chain
  std::vector<SpacePoint> duals;   // one per chain when record_duals (empty at step 0)
  /// Pooled ergodic mean over chains of iterates k with burn_in < k <= step;
  /// empty when no iterate qualifies yet.
  std::optional<SpacePoint> ergodic_mean;
  double feasibility_fraction = 1.0;
};

struct EnsembleResult {
  std::vector<Snapshot> snapshots;
  /// Chain traces, kept only when requested.
  std::vector<ChainTrace> traces;
  std::size_t num_chains = 0;
};

struct EnsembleOptions {
  std::size_t num_chains = 2;
  std::vector<std::int64_t> snapshot_steps;
  bool keep_traces = false;
  /// 0: hardware concurrency.
  unsigned threads = 0;
};

/// Independent chains on streams 0..N-1 of cfg.seed. Snapshots are cross
/// sections at the requested steps; memory is O(N * snapshots) unless traces
/// are kept.
EnsembleResult run_ensemble(SamplerKind kind, const Problem& problem, const SamplerConfig& cfg,
                            const EnsembleOptions& opts);

struct TuningResult {
  double gamma;
  std::int64_t k;
};

/// gamma = min(1/L, lambda_F eps / (2C)) and the smallest integer
/// k >= max(L/lambda_F, 2C/(lambda_F^2 eps)) log(2 W0^2 / eps).
TuningResult tune_for_epsilon(double eps, double L, double lambda_F, double C, double w0_sq);

}  // namespace psgla
