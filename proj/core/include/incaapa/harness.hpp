#pragma once

// Seeded multi-trial experiments: learning curves for incAAPA and the
// non-cooperative baseline, steady-state extraction, theory comparison,
// projection-order sweeps and step-size stability checks.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "incaapa/config.hpp"
#include "incaapa/filters.hpp"
#include "incaapa/network.hpp"
#include "incaapa/theory.hpp"

namespace incaapa {

double to_db(double linear);

struct SteadyState {
  bool available = false;         // false when the horizon ends inside warm-up
  std::vector<double> node_msd;   // linear, averaged over the steady window
  double network_msd = 0.0;
  std::size_t window_begin = 0;   // [begin, end) in cycles
  std::size_t window_end = 0;
  /// First cycle at which the moving-average detector fired.
  std::optional<std::size_t> converged_at;
  /// First cycle whose network MSD is within speed_margin_db of steady state.
  std::optional<std::size_t> cycles_to_convergence;
  bool diverged = false;
};

/// Steady state from the final `steady_window` cycles, never reaching into
/// the first `warmup` cycles. `reference_msd` (the initial error energy)
/// scales the divergence test.
SteadyState extract_steady_state(const LearningCurve& curve,
                                 const ConvergenceRule& rule,
                                 std::size_t warmup, double reference_msd,
                                 double divergence_ratio = 1e3);

struct ModelReport {
  SignalKind kind = SignalKind::CircularAR1;
  NetworkConfig network;
  LearningCurve incremental;
  std::optional<LearningCurve> noncooperative;
  SteadyState incremental_steady;
  std::optional<SteadyState> noncooperative_steady;
  std::optional<MsdPrediction> theory;
  std::vector<StabilityMatrices> stability;  // per node, when theory ran
  /// Theory declared the configuration unstable, or the simulation diverged.
  bool unstable = false;
};

struct ExperimentReport {
  std::vector<ModelReport> models;
  nlohmann::json config_echo;
  std::uint64_t config_hash = 0;
  std::size_t projection_order = 0;
  double runtime_seconds = 0.0;
  std::size_t threads_used = 1;

  bool unstable() const;
};

/// All trials for every configured signal model, plus theory when enabled.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Moment sets for every node of `network` (seeds derived from `seed`).
std::vector<MomentSet> estimate_network_moments(const NetworkConfig& network,
                                                const ExperimentConfig& config);

struct SweepReport {
  std::vector<std::size_t> t_values;
  std::vector<ExperimentReport> reports;  // one per T, same order
  std::uint64_t config_hash = 0;          // of the base config
};

/// One incAAPA-only experiment per projection order.
SweepReport sweep_T(const ExperimentConfig& config,
                    std::span<const std::size_t> t_values);

struct StabilityRun {
  SignalKind kind = SignalKind::CircularAR1;
  double factor = 0.0;        // μ_k = factor · μ_max,k
  std::size_t seed_index = 0;
  double initial_msd = 0.0;   // ‖h°‖² + ‖g°‖²
  double final_msd = 0.0;     // network average at the last cycle
  double peak_ratio = 0.0;    // max over cycles and nodes / initial
  bool converged = false;     // finite and below the initial MSD at the end
  bool diverged = false;      // peak_ratio above the divergence ratio
};

struct ModelStability {
  SignalKind kind = SignalKind::CircularAR1;
  std::vector<StabilityMatrices> bounds;      // per node
  std::vector<double> spectral_limits;        // per node, bisection cross-check
  std::vector<double> configured_step_sizes;  // per node
  bool configured_unstable = false;           // some μ_k >= μ_max,k
  std::vector<StabilityRun> runs;
};

struct StabilityReport {
  std::vector<ModelStability> models;
  std::uint64_t config_hash = 0;

  bool unstable() const;
};

/// μ_max per node and short simulations at each factor of μ_max.
StabilityReport check_stability(const ExperimentConfig& config);

}  // namespace incaapa
