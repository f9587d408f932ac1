#pragma once

// Experiment configuration and its versioned JSON form. The schema is
// documented in docs/config_schema.md.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "incaapa/network.hpp"
#include "incaapa/signals.hpp"
#include "incaapa/theory.hpp"

namespace incaapa {

inline constexpr int kSchemaVersion = 1;

/// "Steady state reached" detector and the steady-state window.
struct ConvergenceRule {
  std::size_t average_window = 50;  // moving-average length (cycles)
  std::size_t lag = 100;            // compare against the average this far back
  double tolerance_db = 0.1;
  std::size_t steady_window = 50;   // final samples averaged for steady state
  double speed_margin_db = 3.0;     // convergence-speed threshold above steady state
};

struct StabilityCheckOptions {
  std::vector<double> factors{0.9, 2.0};  // multiples of μ_max
  std::size_t seeds = 5;
  std::size_t horizon = 500;
  double divergence_ratio = 1e3;
};

/// Noise profile: explicit variances, or log-uniform draws in [min, max].
struct NoiseSpec {
  std::optional<std::vector<double>> variances;
  double min = 1e-3;
  double max = 1e-2;
  /// Profile seed; derived from the master seed when absent.
  std::optional<std::uint64_t> seed;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;

  std::size_t nodes = 10;
  std::size_t filter_length = 4;
  std::size_t projection_order = 2;
  std::vector<std::size_t> ring_order;  // 0-based; empty means identity
  std::vector<double> step_sizes{0.2};  // one value means uniform
  double regularization = 1e-3;
  CVector h_true;                       // empty means all ones
  CVector g_true;
  NoiseSpec noise;

  std::vector<SignalKind> models{SignalKind::CircularAR1,
                                 SignalKind::NoncircularARMA,
                                 SignalKind::IkedaMap};
  Ar1Params ar1;
  ArmaParams arma;
  IkedaParams ikeda;
  std::size_t burn_in_ar1 = 0;
  std::size_t burn_in_arma = 0;
  std::size_t burn_in_ikeda = kDefaultIkedaBurnIn;

  std::size_t horizon = 2000;
  std::size_t trials = 100;
  std::uint64_t seed = 2024;
  /// Leading cycles excluded from steady-state statistics; L + T when absent.
  std::optional<std::size_t> warmup;
  bool run_noncooperative = true;
  bool run_theory = true;
  std::size_t moment_samples = 10000;
  std::size_t moment_burn_in = 64;
  TheoryOptions theory;
  ConvergenceRule convergence;
  StabilityCheckOptions stability;

  std::vector<std::size_t> t_values{1, 4, 8};
  std::vector<double> mu_values;

  std::filesystem::path output_dir = "out";
  /// Worker threads for trials and moments; 0 means hardware concurrency.
  std::size_t threads = 0;

  /// The N = 10, L = 4, T = 2, μ = 0.2 baseline over all three signals.
  static ExperimentConfig reference_baseline();

  /// Throws ConfigError on schema or value errors.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  /// FNV-1a over the canonical JSON dump.
  std::uint64_t hash() const;

  void validate() const;
  std::size_t warmup_cycles() const;
  std::vector<double> noise_variances() const;
  /// Fully resolved network with every node running `kind`.
  NetworkConfig network_for(SignalKind kind) const;
};

/// Reads and parses a JSON config file. Throws ConfigError or IoError.
ExperimentConfig load_config(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace incaapa
