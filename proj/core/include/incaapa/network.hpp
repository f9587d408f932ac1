#pragma once

// Ring topology, per-node widely linear data streams and augmented
// second-order statistics.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "incaapa/linalg.hpp"
#include "incaapa/signals.hpp"

namespace incaapa {

struct NetworkConfig {
  std::size_t nodes = 10;
  std::size_t filter_length = 4;     // L
  std::size_t projection_order = 2;  // T
  /// Visit order of the Hamiltonian cycle, 0-based node ids.
  std::vector<std::size_t> ring_order;
  /// Signal model per node. Seeds are overwritten per trial.
  std::vector<SignalModel> signals;
  NoiseProfile noise;
  CVector h_true;
  CVector g_true;
  std::vector<double> step_sizes;  // μ_k
  double regularization = 1e-3;    // δ

  /// Throws ConfigError when any structural invariant is violated.
  void validate() const;

  /// N nodes, L = 4, T = 2, μ = 0.2, δ = 1e-3, h° = g° = 1, identity ring,
  /// log-uniform noise in [1e-3, 1e-2] drawn from `profile_seed`.
  static NetworkConfig reference_setup(SignalKind kind, std::uint64_t profile_seed,
                                   std::size_t nodes = 10);

  /// Position of every node id in ring_order.
  std::vector<std::size_t> ring_positions() const;
};

struct RegressorBlock {
  CMatrix X;  // L×T, column j is the regressor at time i − j
  CVector d;  // T
  CVector v;  // T, noise used to build d
  std::size_t node = 0;
  std::size_t time = 0;
};

struct AugmentedCovariance {
  CMatrix C;  // E[x xᴴ]
  CMatrix P;  // E[x xᵀ]
  std::size_t samples = 0;
  bool underdetermined = false;

  /// [[C, P], [P*, C*]]
  CMatrix assembled() const;
};

enum class Padding { Zero, Disallow };

/// L×T matrix whose column j is [x(i−j), …, x(i−j−L+1)]ᵀ. Samples before
/// t = 0 are zero under Padding::Zero; under Padding::Disallow a window
/// reaching before t = 0 raises RangeError. i past the end always does.
CMatrix build_regressors(std::span<const cplx> seq, std::size_t L,
                         std::size_t T, std::size_t i,
                         Padding padding = Padding::Zero);

/// xᵀh + xᴴg, accumulated left to right.
cplx widely_linear_response(const CVector& x, const CVector& h,
                            const CVector& g);

/// Column-wise widely_linear_response over X.
CVector widely_linear_response(const CMatrix& X, const CVector& h,
                               const CVector& g);

/// Input sequence, noise and desired samples for one node over a horizon.
/// Blocks are assembled on demand.
class ObservationStream {
 public:
  ObservationStream(const NetworkConfig& config, std::size_t node,
                    std::size_t horizon, std::uint64_t signal_seed,
                    std::uint64_t noise_seed);

  std::size_t horizon() const { return input_.size(); }
  std::size_t node() const { return node_; }
  const ComplexSequence& input() const { return input_; }
  std::span<const cplx> noise() const { return noise_; }
  std::span<const cplx> desired() const { return desired_; }

  RegressorBlock block(std::size_t i) const;
  /// Fills a preallocated block (X is L×T, d and v are T).
  void fill(std::size_t i, RegressorBlock& out) const;

 private:
  std::size_t node_;
  std::size_t L_;
  std::size_t T_;
  ComplexSequence input_;
  std::vector<cplx> noise_;
  std::vector<cplx> desired_;
};

/// All blocks of node k for times 0 … horizon−1.
std::vector<RegressorBlock> generate_observations(const NetworkConfig& config,
                                                  std::size_t node,
                                                  std::size_t horizon,
                                                  std::uint64_t signal_seed,
                                                  std::uint64_t noise_seed);

/// Sample covariance and pseudocovariance over M consecutive length-L
/// regressors taken from `seq` (needs seq.size() >= M + L − 1).
AugmentedCovariance estimate_augmented_covariance(std::span<const cplx> seq,
                                                  std::size_t L,
                                                  std::size_t M);

/// Same estimate from the newest regressor (column 0) of each block.
AugmentedCovariance estimate_augmented_covariance(
    std::span<const RegressorBlock> blocks);

}  // namespace incaapa
