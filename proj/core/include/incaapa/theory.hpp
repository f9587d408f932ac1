#pragma once

// Steady-state mean-square analysis of incAAPA on a ring: Monte Carlo
// moment estimation, the Kronecker transfer matrix, ring coupling into
// per-node MSD, and the mean-square step-size bound.
//
// Conventions: vec() stacks columns, so vec(Z₁ΣZ₂) = (Z₂ᵀ ⊗ Z₁)·vec(Σ).
// U = [X*; X] is the 2L×T augmented regressor and D = U B Uᴴ with
// B = (UᴴU + δI)⁻¹.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "incaapa/linalg.hpp"
#include "incaapa/network.hpp"
#include "incaapa/signals.hpp"

namespace incaapa {

/// [X*; X]
CMatrix augmented_regressor(const CMatrix& X);

/// How E[D Σ D] enters the transfer matrix.
enum class Coupling {
  Full,       // E[Dᵀ ⊗ D]
  Decoupled,  // E[D]ᵀ ⊗ E[D]
};

/// Which matrix drives the noise term σ²·Tr(G Σ).
enum class NoiseTermForm {
  Consistent,  // G = E[U B² Uᴴ]
  ProjectionSquared,  // G = E[D²]
};

struct TheoryOptions {
  Coupling coupling = Coupling::Full;
  NoiseTermForm noise_term = NoiseTermForm::Consistent;
};

struct MomentSet {
  CMatrix ED;           // E[D], 2L×2L
  CMatrix EDT_kron_I;   // E[D]ᵀ ⊗ I
  CMatrix I_kron_ED;    // I ⊗ E[D]
  CMatrix EDT_kron_ED;  // E[Dᵀ ⊗ D]
  CMatrix G;            // E[U B² Uᴴ]
  CMatrix ED2;          // E[D²]
  RMatrix ED_stderr_re; // Monte Carlo standard error of Re E[D]
  RMatrix ED_stderr_im; // and of Im E[D]
  std::size_t samples = 0;
  std::size_t node = 0;

  Eigen::Index dim() const { return ED.rows(); }
  /// E[D]ᵀ ⊗ E[D]
  CMatrix decoupled_second_moment() const;
  const CMatrix& noise_matrix(NoiseTermForm form) const {
    return form == NoiseTermForm::Consistent ? G : ED2;
  }
};

/// Streaming accumulator over regressor draws.
class MomentAccumulator {
 public:
  MomentAccumulator(std::size_t L, std::size_t T, double regularization);

  void add(const CMatrix& X);
  std::size_t count() const { return count_; }
  /// Throws ParameterError when no draw was added.
  MomentSet finish(std::size_t node = 0) const;

 private:
  Eigen::Index dim_;
  double delta_;
  std::size_t count_ = 0;
  CMatrix sum_D_;
  RMatrix sumsq_re_;
  RMatrix sumsq_im_;
  CMatrix sum_kron_;
  CMatrix sum_G_;
  CMatrix sum_D2_;
};

struct MomentOptions {
  std::size_t filter_length = 4;
  std::size_t projection_order = 2;
  double regularization = 1e-3;
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  /// Minimum samples discarded before each fresh segment; the model's own
  /// burn-in is used when larger.
  std::size_t burn_in = 64;
  std::size_t node = 0;
};

/// Monte Carlo moments from independent regressor draws, each built from a
/// fresh signal segment of length L + T − 1 (after burn-in).
MomentSet estimate_moments(const SignalModel& model, const MomentOptions& options);

/// Moments from an explicit list of L×T regressor matrices.
MomentSet moments_from_draws(std::span<const CMatrix> draws, double regularization,
                             std::size_t node = 0);

struct TransferMatrix {
  CMatrix F;
  std::size_t node = 0;
  double step_size = 0.0;
};

/// F = I − μ(E[D]ᵀ⊗I) − μ(I⊗E[D]) + μ²·(second moment per `coupling`).
TransferMatrix build_transfer(const MomentSet& moments, double step_size,
                              Coupling coupling = Coupling::Full);

/// Linear functional σ ↦ σ²_v · vec(G)ᴴ σ = σ²_v · Tr(G Σ).
struct NoiseFunctional {
  CVector weights;  // σ²_v · vec(G)

  cplx operator()(const CVector& sigma) const { return weights.dot(sigma); }
  /// 1×n row vector form.
  CMatrix row() const { return weights.adjoint(); }
};

NoiseFunctional noise_term(const MomentSet& moments, double noise_variance,
                           NoiseTermForm form = NoiseTermForm::Consistent);

struct MsdPrediction {
  bool stable = false;
  /// Largest spectral radius over the cyclic products P_{k,1}.
  double worst_radius = 0.0;
  /// Indexed by ring position k: P_{k,1} = F_k F_{k+1} … F_{k−1}.
  std::vector<CMatrix> cyclic_products;
  /// Indexed by ring position k: f_k = Σ_l s_{k+l−1} P_{k,l+1}.
  std::vector<CMatrix> f_rows;
  std::vector<double> radii;
  /// f_k (I − P_{k,1})⁻¹ vec(I) by ring position k. This is the steady-state
  /// MSD of the weights leaving position k − 1.
  std::vector<double> formula_msd;
  /// Steady-state MSD of each node's own output, indexed by node id.
  std::vector<double> node_msd;
  double network_msd = 0.0;
};

/// Closed-form steady-state MSD. `moments` is indexed by node id. When any
/// cyclic product has spectral radius >= 1 the result carries stable = false
/// and no MSD values.
MsdPrediction predict_msd(const NetworkConfig& config,
                          std::span<const MomentSet> moments,
                          const TheoryOptions& options = {});

struct StabilityMatrices {
  CMatrix M;  // (E[D]ᵀ⊗I) + (I⊗E[D])
  CMatrix N;  // second moment per coupling
  CMatrix H;  // [[M/2, −N/2], [I, 0]]
  double bound_mn = 0.0;  // 1 / λ_max(M⁻¹N), +inf when λ_max <= 0
  double bound_h = 0.0;   // 1 / largest positive real eigenvalue of H
  double mu_max = 0.0;
  bool m_singular = false;
  /// H has eigenvalues off the real axis (they do not enter bound_h).
  bool h_complex_spectrum = false;
  std::size_t node = 0;
};

StabilityMatrices stability_bound(const MomentSet& moments,
                                  Coupling coupling = Coupling::Full);

/// Smallest μ > 0 with ρ(I − μM + μ²N) >= 1, found by scanning and
/// bisection on [0, mu_hi]. Returns mu_hi when none is found.
double spectral_step_limit(const StabilityMatrices& matrices, double mu_hi,
                           double tolerance = 1e-4);

}  // namespace incaapa
