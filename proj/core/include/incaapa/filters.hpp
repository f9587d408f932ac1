#pragma once

// incAAPA node update, one incremental ring cycle, the non-cooperative
// augmented APA baseline, energy-conservation audit and single-trial
// simulation.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "incaapa/linalg.hpp"
#include "incaapa/network.hpp"

namespace incaapa {

struct NodeState {
  CVector h;
  CVector g;
  double step_size = 0.0;
  double regularization = 1e-3;

  static NodeState zeros(std::size_t L, double step_size, double regularization);
};

/// Known true weights; enables weight-error instrumentation.
struct WeightTruth {
  CVector h;
  CVector g;
};

/// Stacked augmented weight error [h° − h; g° − g].
CVector augmented_weight_error(const WeightTruth& truth, const CVector& h,
                               const CVector& g);

struct UpdateRecord {
  CMatrix X;  // L×T regressors used
  CVector e;  // a-priori error d − Xᵀh − Xᴴg
  CMatrix A;  // XᴴX + XᵀX*
  CMatrix B;  // (A + δI)⁻¹
  double step_size = 0.0;
  std::optional<CVector> w_pre;
  std::optional<CVector> w_post;
  std::size_t node = 0;
  std::size_t time = 0;
};

/// T×T Gram matrix XᴴX + XᵀX*. Hermitian PSD.
CMatrix gram(const CMatrix& X);

/// Scratch space for repeated updates at fixed (L, T). The state update
/// solves (A + δI) z = e by Cholesky instead of forming B.
class UpdateWorkspace {
 public:
  UpdateWorkspace(std::size_t L, std::size_t T);

  /// h ← h + μ X* z, g ← g + μ X z with z = (A + δI)⁻¹ e.
  void apply(CVector& h, CVector& g, double step_size, double regularization,
             const CMatrix& X, const CVector& d);

  /// A-priori error of the last apply().
  const CVector& error() const { return e_; }
  /// Gram matrix A of the last apply().
  const CMatrix& gram() const { return A_; }

 private:
  CMatrix A_;
  CMatrix system_;
  CVector e_;
  CVector z_;
  Eigen::LLT<CMatrix> llt_;
};

/// One incAAPA node update starting from `state`.
std::pair<NodeState, UpdateRecord> local_update(
    const NodeState& state, const RegressorBlock& block,
    const WeightTruth* truth = nullptr);

struct CycleResult {
  std::vector<NodeState> states;       // indexed by node id
  std::vector<UpdateRecord> records;   // in ring order
};

/// One pass around the ring. `states[k]` holds node k's latest output and
/// its own (μ_k, δ); `blocks[k]` is node k's data for this time. Node
/// ring[p] starts from the output of ring[p−1]; ring[0] starts from
/// ring[N−1]'s output of the previous cycle.
CycleResult incremental_cycle(std::span<const NodeState> states,
                              std::span<const RegressorBlock> blocks,
                              std::span<const std::size_t> ring_order,
                              const WeightTruth* truth = nullptr);

/// Same algebra as local_update, chained on the node's own previous state.
NodeState noncooperative_update(const NodeState& state,
                                const RegressorBlock& block);

struct EnergyAudit {
  double residual = 0.0;  // |lhs − rhs|
  double scale = 0.0;     // sum of the four nonnegative terms
  double relative = 0.0;  // residual / scale
  bool skipped = false;   // F = UᴴΣU not positive definite
};

/// Weighted energy conservation across one update:
/// ‖w̃_post‖²_Σ + e_aᴴF⁻¹e_a = ‖w̃_pre‖²_Σ + e_pᴴF⁻¹e_p,
/// with F = UᴴΣU, e_a = UᴴΣw̃_pre, e_p = UᴴΣw̃_post.
/// The record must carry w_pre and w_post.
EnergyAudit energy_audit(const UpdateRecord& record, const CMatrix& sigma);

/// w̃_pre − U F⁻¹ (e_a − e_p), the recursion form of the post-update weight
/// error. Compare against record.w_post.
CVector weight_error_via_recursion(const UpdateRecord& record,
                                   const CMatrix& sigma);

/// Trial-averaged squared augmented weight error per cycle and node.
struct LearningCurve {
  RMatrix msd;  // horizon × nodes, ‖h° − h‖² + ‖g° − g‖² after each update
  std::size_t trials = 0;
  std::uint64_t config_hash = 0;

  std::size_t horizon() const { return static_cast<std::size_t>(msd.rows()); }
  std::size_t nodes() const { return static_cast<std::size_t>(msd.cols()); }
  /// Mean over nodes per cycle.
  RVector network_average() const;
};

/// Element-wise mean of per-trial curves, summed in the given order.
LearningCurve average_curves(std::span<const LearningCurve> curves);

enum class Algorithm { Incremental, NonCooperative };

struct TrialOptions {
  bool incremental = true;
  bool noncooperative = true;
  /// Multiplier on μ_k for the non-cooperative baseline (N for a fair
  /// comparison).
  double noncooperative_step_scale = 1.0;
  /// A trial stops once any node's squared error exceeds this; the rest of
  /// the curve is set to +inf.
  double divergence_cap = 1e200;
};

struct TrialCurves {
  std::optional<LearningCurve> incremental;
  std::optional<LearningCurve> noncooperative;
};

/// One seeded realization: both algorithms consume the same data streams.
TrialCurves simulate_trial(const NetworkConfig& config, std::size_t horizon,
                           std::uint64_t trial_seed,
                           const TrialOptions& options = {});

}  // namespace incaapa
