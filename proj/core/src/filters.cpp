#include "incaapa/filters.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "incaapa/errors.hpp"
#include "incaapa/random.hpp"

namespace incaapa {

NodeState NodeState::zeros(std::size_t L, double step_size,
                           double regularization) {
  const auto n = static_cast<Eigen::Index>(L);
  return NodeState{CVector::Zero(n), CVector::Zero(n), step_size,
                   regularization};
}

CVector augmented_weight_error(const WeightTruth& truth, const CVector& h,
                               const CVector& g) {
  const Eigen::Index L = h.size();
  CVector w(2 * L);
  w.head(L) = truth.h - h;
  w.tail(L) = truth.g - g;
  return w;
}

CMatrix gram(const CMatrix& X) {
  const CMatrix xhx = X.adjoint() * X;
  return xhx + X.transpose() * X.conjugate();
}

UpdateWorkspace::UpdateWorkspace(std::size_t /*L*/, std::size_t T)
    : A_(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(T)),
      system_(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(T)),
      e_(static_cast<Eigen::Index>(T)),
      z_(static_cast<Eigen::Index>(T)),
      llt_(static_cast<Eigen::Index>(T)) {}

void UpdateWorkspace::apply(CVector& h, CVector& g, double step_size,
                            double regularization, const CMatrix& X,
                            const CVector& d) {
  e_ = d;
  e_.noalias() -= X.transpose() * h;
  e_.noalias() -= X.adjoint() * g;

  A_.noalias() = X.adjoint() * X;
  system_ = A_.conjugate();
  A_ += system_;
  system_ = A_;
  system_.diagonal().array() += regularization;

  llt_.compute(system_);
  if (llt_.info() != Eigen::Success) {
    throw SolveError("A + delta*I is not positive definite");
  }
  z_ = llt_.solve(e_);
  h.noalias() += step_size * (X.conjugate() * z_);
  g.noalias() += step_size * (X * z_);
}

std::pair<NodeState, UpdateRecord> local_update(const NodeState& state,
                                                const RegressorBlock& block,
                                                const WeightTruth* truth) {
  const Eigen::Index L = block.X.rows();
  const Eigen::Index T = block.X.cols();
  if (state.h.size() != L || state.g.size() != L || block.d.size() != T) {
    throw RangeError("local_update: state and block dimensions disagree");
  }
  if (!(state.regularization > 0.0)) {
    throw ParameterError("regularization delta must be > 0");
  }
  UpdateWorkspace ws(static_cast<std::size_t>(L), static_cast<std::size_t>(T));
  NodeState next = state;
  ws.apply(next.h, next.g, state.step_size, state.regularization, block.X,
           block.d);

  UpdateRecord record;
  record.X = block.X;
  record.e = ws.error();
  record.A = ws.gram();
  record.B = hpd_inverse(record.A +
                         state.regularization * CMatrix::Identity(T, T));
  record.step_size = state.step_size;
  record.node = block.node;
  record.time = block.time;
  if (truth != nullptr) {
    record.w_pre = augmented_weight_error(*truth, state.h, state.g);
    record.w_post = augmented_weight_error(*truth, next.h, next.g);
  }
  return {std::move(next), std::move(record)};
}

CycleResult incremental_cycle(std::span<const NodeState> states,
                              std::span<const RegressorBlock> blocks,
                              std::span<const std::size_t> ring_order,
                              const WeightTruth* truth) {
  const std::size_t n = states.size();
  if (blocks.size() != n || ring_order.size() != n) {
    throw ConfigError("incremental_cycle: need one block and one ring slot per node");
  }
  CycleResult result;
  result.states.assign(states.begin(), states.end());
  result.records.reserve(n);
  if (n == 0) return result;
  // Weights entering the cycle: last node's output of the previous cycle.
  CVector h = states[ring_order[n - 1]].h;
  CVector g = states[ring_order[n - 1]].g;
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t k = ring_order[p];
    if (k >= n) throw ConfigError("ring order references an unknown node");
    NodeState incoming{h, g, states[k].step_size, states[k].regularization};
    auto [next, record] = local_update(incoming, blocks[k], truth);
    h = next.h;
    g = next.g;
    result.states[k] = std::move(next);
    result.records.push_back(std::move(record));
  }
  return result;
}

NodeState noncooperative_update(const NodeState& state,
                                const RegressorBlock& block) {
  return local_update(state, block).first;
}

EnergyAudit energy_audit(const UpdateRecord& record, const CMatrix& sigma) {
  if (!record.w_pre || !record.w_post) {
    throw ParameterError("energy_audit needs a record with weight errors");
  }
  const CMatrix U = [&] {
    const Eigen::Index L = record.X.rows();
    CMatrix u(2 * L, record.X.cols());
    u.topRows(L) = record.X.conjugate();
    u.bottomRows(L) = record.X;
    return u;
  }();
  const CVector& pre = *record.w_pre;
  const CVector& post = *record.w_post;

  const CMatrix F = U.adjoint() * sigma * U;
  Eigen::LLT<CMatrix> llt(hermitian_part(F));
  EnergyAudit audit;
  if (llt.info() != Eigen::Success) {
    audit.skipped = true;
    return audit;
  }
  const CVector ea = U.adjoint() * (sigma * pre);
  const CVector ep = U.adjoint() * (sigma * post);

  const double post_energy = post.dot(sigma * post).real();
  const double pre_energy = pre.dot(sigma * pre).real();
  const double ea_term = ea.dot(llt.solve(ea)).real();
  const double ep_term = ep.dot(llt.solve(ep)).real();

  audit.residual = std::abs(post_energy + ea_term - pre_energy - ep_term);
  audit.scale = std::abs(post_energy) + std::abs(ea_term) +
                std::abs(pre_energy) + std::abs(ep_term);
  audit.relative = audit.scale > 0.0 ? audit.residual / audit.scale : 0.0;
  return audit;
}

CVector weight_error_via_recursion(const UpdateRecord& record,
                                   const CMatrix& sigma) {
  if (!record.w_pre || !record.w_post) {
    throw ParameterError("recursion check needs a record with weight errors");
  }
  const Eigen::Index L = record.X.rows();
  CMatrix U(2 * L, record.X.cols());
  U.topRows(L) = record.X.conjugate();
  U.bottomRows(L) = record.X;
  const CMatrix F = U.adjoint() * sigma * U;
  const CVector ea = U.adjoint() * (sigma * *record.w_pre);
  const CVector ep = U.adjoint() * (sigma * *record.w_post);
  return *record.w_pre - U * F.partialPivLu().solve(ea - ep);
}

RVector LearningCurve::network_average() const {
  return msd.rowwise().mean();
}

LearningCurve average_curves(std::span<const LearningCurve> curves) {
  if (curves.empty()) throw ParameterError("no curves to average");
  LearningCurve out;
  out.msd = RMatrix::Zero(curves.front().msd.rows(), curves.front().msd.cols());
  out.config_hash = curves.front().config_hash;
  for (const auto& c : curves) {
    if (c.msd.rows() != out.msd.rows() || c.msd.cols() != out.msd.cols()) {
      throw RangeError("learning curves differ in shape");
    }
    out.msd += c.msd;
    out.trials += c.trials;
  }
  out.msd /= static_cast<double>(curves.size());
  return out;
}

namespace {

LearningCurve empty_curve(std::size_t horizon, std::size_t nodes) {
  LearningCurve c;
  c.msd = RMatrix::Zero(static_cast<Eigen::Index>(horizon),
                        static_cast<Eigen::Index>(nodes));
  c.trials = 1;
  return c;
}

void mark_diverged(LearningCurve& curve, std::size_t from_cycle) {
  const auto rows = static_cast<Eigen::Index>(curve.horizon());
  const auto start = static_cast<Eigen::Index>(from_cycle);
  curve.msd.bottomRows(rows - start).setConstant(
      std::numeric_limits<double>::infinity());
}

double squared_error(const CVector& h, const CVector& g, const CVector& h0,
                     const CVector& g0) {
  return (h0 - h).squaredNorm() + (g0 - g).squaredNorm();
}

}  // namespace

TrialCurves simulate_trial(const NetworkConfig& config, std::size_t horizon,
                           std::uint64_t trial_seed,
                           const TrialOptions& options) {
  config.validate();
  const std::size_t N = config.nodes;
  const std::size_t L = config.filter_length;
  const std::size_t T = config.projection_order;

  std::vector<ObservationStream> streams;
  streams.reserve(N);
  for (std::size_t k = 0; k < N; ++k) {
    streams.emplace_back(config, k, horizon,
                         derive_seed(trial_seed, streams::kSignal, k),
                         derive_seed(trial_seed, streams::kNoise, k));
  }

  RegressorBlock block;
  block.X.resize(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(T));
  block.d.resize(static_cast<Eigen::Index>(T));
  block.v.resize(static_cast<Eigen::Index>(T));
  UpdateWorkspace ws(L, T);
  const auto& h0 = config.h_true;
  const auto& g0 = config.g_true;

  TrialCurves out;
  if (options.incremental) {
    LearningCurve curve = empty_curve(horizon, N);
    CVector h = CVector::Zero(static_cast<Eigen::Index>(L));
    CVector g = CVector::Zero(static_cast<Eigen::Index>(L));
    bool diverged = false;
    for (std::size_t i = 0; i < horizon && !diverged; ++i) {
      for (std::size_t k : config.ring_order) {
        streams[k].fill(i, block);
        ws.apply(h, g, config.step_sizes[k], config.regularization, block.X,
                 block.d);
        const double err = squared_error(h, g, h0, g0);
        if (!(err <= options.divergence_cap)) {
          mark_diverged(curve, i);
          diverged = true;
          break;
        }
        curve.msd(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = err;
      }
    }
    out.incremental = std::move(curve);
  }
  if (options.noncooperative) {
    LearningCurve curve = empty_curve(horizon, N);
    for (std::size_t k = 0; k < N; ++k) {
      CVector h = CVector::Zero(static_cast<Eigen::Index>(L));
      CVector g = CVector::Zero(static_cast<Eigen::Index>(L));
      const double mu = options.noncooperative_step_scale * config.step_sizes[k];
      for (std::size_t i = 0; i < horizon; ++i) {
        streams[k].fill(i, block);
        ws.apply(h, g, mu, config.regularization, block.X, block.d);
        const double err = squared_error(h, g, h0, g0);
        const auto row = static_cast<Eigen::Index>(i);
        const auto col = static_cast<Eigen::Index>(k);
        if (!(err <= options.divergence_cap)) {
          curve.msd.col(col).tail(curve.msd.rows() - row).setConstant(
              std::numeric_limits<double>::infinity());
          break;
        }
        curve.msd(row, col) = err;
      }
    }
    out.noncooperative = std::move(curve);
  }
  return out;
}

}  // namespace incaapa
