#include "incaapa/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "incaapa/errors.hpp"

namespace incaapa {

void NetworkConfig::validate() const {
  if (nodes < 1) throw ConfigError("network needs at least one node");
  if (filter_length < 1) throw ConfigError("filter length L must be >= 1");
  if (projection_order < 1) throw ConfigError("projection order T must be >= 1");
  if (!(regularization > 0.0)) throw ConfigError("regularization delta must be > 0");
  if (ring_order.size() != nodes) {
    throw ConfigError("ring order must list every node exactly once");
  }
  std::vector<std::size_t> sorted = ring_order;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = 0; k < nodes; ++k) {
    if (sorted[k] != k) {
      throw ConfigError("ring order is not a permutation of the node ids");
    }
  }
  if (signals.size() != nodes) throw ConfigError("one signal model per node required");
  if (noise.variances.size() != nodes) {
    throw ConfigError("one noise variance per node required");
  }
  // Zero variance is accepted here so noiseless runs can be configured.
  for (double v : noise.variances) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ConfigError("noise variances must be finite and >= 0");
    }
  }
  if (step_sizes.size() != nodes) throw ConfigError("one step size per node required");
  for (double mu : step_sizes) {
    if (!(mu >= 0.0) || !std::isfinite(mu)) {
      throw ConfigError("step sizes must be finite and >= 0");
    }
  }
  const auto L = static_cast<Eigen::Index>(filter_length);
  if (h_true.size() != L || g_true.size() != L) {
    throw ConfigError("true weights h and g must have length L");
  }
}

NetworkConfig NetworkConfig::reference_setup(SignalKind kind,
                                         std::uint64_t profile_seed,
                                         std::size_t nodes) {
  NetworkConfig config;
  config.nodes = nodes;
  config.filter_length = 4;
  config.projection_order = 2;
  config.ring_order.resize(nodes);
  std::iota(config.ring_order.begin(), config.ring_order.end(), 0);
  config.signals.assign(nodes, SignalModel::with_defaults(kind));
  config.noise = NoiseProfile::log_uniform(nodes, 1e-3, 1e-2, profile_seed);
  config.h_true = CVector::Ones(4);
  config.g_true = CVector::Ones(4);
  config.step_sizes.assign(nodes, 0.2);
  config.regularization = 1e-3;
  return config;
}

std::vector<std::size_t> NetworkConfig::ring_positions() const {
  std::vector<std::size_t> pos(ring_order.size());
  for (std::size_t p = 0; p < ring_order.size(); ++p) pos[ring_order[p]] = p;
  return pos;
}

CMatrix AugmentedCovariance::assembled() const {
  const Eigen::Index L = C.rows();
  CMatrix out(2 * L, 2 * L);
  out.topLeftCorner(L, L) = C;
  out.topRightCorner(L, L) = P;
  out.bottomLeftCorner(L, L) = P.conjugate();
  out.bottomRightCorner(L, L) = C.conjugate();
  return out;
}

CMatrix build_regressors(std::span<const cplx> seq, std::size_t L,
                         std::size_t T, std::size_t i, Padding padding) {
  if (L < 1 || T < 1) throw RangeError("L and T must be >= 1");
  if (i >= seq.size()) {
    throw RangeError("time index " + std::to_string(i) +
                     " is past the end of a sequence of length " +
                     std::to_string(seq.size()));
  }
  if (padding == Padding::Disallow && i + 2 < L + T) {
    throw RangeError("window of L + T - 1 samples reaches before t = 0");
  }
  CMatrix X(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(T));
  for (std::size_t j = 0; j < T; ++j) {
    for (std::size_t l = 0; l < L; ++l) {
      const std::size_t back = j + l;
      X(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(j)) =
          back <= i ? seq[i - back] : cplx{0.0, 0.0};
    }
  }
  return X;
}

cplx widely_linear_response(const CVector& x, const CVector& h,
                            const CVector& g) {
  cplx acc{0.0, 0.0};
  for (Eigen::Index l = 0; l < x.size(); ++l) {
    acc += x[l] * h[l] + std::conj(x[l]) * g[l];
  }
  return acc;
}

CVector widely_linear_response(const CMatrix& X, const CVector& h,
                               const CVector& g) {
  CVector out(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    out[j] = widely_linear_response(CVector(X.col(j)), h, g);
  }
  return out;
}

ObservationStream::ObservationStream(const NetworkConfig& config,
                                     std::size_t node, std::size_t horizon,
                                     std::uint64_t signal_seed,
                                     std::uint64_t noise_seed)
    : node_(node),
      L_(config.filter_length),
      T_(config.projection_order) {
  if (node >= config.nodes) throw RangeError("node index out of range");
  SignalModel model = config.signals[node];
  model.seed = signal_seed;
  input_ = generate(model, horizon);
  noise_ = gen_doubly_white(horizon, config.noise.variances[node], noise_seed)
               .samples;
  desired_.resize(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    const CVector x =
        build_regressors(input_.samples, L_, 1, t, Padding::Zero).col(0);
    desired_[t] =
        widely_linear_response(x, config.h_true, config.g_true) + noise_[t];
  }
}

void ObservationStream::fill(std::size_t i, RegressorBlock& out) const {
  if (i >= horizon()) throw RangeError("time index past the stream horizon");
  out.node = node_;
  out.time = i;
  for (std::size_t j = 0; j < T_; ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    for (std::size_t l = 0; l < L_; ++l) {
      const std::size_t back = j + l;
      out.X(static_cast<Eigen::Index>(l), col) =
          back <= i ? input_.samples[i - back] : cplx{0.0, 0.0};
    }
    const bool inside = j <= i;
    out.d[col] = inside ? desired_[i - j] : cplx{0.0, 0.0};
    out.v[col] = inside ? noise_[i - j] : cplx{0.0, 0.0};
  }
}

RegressorBlock ObservationStream::block(std::size_t i) const {
  RegressorBlock out;
  out.X.resize(static_cast<Eigen::Index>(L_), static_cast<Eigen::Index>(T_));
  out.d.resize(static_cast<Eigen::Index>(T_));
  out.v.resize(static_cast<Eigen::Index>(T_));
  fill(i, out);
  return out;
}

std::vector<RegressorBlock> generate_observations(const NetworkConfig& config,
                                                  std::size_t node,
                                                  std::size_t horizon,
                                                  std::uint64_t signal_seed,
                                                  std::uint64_t noise_seed) {
  config.validate();
  const ObservationStream stream(config, node, horizon, signal_seed, noise_seed);
  std::vector<RegressorBlock> blocks;
  blocks.reserve(horizon);
  for (std::size_t i = 0; i < horizon; ++i) blocks.push_back(stream.block(i));
  return blocks;
}

namespace {
AugmentedCovariance finish(CMatrix C, CMatrix P, std::size_t M, std::size_t L) {
  AugmentedCovariance cov;
  cov.samples = M;
  cov.underdetermined = M < L;
  if (M > 0) {
    C /= static_cast<double>(M);
    P /= static_cast<double>(M);
  }
  cov.C = std::move(C);
  cov.P = std::move(P);
  return cov;
}
}  // namespace

AugmentedCovariance estimate_augmented_covariance(std::span<const cplx> seq,
                                                  std::size_t L,
                                                  std::size_t M) {
  if (L < 1) throw RangeError("L must be >= 1");
  if (M > 0 && seq.size() + 1 < M + L) {
    throw RangeError("sequence too short for M regressors of length L");
  }
  const auto n = static_cast<Eigen::Index>(L);
  CMatrix C = CMatrix::Zero(n, n);
  CMatrix P = CMatrix::Zero(n, n);
  CVector x(n);
  for (std::size_t m = 0; m < M; ++m) {
    const std::size_t newest = m + L - 1;
    for (std::size_t l = 0; l < L; ++l) {
      x[static_cast<Eigen::Index>(l)] = seq[newest - l];
    }
    C.noalias() += x * x.adjoint();
    P.noalias() += x * x.transpose();
  }
  return finish(std::move(C), std::move(P), M, L);
}

AugmentedCovariance estimate_augmented_covariance(
    std::span<const RegressorBlock> blocks) {
  if (blocks.empty()) return finish(CMatrix(0, 0), CMatrix(0, 0), 0, 1);
  const Eigen::Index n = blocks.front().X.rows();
  CMatrix C = CMatrix::Zero(n, n);
  CMatrix P = CMatrix::Zero(n, n);
  for (const auto& b : blocks) {
    const CVector x = b.X.col(0);
    C.noalias() += x * x.adjoint();
    P.noalias() += x * x.transpose();
  }
  return finish(std::move(C), std::move(P), blocks.size(),
                static_cast<std::size_t>(n));
}

}  // namespace incaapa
