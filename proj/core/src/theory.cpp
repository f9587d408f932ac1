#include "incaapa/theory.hpp"

#include <cmath>
#include <limits>

#include "incaapa/errors.hpp"
#include "incaapa/random.hpp"

namespace incaapa {

CMatrix augmented_regressor(const CMatrix& X) {
  const Eigen::Index L = X.rows();
  CMatrix U(2 * L, X.cols());
  U.topRows(L) = X.conjugate();
  U.bottomRows(L) = X;
  return U;
}

CMatrix MomentSet::decoupled_second_moment() const {
  return kron(ED.transpose(), ED);
}

MomentAccumulator::MomentAccumulator(std::size_t L, std::size_t T,
                                     double regularization)
    : dim_(2 * static_cast<Eigen::Index>(L)), delta_(regularization) {
  if (L < 1 || T < 1) throw ParameterError("L and T must be >= 1");
  const Eigen::Index n2 = dim_ * dim_;
  sum_D_ = CMatrix::Zero(dim_, dim_);
  sumsq_re_ = RMatrix::Zero(dim_, dim_);
  sumsq_im_ = RMatrix::Zero(dim_, dim_);
  sum_kron_ = CMatrix::Zero(n2, n2);
  sum_G_ = CMatrix::Zero(dim_, dim_);
  sum_D2_ = CMatrix::Zero(dim_, dim_);
}

void MomentAccumulator::add(const CMatrix& X) {
  if (2 * X.rows() != dim_) throw RangeError("regressor has the wrong length");
  const CMatrix U = augmented_regressor(X);
  const Eigen::Index T = U.cols();
  CMatrix system = U.adjoint() * U;
  system.diagonal().array() += delta_;
  const CMatrix B = hpd_inverse(system);
  const CMatrix UB = U * B;
  const CMatrix D = UB * U.adjoint();
  (void)T;

  sum_D_ += D;
  sumsq_re_.array() += D.real().array().square();
  sumsq_im_.array() += D.imag().array().square();
  sum_G_.noalias() += UB * UB.adjoint();
  sum_D2_.noalias() += D * D;
  // Block (i, j) of Dᵀ ⊗ D is D(j, i)·D.
  for (Eigen::Index j = 0; j < dim_; ++j) {
    for (Eigen::Index i = 0; i < dim_; ++i) {
      sum_kron_.block(i * dim_, j * dim_, dim_, dim_) += D(j, i) * D;
    }
  }
  ++count_;
}

MomentSet MomentAccumulator::finish(std::size_t node) const {
  if (count_ == 0) throw ParameterError("moment estimation needs at least one draw");
  const double m = static_cast<double>(count_);
  MomentSet out;
  out.samples = count_;
  out.node = node;
  out.ED = hermitian_part(sum_D_ / m);
  out.G = hermitian_part(sum_G_ / m);
  out.ED2 = hermitian_part(sum_D2_ / m);
  out.EDT_kron_ED = sum_kron_ / m;
  const CMatrix I = CMatrix::Identity(dim_, dim_);
  out.EDT_kron_I = kron(out.ED.transpose(), I);
  out.I_kron_ED = kron(I, out.ED);

  const RMatrix mean_re = (sum_D_ / m).real();
  const RMatrix mean_im = (sum_D_ / m).imag();
  const double denom = count_ > 1 ? m * (m - 1.0) : 1.0;
  const auto stderr_of = [&](const RMatrix& sumsq, const RMatrix& mean) {
    RMatrix var = (sumsq.array() - m * mean.array().square()).max(0.0);
    return RMatrix((var.array() / denom).sqrt());
  };
  out.ED_stderr_re = stderr_of(sumsq_re_, mean_re);
  out.ED_stderr_im = stderr_of(sumsq_im_, mean_im);
  return out;
}

MomentSet estimate_moments(const SignalModel& model, const MomentOptions& options) {
  if (options.samples == 0) throw ParameterError("moment sample count must be > 0");
  const std::size_t L = options.filter_length;
  const std::size_t T = options.projection_order;
  MomentAccumulator acc(L, T, options.regularization);
  SignalModel draw_model = model;
  draw_model.burn_in = std::max(model.burn_in, options.burn_in);
  const std::size_t span = L + T - 1;
  for (std::size_t m = 0; m < options.samples; ++m) {
    draw_model.seed = derive_seed(options.seed, streams::kMoments, m);
    const ComplexSequence seq = generate(draw_model, span);
    acc.add(build_regressors(seq.samples, L, T, span - 1, Padding::Disallow));
  }
  return acc.finish(options.node);
}

MomentSet moments_from_draws(std::span<const CMatrix> draws,
                             double regularization, std::size_t node) {
  if (draws.empty()) throw ParameterError("moment estimation needs at least one draw");
  MomentAccumulator acc(static_cast<std::size_t>(draws.front().rows()),
                        static_cast<std::size_t>(draws.front().cols()),
                        regularization);
  for (const auto& X : draws) acc.add(X);
  return acc.finish(node);
}

TransferMatrix build_transfer(const MomentSet& moments, double step_size,
                              Coupling coupling) {
  const Eigen::Index n2 = moments.EDT_kron_I.rows();
  TransferMatrix out;
  out.node = moments.node;
  out.step_size = step_size;
  out.F = CMatrix::Identity(n2, n2);
  if (step_size == 0.0) return out;
  out.F -= step_size * (moments.EDT_kron_I + moments.I_kron_ED);
  const double mu2 = step_size * step_size;
  if (coupling == Coupling::Full) {
    out.F += mu2 * moments.EDT_kron_ED;
  } else {
    out.F += mu2 * moments.decoupled_second_moment();
  }
  return out;
}

NoiseFunctional noise_term(const MomentSet& moments, double noise_variance,
                           NoiseTermForm form) {
  return NoiseFunctional{noise_variance * vec(moments.noise_matrix(form))};
}

MsdPrediction predict_msd(const NetworkConfig& config,
                          std::span<const MomentSet> moments,
                          const TheoryOptions& options) {
  config.validate();
  const std::size_t N = config.nodes;
  if (moments.size() != N) {
    throw ConfigError("predict_msd needs one moment set per node");
  }
  const Eigen::Index n2 = moments.front().EDT_kron_I.rows();
  for (const auto& m : moments) {
    if (m.EDT_kron_I.rows() != n2) throw ConfigError("moment sets differ in size");
  }

  // Per ring position p: F_p and the μ²-scaled noise row s_p.
  std::vector<CMatrix> F(N);
  std::vector<CMatrix> s(N);
  for (std::size_t p = 0; p < N; ++p) {
    const std::size_t k = config.ring_order[p];
    const double mu = config.step_sizes[k];
    F[p] = build_transfer(moments[k], mu, options.coupling).F;
    s[p] = (mu * mu) *
           noise_term(moments[k], config.noise.variances[k], options.noise_term).row();
  }

  MsdPrediction out;
  out.cyclic_products.resize(N);
  out.f_rows.resize(N);
  out.radii.resize(N);
  const CMatrix I = CMatrix::Identity(n2, n2);
  for (std::size_t k = 0; k < N; ++k) {
    // P_{k,l} for l = N+1 down to 1, accumulated from the right.
    CMatrix P = I;
    CMatrix f = CMatrix::Zero(1, n2);
    for (std::size_t l = N; l >= 1; --l) {
      const std::size_t pos = (k + l - 1) % N;
      f += s[pos] * P;  // s_{k+l−1} P_{k,l+1}
      P = F[pos] * P;   // P_{k,l}
    }
    out.cyclic_products[k] = std::move(P);
    out.f_rows[k] = std::move(f);
    out.radii[k] = spectral_radius(out.cyclic_products[k]);
  }
  out.worst_radius = *std::max_element(out.radii.begin(), out.radii.end());
  out.stable = out.worst_radius < 1.0;
  if (!out.stable) return out;

  const CVector vec_identity = vec(CMatrix::Identity(moments.front().dim(),
                                                     moments.front().dim()));
  out.formula_msd.resize(N);
  for (std::size_t k = 0; k < N; ++k) {
    const CVector sigma = (I - out.cyclic_products[k]).partialPivLu().solve(vec_identity);
    out.formula_msd[k] = (out.f_rows[k] * sigma)(0, 0).real();
  }
  out.node_msd.resize(N);
  for (std::size_t q = 0; q < N; ++q) {
    out.node_msd[config.ring_order[q]] = out.formula_msd[(q + 1) % N];
  }
  double total = 0.0;
  for (double v : out.node_msd) total += v;
  out.network_msd = total / static_cast<double>(N);
  return out;
}

StabilityMatrices stability_bound(const MomentSet& moments, Coupling coupling) {
  StabilityMatrices out;
  out.node = moments.node;
  out.M = moments.EDT_kron_I + moments.I_kron_ED;
  out.N = coupling == Coupling::Full ? moments.EDT_kron_ED
                                     : moments.decoupled_second_moment();
  const Eigen::Index n = out.M.rows();
  out.H = CMatrix::Zero(2 * n, 2 * n);
  out.H.topLeftCorner(n, n) = 0.5 * out.M;
  out.H.topRightCorner(n, n) = -0.5 * out.N;
  out.H.bottomLeftCorner(n, n) = CMatrix::Identity(n, n);

  constexpr double inf = std::numeric_limits<double>::infinity();
  Eigen::FullPivLU<CMatrix> lu(out.M);
  if (!lu.isInvertible()) {
    out.m_singular = true;
    out.bound_mn = inf;
  } else {
    const CMatrix ratio = lu.solve(out.N);
    Eigen::ComplexEigenSolver<CMatrix> es(ratio, false);
    const double lam = es.eigenvalues().real().maxCoeff();
    out.bound_mn = lam > 0.0 ? 1.0 / lam : inf;
  }

  Eigen::ComplexEigenSolver<CMatrix> hs(out.H, false);
  double largest_real = 0.0;
  for (const cplx& lam : hs.eigenvalues()) {
    const double tol = 1e-8 * std::max(1.0, std::abs(lam));
    if (std::abs(lam.imag()) <= tol) {
      largest_real = std::max(largest_real, lam.real());
    } else {
      out.h_complex_spectrum = true;
    }
  }
  out.bound_h = largest_real > 0.0 ? 1.0 / largest_real : inf;
  out.mu_max = std::min(out.bound_mn, out.bound_h);
  return out;
}

double spectral_step_limit(const StabilityMatrices& matrices, double mu_hi,
                           double tolerance) {
  const Eigen::Index n = matrices.M.rows();
  const CMatrix I = CMatrix::Identity(n, n);
  const auto radius = [&](double mu) {
    return spectral_radius(I - mu * matrices.M + mu * mu * matrices.N);
  };
  constexpr int kScan = 64;
  double lo = 0.0;
  double hi = mu_hi;
  bool found = false;
  for (int s = 1; s <= kScan; ++s) {
    const double mu = mu_hi * s / kScan;
    if (radius(mu) >= 1.0) {
      hi = mu;
      found = true;
      break;
    }
    lo = mu;
  }
  if (!found) return mu_hi;
  while (hi - lo > tolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    (radius(mid) >= 1.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace incaapa
