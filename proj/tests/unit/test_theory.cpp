#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "incaapa/errors.hpp"
#include "incaapa/random.hpp"
#include "incaapa/theory.hpp"
#include "test_support.hpp"

using namespace incaapa;
using incaapa::testing::augmented_oracle;
using incaapa::testing::kron_oracle;
using incaapa::testing::random_cmatrix;
using incaapa::testing::random_hpd;
using incaapa::testing::vec_oracle;

namespace {

MomentSet scalar_moments(double c) {
  MomentSet m;
  m.ED = CMatrix::Constant(1, 1, c);
  m.EDT_kron_I = m.ED;
  m.I_kron_ED = m.ED;
  m.EDT_kron_ED = CMatrix::Constant(1, 1, c * c);
  m.G = CMatrix::Constant(1, 1, 1.0);
  m.ED2 = m.EDT_kron_ED;
  m.samples = 1;
  return m;
}

// Moments for every node of `config`, small sample count for speed.
std::vector<MomentSet> network_moments(const NetworkConfig& config, std::size_t samples,
                                       std::uint64_t seed) {
  std::vector<MomentSet> out;
  for (std::size_t k = 0; k < config.nodes; ++k) {
    MomentOptions o;
    o.filter_length = config.filter_length;
    o.projection_order = config.projection_order;
    o.regularization = config.regularization;
    o.samples = samples;
    o.seed = derive_seed(seed, streams::kMoments, k);
    o.node = k;
    out.push_back(estimate_moments(config.signals[k], o));
  }
  return out;
}

// Forward propagation of the weight-error covariance W around the ring:
//   W ← W − μ(E[D]W + W E[D]) + μ²·E[D W D] + μ²σ²·G,
// with E[D W D] read from E[Dᵀ ⊗ D] entry by entry. Iterated to a fixed
// point; the MSD of each node's output is Tr(W).
std::vector<double> propagate_covariance(const NetworkConfig& config,
                                         const std::vector<MomentSet>& moments) {
  const Eigen::Index n = moments.front().ED.rows();
  CMatrix W = CMatrix::Identity(n, n) * 2.0;
  std::vector<double> msd(config.nodes, 0.0);
  for (int cycle = 0; cycle < 20000; ++cycle) {
    double change = 0.0;
    for (std::size_t k : config.ring_order) {
      const MomentSet& m = moments[k];
      const double mu = config.step_sizes[k];
      const double s2 = config.noise.variances[k];
      CMatrix DWD = CMatrix::Zero(n, n);
      // vec(DWD)[r] = Σ_c (Dᵀ⊗D)[r, c] vec(W)[c].
      for (Eigen::Index r = 0; r < n * n; ++r) {
        cplx acc = 0.0;
        for (Eigen::Index c = 0; c < n * n; ++c) acc += m.EDT_kron_ED(r, c) * W(c % n, c / n);
        DWD(r % n, r / n) = acc;
      }
      W = W - mu * (m.ED * W + W * m.ED) + mu * mu * DWD + mu * mu * s2 * m.G;
      const double tr = W.trace().real();
      change = std::max(change, std::abs(tr - msd[k]) / std::max(tr, 1e-300));
      msd[k] = tr;
    }
    if (change < 1e-14) break;
  }
  return msd;
}

NetworkConfig small_network(SignalKind kind, std::size_t nodes, std::size_t L = 2,
                            std::size_t T = 2) {
  NetworkConfig c = NetworkConfig::reference_setup(kind, 13, nodes);
  c.filter_length = L;
  c.projection_order = T;
  c.h_true = CVector::Ones(static_cast<Eigen::Index>(L));
  c.g_true = CVector::Ones(static_cast<Eigen::Index>(L));
  for (std::size_t k = 0; k < nodes; ++k) c.step_sizes[k] = 0.1 + 0.05 * static_cast<double>(k);
  return c;
}

}  // namespace

TEST(AugmentedRegressor, StacksConjugateOverPlain) {
  Xoshiro256 rng(1);
  const CMatrix X = random_cmatrix(rng, 4, 3);
  const CMatrix U = augmented_regressor(X);
  EXPECT_EQ(U, augmented_oracle(X));
  const CMatrix A = X.adjoint() * X + X.transpose() * X.conjugate();
  EXPECT_LT(relative_error(U.adjoint() * U, A), 1e-12);
}

TEST(Moments, ConstantSignalHandExample) {
  const std::vector<CMatrix> draws{CMatrix::Ones(1, 1)};
  const MomentSet m = moments_from_draws(draws, 0.0);
  CMatrix want(2, 2);
  want << 0.5, 0.5, 0.5, 0.5;
  EXPECT_LT(relative_error(m.ED, want), 1e-15);
  const Eigen::SelfAdjointEigenSolver<CMatrix> es(m.ED);
  EXPECT_NEAR(es.eigenvalues()(0), 0.0, 1e-15);
  EXPECT_NEAR(es.eigenvalues()(1), 1.0, 1e-15);
}

TEST(Moments, DoublyWhiteDiagonalIsHalf) {
  const auto s = gen_doubly_white(2000, 1.0, 5);
  std::vector<CMatrix> draws;
  for (const cplx& x : s.samples) draws.push_back(CMatrix::Constant(1, 1, x));
  const MomentSet m = moments_from_draws(draws, 0.0);
  EXPECT_NEAR(m.ED(0, 0).real(), 0.5, 1e-14);
  EXPECT_NEAR(m.ED(1, 1).real(), 0.5, 1e-14);
}

TEST(Moments, KroneckerAssemblyFromMean) {
  Xoshiro256 rng(2);
  std::vector<CMatrix> draws;
  for (int i = 0; i < 50; ++i) draws.push_back(random_cmatrix(rng, 2, 2));
  const MomentSet m = moments_from_draws(draws, 1e-3);
  const CMatrix I = CMatrix::Identity(4, 4);
  EXPECT_LT(relative_error(m.EDT_kron_I, kron_oracle(m.ED.transpose(), I)), 1e-14);
  EXPECT_LT(relative_error(m.I_kron_ED, kron_oracle(I, m.ED)), 1e-14);
  EXPECT_LT(relative_error(m.decoupled_second_moment(), kron_oracle(m.ED.transpose(), m.ED)),
            1e-14);

  // Per-draw brute force for the genuinely second-order moments.
  CMatrix kron_sum = CMatrix::Zero(16, 16);
  CMatrix g_sum = CMatrix::Zero(4, 4);
  for (const auto& X : draws) {
    const CMatrix U = augmented_oracle(X);
    const CMatrix B = (U.adjoint() * U + 1e-3 * CMatrix::Identity(2, 2)).inverse();
    const CMatrix D = U * B * U.adjoint();
    kron_sum += kron_oracle(D.transpose(), D);
    g_sum += U * B * B * U.adjoint();
  }
  EXPECT_LT(relative_error(m.EDT_kron_ED, kron_sum / 50.0), 1e-10);
  EXPECT_LT(relative_error(m.G, g_sum / 50.0), 1e-10);
}

TEST(Moments, HermitianPsd) {
  for (SignalKind kind :
       {SignalKind::CircularAR1, SignalKind::NoncircularARMA, SignalKind::IkedaMap}) {
    MomentOptions o;
    o.samples = 2000;
    o.seed = 3;
    const MomentSet m = estimate_moments(SignalModel::with_defaults(kind), o);
    for (const CMatrix* mat : {&m.ED, &m.G}) {
      EXPECT_LT((*mat - mat->adjoint()).norm(), 1e-8 * mat->norm());
      const Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(*mat));
      EXPECT_GT(es.eigenvalues().minCoeff(), -1e-8 * mat->norm());
    }
  }
}

TEST(Moments, TwoSeedConsistency) {
  MomentOptions a;
  a.samples = 10000;
  a.seed = 101;
  MomentOptions b = a;
  b.seed = 202;
  const auto model = SignalModel::with_defaults(SignalKind::NoncircularARMA);
  const MomentSet ma = estimate_moments(model, a);
  const MomentSet mb = estimate_moments(model, b);
  for (Eigen::Index i = 0; i < ma.ED.rows(); ++i) {
    for (Eigen::Index j = 0; j < ma.ED.cols(); ++j) {
      const double se_re = std::hypot(ma.ED_stderr_re(i, j), mb.ED_stderr_re(i, j));
      const double se_im = std::hypot(ma.ED_stderr_im(i, j), mb.ED_stderr_im(i, j));
      EXPECT_LE(std::abs(ma.ED(i, j).real() - mb.ED(i, j).real()), 3.0 * se_re + 1e-15);
      EXPECT_LE(std::abs(ma.ED(i, j).imag() - mb.ED(i, j).imag()), 3.0 * se_im + 1e-15);
    }
  }
}

TEST(Moments, DeterministicAndRejectsEmpty) {
  MomentOptions o;
  o.samples = 300;
  o.seed = 9;
  const auto model = SignalModel::with_defaults(SignalKind::IkedaMap);
  EXPECT_EQ(estimate_moments(model, o).EDT_kron_ED, estimate_moments(model, o).EDT_kron_ED);
  o.samples = 0;
  EXPECT_THROW(estimate_moments(model, o), ParameterError);
  EXPECT_THROW(moments_from_draws(std::span<const CMatrix>{}, 1e-3), ParameterError);
}

TEST(Transfer, ZeroStepIsIdentity) {
  MomentOptions o;
  o.samples = 200;
  const MomentSet m = estimate_moments(SignalModel::with_defaults(SignalKind::CircularAR1), o);
  const TransferMatrix t = build_transfer(m, 0.0);
  EXPECT_EQ(t.F, CMatrix::Identity(64, 64));
}

TEST(Transfer, ScalarBlock) {
  const double c = 0.7;
  const double mu = 0.3;
  const auto t = build_transfer(scalar_moments(c), mu, Coupling::Decoupled);
  EXPECT_NEAR(t.F(0, 0).real(), (1 - mu * c) * (1 - mu * c), 1e-15);
  const auto full = build_transfer(scalar_moments(c), mu, Coupling::Full);
  EXPECT_NEAR(full.F(0, 0).real(), (1 - mu * c) * (1 - mu * c), 1e-15);
}

TEST(Transfer, DecoupledMatrixForm) {
  Xoshiro256 rng(4);
  MomentOptions o;
  o.samples = 500;
  o.seed = 4;
  const MomentSet m = estimate_moments(SignalModel::with_defaults(SignalKind::NoncircularARMA), o);
  const double mu = 0.25;
  const CMatrix F = build_transfer(m, mu, Coupling::Decoupled).F;
  for (int rep = 0; rep < 10; ++rep) {
    const CMatrix S = random_hpd(rng, 8);
    const CMatrix direct = S - mu * S * m.ED - mu * m.ED * S + mu * mu * m.ED * S * m.ED;
    EXPECT_LT(relative_error(F * vec_oracle(S), vec_oracle(direct)), 1e-12);
  }
}

TEST(Transfer, FullMatrixFormPerDraw) {
  Xoshiro256 rng(5);
  std::vector<CMatrix> draws;
  for (int i = 0; i < 20; ++i) draws.push_back(random_cmatrix(rng, 2, 2));
  const MomentSet m = moments_from_draws(draws, 1e-3);
  const double mu = 0.4;
  const CMatrix F = build_transfer(m, mu, Coupling::Full).F;
  const CMatrix S = random_hpd(rng, 4);
  CMatrix want = CMatrix::Zero(4, 4);
  for (const auto& X : draws) {
    const CMatrix U = augmented_oracle(X);
    const CMatrix B = (U.adjoint() * U + 1e-3 * CMatrix::Identity(2, 2)).inverse();
    const CMatrix D = U * B * U.adjoint();
    const CMatrix step = CMatrix::Identity(4, 4) - mu * D;
    want += step * S * step;
  }
  want /= 20.0;
  EXPECT_LT(relative_error(F * vec_oracle(S), vec_oracle(want)), 1e-10);
}

TEST(NoiseTerm, ZeroVarianceVanishes) {
  const MomentSet m = scalar_moments(0.5);
  EXPECT_EQ(noise_term(m, 0.0)(CVector::Ones(1)), cplx(0.0, 0.0));
}

TEST(NoiseTerm, IdentityWeightingIsTrace) {
  MomentOptions o;
  o.samples = 500;
  const MomentSet m = estimate_moments(SignalModel::with_defaults(SignalKind::IkedaMap), o);
  const cplx s = noise_term(m, 0.01)(vec_oracle(CMatrix::Identity(8, 8)));
  EXPECT_NEAR(s.real(), 0.01 * m.G.trace().real(), 1e-14);
  EXPECT_NEAR(s.imag(), 0.0, 1e-14);
  EXPECT_GE(s.real(), 0.0);
}

TEST(NoiseTerm, SingleDrawBruteForce) {
  Xoshiro256 rng(6);
  const CMatrix X = random_cmatrix(rng, 4, 2);
  const std::vector<CMatrix> draws{X};
  const MomentSet m = moments_from_draws(draws, 1e-3);
  const CMatrix U = augmented_oracle(X);
  const CMatrix B = (U.adjoint() * U + 1e-3 * CMatrix::Identity(2, 2)).inverse();
  const double s2 = 0.02;
  for (int rep = 0; rep < 10; ++rep) {
    const CMatrix S = random_hpd(rng, 8);
    // E[vᴴ K v] with E[v vᴴ] = σ² I equals σ² Σ_j K_jj.
    const CMatrix K = B * U.adjoint() * S * U * B;
    cplx want = 0.0;
    for (Eigen::Index j = 0; j < K.rows(); ++j) want += s2 * K(j, j);
    const cplx got = noise_term(m, s2)(vec_oracle(S));
    EXPECT_LT(std::abs(got - want), 1e-10 * std::abs(want));
  }
}

TEST(PredictMsd, SingleNodeClosedForm) {
  NetworkConfig c = small_network(SignalKind::NoncircularARMA, 1);
  const auto moments = network_moments(c, 1000, 7);
  const auto p = predict_msd(c, moments);
  ASSERT_TRUE(p.stable);
  const double mu = c.step_sizes[0];
  const CMatrix F = build_transfer(moments[0], mu).F;
  const Eigen::Index n = F.rows();
  const CVector rhs = vec_oracle(CMatrix::Identity(4, 4));
  const CVector x = (CMatrix::Identity(n, n) - F).partialPivLu().solve(rhs);
  const double want =
      (mu * mu * c.noise.variances[0] * vec_oracle(moments[0].G).adjoint() * x)(0).real();
  EXPECT_LT(std::abs(p.node_msd[0] - want), 1e-10 * want);
}

TEST(PredictMsd, ZeroNoiseGivesZero) {
  NetworkConfig c = small_network(SignalKind::CircularAR1, 4);
  std::fill(c.noise.variances.begin(), c.noise.variances.end(), 0.0);
  const auto p = predict_msd(c, network_moments(c, 500, 8));
  ASSERT_TRUE(p.stable);
  for (double v : p.node_msd) EXPECT_EQ(v, 0.0);
}

TEST(PredictMsd, MatchesForwardCovariancePropagation) {
  for (SignalKind kind : {SignalKind::NoncircularARMA, SignalKind::IkedaMap}) {
    NetworkConfig c = small_network(kind, 4);
    c.ring_order = {2, 0, 3, 1};
    const auto moments = network_moments(c, 1000, 9);
    const auto p = predict_msd(c, moments);
    ASSERT_TRUE(p.stable);
    const auto oracle = propagate_covariance(c, moments);
    for (std::size_t k = 0; k < c.nodes; ++k) {
      EXPECT_LT(std::abs(p.node_msd[k] - oracle[k]), 1e-8 * oracle[k]) << "node " << k;
    }
  }
}

TEST(PredictMsd, NetworkAverage) {
  NetworkConfig c = small_network(SignalKind::NoncircularARMA, 3);
  const auto p = predict_msd(c, network_moments(c, 500, 10));
  double mean = 0.0;
  for (double v : p.node_msd) mean += v / 3.0;
  EXPECT_NEAR(p.network_msd, mean, 1e-15 * mean + 1e-300);
}

TEST(PredictMsd, CyclicRotationPermutesPositions) {
  NetworkConfig c = small_network(SignalKind::NoncircularARMA, 5);
  const auto moments = network_moments(c, 500, 11);
  const auto base = predict_msd(c, moments);
  NetworkConfig rotated = c;
  std::rotate(rotated.ring_order.begin(), rotated.ring_order.begin() + 2,
              rotated.ring_order.end());
  const auto rot = predict_msd(rotated, moments);
  for (std::size_t k = 0; k < c.nodes; ++k) {
    EXPECT_LT(std::abs(rot.node_msd[k] - base.node_msd[k]), 1e-9 * base.node_msd[k]);
    EXPECT_LT(std::abs(rot.formula_msd[k] - base.formula_msd[(k + 2) % c.nodes]),
              1e-9 * base.formula_msd[k]);
  }
}

TEST(PredictMsd, RelabelingNodesPermutesResults) {
  NetworkConfig c = small_network(SignalKind::IkedaMap, 4);
  const auto moments = network_moments(c, 500, 12);
  const auto base = predict_msd(c, moments);
  // New id of old node k is perm[k]; the ring visits the same physical nodes.
  const std::vector<std::size_t> perm{3, 1, 0, 2};
  NetworkConfig relabeled = c;
  std::vector<MomentSet> moved(4);
  for (std::size_t k = 0; k < 4; ++k) {
    relabeled.step_sizes[perm[k]] = c.step_sizes[k];
    relabeled.noise.variances[perm[k]] = c.noise.variances[k];
    relabeled.signals[perm[k]] = c.signals[k];
    moved[perm[k]] = moments[k];
    relabeled.ring_order[k] = perm[c.ring_order[k]];
  }
  const auto p = predict_msd(relabeled, moved);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_LT(std::abs(p.node_msd[perm[k]] - base.node_msd[k]), 1e-9 * base.node_msd[k]);
  }
}

TEST(PredictMsd, LinearInNoiseVariances) {
  NetworkConfig c = small_network(SignalKind::CircularAR1, 4);
  const auto moments = network_moments(c, 500, 13);
  const auto base = predict_msd(c, moments);
  for (double& v : c.noise.variances) v *= 2.0;
  const auto doubled = predict_msd(c, moments);
  for (std::size_t k = 0; k < c.nodes; ++k) {
    EXPECT_LT(std::abs(doubled.node_msd[k] - 2.0 * base.node_msd[k]), 1e-10 * base.node_msd[k]);
  }
}

TEST(PredictMsd, UnstableConfigurationReported) {
  NetworkConfig c = small_network(SignalKind::NoncircularARMA, 3);
  std::fill(c.step_sizes.begin(), c.step_sizes.end(), 6.0);
  const auto p = predict_msd(c, network_moments(c, 500, 14));
  EXPECT_FALSE(p.stable);
  EXPECT_GE(p.worst_radius, 1.0);
  EXPECT_TRUE(p.node_msd.empty());
}

TEST(PredictMsd, MissingMomentsRejected) {
  NetworkConfig c = small_network(SignalKind::NoncircularARMA, 3);
  auto moments = network_moments(c, 100, 15);
  moments.pop_back();
  EXPECT_THROW(predict_msd(c, moments), ConfigError);
}

TEST(Stability, ScalarBound) {
  const double c = 0.8;
  const auto s = stability_bound(scalar_moments(c));
  EXPECT_NEAR(s.bound_mn, 2.0 / c, 1e-12);
  EXPECT_NEAR(s.mu_max, 2.0 / c, 1e-12);
  // λ² − cλ + c²/2 has no real root: only the M⁻¹N branch is active.
  EXPECT_TRUE(s.h_complex_spectrum);
}

TEST(Stability, ReferenceSetupBoundsAreConsistent) {
  const NetworkConfig c = NetworkConfig::reference_setup(SignalKind::NoncircularARMA, 3, 3);
  const auto moments = network_moments(c, 2000, 16);
  NetworkConfig scaled = c;
  for (std::size_t k = 0; k < c.nodes; ++k) {
    const auto s = stability_bound(moments[k]);
    ASSERT_GT(s.mu_max, 0.0);
    ASSERT_TRUE(std::isfinite(s.mu_max));
    EXPECT_NEAR(spectral_step_limit(s, 4.0 * s.mu_max), s.mu_max, 2e-3 * s.mu_max);
    for (double f : {0.25, 0.5, 0.9}) {
      EXPECT_LT(spectral_radius(build_transfer(moments[k], f * s.mu_max).F), 1.0);
    }
    scaled.step_sizes[k] = 0.9 * s.mu_max;
  }
  EXPECT_TRUE(predict_msd(scaled, moments).stable);
}
