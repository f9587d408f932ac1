#pragma once

// Benchmark complex-valued input processes, doubly white measurement noise and
// lag-0 circularity diagnostics.
//
// Every generator is a pure function of its arguments: the same (kind, seed,
// n) always yields the same samples.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "incaapa/linalg.hpp"

namespace incaapa {

enum class SignalKind { CircularAR1, NoncircularARMA, IkedaMap };

std::string_view to_string(SignalKind kind);
/// Accepts "circular_ar1", "noncircular_arma", "ikeda". Throws ConfigError.
SignalKind parse_signal_kind(std::string_view name);

struct Ar1Params {
  double coefficient = 0.5;
};

/// x(t) = ar·x(t−1) + q0·q(t) + q0_conj·q*(t) + q1·q(t−1) + q1_conj·q*(t−1)
struct ArmaParams {
  double ar = 0.5;
  double q0 = 2.0;
  double q0_conj = 0.5;
  double q1 = 1.0;
  double q1_conj = 0.9;
};

/// a(t) = 1 + gain·(a cos r − b sin r), b(t) = gain·(a sin r + b cos r),
/// r = offset − scale / (1 + a² + b²), all on the previous sample.
struct IkedaParams {
  double gain = 0.9;
  double offset = 0.4;
  double scale = 6.0;
};

inline constexpr std::size_t kDefaultIkedaBurnIn = 100;

struct SignalModel {
  SignalKind kind = SignalKind::CircularAR1;
  std::uint64_t seed = 0;
  Ar1Params ar1{};
  ArmaParams arma{};
  IkedaParams ikeda{};
  /// Leading samples generated and dropped before the sequence starts.
  std::size_t burn_in = 0;

  static SignalModel with_defaults(SignalKind kind, std::uint64_t seed = 0);
};

struct ComplexSequence {
  std::vector<cplx> samples;
  SignalModel model;

  std::size_t size() const { return samples.size(); }
  std::span<const cplx> view() const { return samples; }
};

struct NoiseProfile {
  /// σ²_{v,k} per node.
  std::vector<double> variances;
  std::uint64_t seed = 0;

  /// Variances log-uniform in [lo, hi], drawn from `seed`.
  static NoiseProfile log_uniform(std::size_t nodes, double lo, double hi,
                                  std::uint64_t seed);
  void validate() const;
};

struct CircularityReport {
  cplx covariance;       // mean of x·x*
  cplx pseudocovariance; // mean of x·x
  double coefficient = 0.0;
};

/// I.i.d. complex Gaussian noise with E[vv*] = variance and E[vv] = 0.
ComplexSequence gen_doubly_white(std::size_t n, double variance,
                                 std::uint64_t seed);

/// x(t) = a·x(t−1) + q(t), x(0) from the stationary law (variance 1/(1−a²)).
ComplexSequence gen_circular_ar1(std::size_t n, std::uint64_t seed,
                                 const Ar1Params& params = {});

/// Widely linear ARMA driven by unit-variance doubly white q, zero history.
ComplexSequence gen_noncircular_arma(std::size_t n, std::uint64_t seed,
                                     const ArmaParams& params = {});

/// Ikeda map iterates. The start point is uniform on (0,1)² unless `start`
/// is given; `burn_in` iterations are discarded before the first sample.
ComplexSequence gen_ikeda(std::size_t n, std::uint64_t seed,
                          const IkedaParams& params = {},
                          std::size_t burn_in = kDefaultIkedaBurnIn,
                          std::optional<cplx> start = std::nullopt);

/// One Ikeda iteration from x = a + jb.
cplx ikeda_step(cplx x, const IkedaParams& params = {});

/// Dispatches on model.kind and applies model.burn_in.
ComplexSequence generate(const SignalModel& model, std::size_t n);

/// Throws ParameterError on an empty sequence.
CircularityReport estimate_circularity(std::span<const cplx> samples);

/// CSV with columns (t, re, im) behind a `#`-prefixed JSON metadata line.
void write_sequence_csv(std::ostream& out, const ComplexSequence& seq);

}  // namespace incaapa
