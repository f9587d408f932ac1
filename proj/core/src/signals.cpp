#include "incaapa/signals.hpp"

#include <cmath>
#include <ostream>

#include <nlohmann/json.hpp>

#include "incaapa/errors.hpp"
#include "incaapa/format.hpp"
#include "incaapa/random.hpp"

namespace incaapa {

std::string_view to_string(SignalKind kind) {
  switch (kind) {
    case SignalKind::CircularAR1:
      return "circular_ar1";
    case SignalKind::NoncircularARMA:
      return "noncircular_arma";
    case SignalKind::IkedaMap:
      return "ikeda";
  }
  return "unknown";
}

SignalKind parse_signal_kind(std::string_view name) {
  if (name == "circular_ar1") return SignalKind::CircularAR1;
  if (name == "noncircular_arma") return SignalKind::NoncircularARMA;
  if (name == "ikeda") return SignalKind::IkedaMap;
  throw ConfigError("unknown signal model '" + std::string(name) +
                    "' (expected circular_ar1, noncircular_arma or ikeda)");
}

SignalModel SignalModel::with_defaults(SignalKind kind, std::uint64_t seed) {
  SignalModel model;
  model.kind = kind;
  model.seed = seed;
  model.burn_in = kind == SignalKind::IkedaMap ? kDefaultIkedaBurnIn : 0;
  return model;
}

NoiseProfile NoiseProfile::log_uniform(std::size_t nodes, double lo, double hi,
                                       std::uint64_t seed) {
  if (!(lo > 0.0) || !(hi >= lo)) {
    throw ParameterError("noise profile bounds must satisfy 0 < lo <= hi");
  }
  Xoshiro256 rng(seed);
  NoiseProfile profile;
  profile.seed = seed;
  profile.variances.reserve(nodes);
  const double log_lo = std::log(lo);
  const double log_hi = std::log(hi);
  for (std::size_t k = 0; k < nodes; ++k) {
    profile.variances.push_back(
        std::exp(log_lo + (log_hi - log_lo) * rng.uniform()));
  }
  return profile;
}

void NoiseProfile::validate() const {
  for (double v : variances) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ParameterError("noise variances must be finite and > 0");
    }
  }
}

ComplexSequence gen_doubly_white(std::size_t n, double variance,
                                 std::uint64_t seed) {
  if (!(variance >= 0.0)) {
    throw ParameterError("noise variance must be >= 0");
  }
  ComplexSequence seq;
  seq.model.seed = seed;
  seq.samples.resize(n);
  Xoshiro256 rng(seed);
  for (auto& s : seq.samples) s = rng.complex_gaussian(variance);
  return seq;
}

ComplexSequence gen_circular_ar1(std::size_t n, std::uint64_t seed,
                                 const Ar1Params& params) {
  const double a = params.coefficient;
  if (!(std::abs(a) < 1.0)) {
    throw ParameterError("AR(1) coefficient must satisfy |a| < 1");
  }
  ComplexSequence seq;
  seq.model = SignalModel::with_defaults(SignalKind::CircularAR1, seed);
  seq.model.ar1 = params;
  seq.samples.resize(n);
  if (n == 0) return seq;
  Xoshiro256 rng(seed);
  seq.samples[0] = rng.complex_gaussian(1.0 / (1.0 - a * a));
  for (std::size_t t = 1; t < n; ++t) {
    seq.samples[t] = a * seq.samples[t - 1] + rng.complex_gaussian(1.0);
  }
  return seq;
}

ComplexSequence gen_noncircular_arma(std::size_t n, std::uint64_t seed,
                                     const ArmaParams& p) {
  ComplexSequence seq;
  seq.model = SignalModel::with_defaults(SignalKind::NoncircularARMA, seed);
  seq.model.arma = p;
  seq.samples.resize(n);
  Xoshiro256 rng(seed);
  cplx x_prev{0.0, 0.0};
  cplx q_prev{0.0, 0.0};
  for (std::size_t t = 0; t < n; ++t) {
    const cplx q = rng.complex_gaussian(1.0);
    const cplx x = p.ar * x_prev + p.q0 * q + p.q0_conj * std::conj(q) +
                   p.q1 * q_prev + p.q1_conj * std::conj(q_prev);
    seq.samples[t] = x;
    x_prev = x;
    q_prev = q;
  }
  return seq;
}

cplx ikeda_step(cplx x, const IkedaParams& p) {
  const double a = x.real();
  const double b = x.imag();
  const double r = p.offset - p.scale / (1.0 + a * a + b * b);
  const double c = std::cos(r);
  const double s = std::sin(r);
  return {1.0 + p.gain * (a * c - b * s), p.gain * (a * s + b * c)};
}

ComplexSequence gen_ikeda(std::size_t n, std::uint64_t seed,
                          const IkedaParams& params, std::size_t burn_in,
                          std::optional<cplx> start) {
  ComplexSequence seq;
  seq.model = SignalModel::with_defaults(SignalKind::IkedaMap, seed);
  seq.model.ikeda = params;
  seq.model.burn_in = burn_in;
  seq.samples.resize(n);
  cplx x;
  if (start) {
    x = *start;
  } else {
    Xoshiro256 rng(seed);
    const double a0 = rng.uniform();
    const double b0 = rng.uniform();
    x = {a0, b0};
  }
  for (std::size_t t = 0; t < burn_in; ++t) x = ikeda_step(x, params);
  for (std::size_t t = 0; t < n; ++t) {
    seq.samples[t] = x;
    x = ikeda_step(x, params);
  }
  return seq;
}

ComplexSequence generate(const SignalModel& model, std::size_t n) {
  ComplexSequence seq;
  switch (model.kind) {
    case SignalKind::CircularAR1:
      seq = gen_circular_ar1(n + model.burn_in, model.seed, model.ar1);
      break;
    case SignalKind::NoncircularARMA:
      seq = gen_noncircular_arma(n + model.burn_in, model.seed, model.arma);
      break;
    case SignalKind::IkedaMap:
      return gen_ikeda(n, model.seed, model.ikeda, model.burn_in);
  }
  seq.samples.erase(seq.samples.begin(),
                    seq.samples.begin() + static_cast<std::ptrdiff_t>(model.burn_in));
  seq.model = model;
  return seq;
}

CircularityReport estimate_circularity(std::span<const cplx> samples) {
  if (samples.empty()) {
    throw ParameterError("circularity needs a nonempty sequence");
  }
  cplx c{0.0, 0.0};
  cplx p{0.0, 0.0};
  for (const cplx& x : samples) {
    c += x * std::conj(x);
    p += x * x;
  }
  const double n = static_cast<double>(samples.size());
  CircularityReport report;
  report.covariance = c / n;
  report.pseudocovariance = p / n;
  report.coefficient = report.covariance.real() > 0.0
                           ? std::abs(report.pseudocovariance) /
                                 report.covariance.real()
                           : 0.0;
  return report;
}

void write_sequence_csv(std::ostream& out, const ComplexSequence& seq) {
  nlohmann::json meta;
  meta["model"] = std::string(to_string(seq.model.kind));
  meta["seed"] = seq.model.seed;
  meta["burn_in"] = seq.model.burn_in;
  meta["n"] = seq.samples.size();
  switch (seq.model.kind) {
    case SignalKind::CircularAR1:
      meta["params"] = {{"coefficient", seq.model.ar1.coefficient}};
      break;
    case SignalKind::NoncircularARMA:
      meta["params"] = {{"ar", seq.model.arma.ar},
                        {"q0", seq.model.arma.q0},
                        {"q0_conj", seq.model.arma.q0_conj},
                        {"q1", seq.model.arma.q1},
                        {"q1_conj", seq.model.arma.q1_conj}};
      break;
    case SignalKind::IkedaMap:
      meta["params"] = {{"gain", seq.model.ikeda.gain},
                        {"offset", seq.model.ikeda.offset},
                        {"scale", seq.model.ikeda.scale}};
      break;
  }
  out << '#' << meta.dump() << '\n';
  out << "t,re,im\n";
  for (std::size_t t = 0; t < seq.samples.size(); ++t) {
    out << t << ',' << format_double(seq.samples[t].real()) << ','
        << format_double(seq.samples[t].imag()) << '\n';
  }
}

}  // namespace incaapa
