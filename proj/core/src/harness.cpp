#include "incaapa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "incaapa/errors.hpp"
#include "incaapa/random.hpp"

namespace incaapa {

namespace {

constexpr std::uint64_t kStabilityStream = 0x7374'6162'696cULL;

std::size_t resolve_threads(std::size_t requested, std::size_t work) {
  std::size_t n = requested;
  if (n == 0) n = std::max(1U, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(n, work));
}

/// Runs fn(i) for i in [0, n). Results must be written by index so the
/// outcome does not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = resolve_threads(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

double initial_error_energy(const NetworkConfig& net) {
  return net.h_true.squaredNorm() + net.g_true.squaredNorm();
}

double db_of_mean(const RVector& v, std::size_t end, std::size_t len) {
  double s = 0.0;
  for (std::size_t c = end + 1 - len; c <= end; ++c) s += v[static_cast<Eigen::Index>(c)];
  return to_db(s / static_cast<double>(len));
}

}  // namespace

double to_db(double linear) { return 10.0 * std::log10(linear); }

SteadyState extract_steady_state(const LearningCurve& curve,
                                 const ConvergenceRule& rule,
                                 std::size_t warmup, double reference_msd,
                                 double divergence_ratio) {
  SteadyState ss;
  const std::size_t H = curve.horizon();
  const std::size_t N = curve.nodes();
  const RVector network = curve.network_average();

  const double cap = divergence_ratio * reference_msd;
  for (Eigen::Index i = 0; i < curve.msd.size(); ++i) {
    const double v = curve.msd.data()[i];
    if (!std::isfinite(v) || v > cap) {
      ss.diverged = true;
      break;
    }
  }

  ss.window_end = H;
  ss.window_begin = H > rule.steady_window ? H - rule.steady_window : 0;
  ss.window_begin = std::max(ss.window_begin, std::min(warmup, H));
  ss.available = ss.window_begin < ss.window_end;
  ss.node_msd.assign(N, std::numeric_limits<double>::quiet_NaN());
  ss.network_msd = std::numeric_limits<double>::quiet_NaN();
  if (!ss.available) return ss;

  const auto begin = static_cast<Eigen::Index>(ss.window_begin);
  const auto len = static_cast<Eigen::Index>(ss.window_end - ss.window_begin);
  for (std::size_t k = 0; k < N; ++k) {
    ss.node_msd[k] = curve.msd.col(static_cast<Eigen::Index>(k)).segment(begin, len).mean();
  }
  ss.network_msd = network.segment(begin, len).mean();

  const std::size_t w = rule.average_window;
  for (std::size_t c = warmup + w - 1 + rule.lag; c < H; ++c) {
    const double now = db_of_mean(network, c, w);
    const double before = db_of_mean(network, c - rule.lag, w);
    if (std::abs(now - before) < rule.tolerance_db) {
      ss.converged_at = c;
      break;
    }
  }

  if (std::isfinite(ss.network_msd) && ss.network_msd > 0.0) {
    const double threshold = to_db(ss.network_msd) + rule.speed_margin_db;
    for (std::size_t c = 0; c < H; ++c) {
      if (to_db(network[static_cast<Eigen::Index>(c)]) <= threshold) {
        ss.cycles_to_convergence = c;
        break;
      }
    }
  }
  return ss;
}

bool ExperimentReport::unstable() const {
  return std::any_of(models.begin(), models.end(),
                     [](const ModelReport& m) { return m.unstable; });
}

bool StabilityReport::unstable() const {
  return std::any_of(models.begin(), models.end(),
                     [](const ModelStability& m) { return m.configured_unstable; });
}

std::vector<MomentSet> estimate_network_moments(const NetworkConfig& network,
                                                const ExperimentConfig& config) {
  std::vector<MomentSet> moments(network.nodes);
  parallel_for(network.nodes, config.threads, [&](std::size_t k) {
    MomentOptions opts;
    opts.filter_length = network.filter_length;
    opts.projection_order = network.projection_order;
    opts.regularization = network.regularization;
    opts.samples = config.moment_samples;
    opts.seed = derive_seed(config.seed, streams::kMoments, k);
    opts.burn_in = config.moment_burn_in;
    opts.node = k;
    moments[k] = estimate_moments(network.signals[k], opts);
  });
  return moments;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.config_echo = config.to_json();
  report.config_hash = config.hash();
  report.projection_order = config.projection_order;
  report.threads_used = resolve_threads(config.threads, config.trials);

  for (SignalKind kind : config.models) {
    ModelReport model;
    model.kind = kind;
    model.network = config.network_for(kind);
    const NetworkConfig& net = model.network;

    TrialOptions opts;
    opts.incremental = true;
    opts.noncooperative = config.run_noncooperative;
    opts.noncooperative_step_scale = static_cast<double>(net.nodes);
    opts.divergence_cap = 1e150;

    std::vector<TrialCurves> trials(config.trials);
    parallel_for(config.trials, config.threads, [&](std::size_t t) {
      trials[t] = simulate_trial(net, config.horizon,
                                 derive_seed(config.seed, streams::kTrial, t), opts);
    });

    std::vector<LearningCurve> inc;
    std::vector<LearningCurve> nc;
    inc.reserve(trials.size());
    for (auto& t : trials) {
      inc.push_back(std::move(*t.incremental));
      if (t.noncooperative) nc.push_back(std::move(*t.noncooperative));
    }
    trials.clear();

    const double reference = initial_error_energy(net);
    const std::size_t warmup = config.warmup_cycles();
    model.incremental = average_curves(inc);
    model.incremental.config_hash = report.config_hash;
    model.incremental_steady =
        extract_steady_state(model.incremental, config.convergence, warmup, reference);
    if (!nc.empty()) {
      model.noncooperative = average_curves(nc);
      model.noncooperative->config_hash = report.config_hash;
      model.noncooperative_steady = extract_steady_state(
          *model.noncooperative, config.convergence, warmup, reference);
    }

    if (config.run_theory) {
      const auto moments = estimate_network_moments(net, config);
      model.theory = predict_msd(net, moments, config.theory);
      model.stability.reserve(net.nodes);
      for (const auto& m : moments) {
        model.stability.push_back(stability_bound(m, config.theory.coupling));
      }
      if (!model.theory->stable) model.unstable = true;
    }
    if (model.incremental_steady.diverged) model.unstable = true;
    report.models.push_back(std::move(model));
  }

  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

SweepReport sweep_T(const ExperimentConfig& config,
                    std::span<const std::size_t> t_values) {
  SweepReport sweep;
  sweep.config_hash = config.hash();
  for (std::size_t T : t_values) {
    if (T < 1) throw ConfigError("projection orders must be >= 1");
    ExperimentConfig c = config;
    c.projection_order = T;
    c.run_noncooperative = false;
    sweep.t_values.push_back(T);
    sweep.reports.push_back(run_experiment(c));
  }
  return sweep;
}

StabilityReport check_stability(const ExperimentConfig& config) {
  config.validate();
  StabilityReport report;
  report.config_hash = config.hash();
  const std::uint64_t base = derive_seed(config.seed, kStabilityStream);

  for (SignalKind kind : config.models) {
    ModelStability ms;
    ms.kind = kind;
    const NetworkConfig net = config.network_for(kind);
    const auto moments = estimate_network_moments(net, config);
    ms.configured_step_sizes = net.step_sizes;
    for (std::size_t k = 0; k < net.nodes; ++k) {
      ms.bounds.push_back(stability_bound(moments[k], config.theory.coupling));
      const double hi = std::isfinite(ms.bounds.back().mu_max)
                            ? 4.0 * ms.bounds.back().mu_max
                            : 100.0;
      ms.spectral_limits.push_back(spectral_step_limit(ms.bounds.back(), hi));
      if (net.step_sizes[k] >= ms.bounds.back().mu_max) ms.configured_unstable = true;
    }

    const double initial = initial_error_energy(net);
    const std::size_t seeds = config.stability.seeds;
    const auto& factors = config.stability.factors;
    std::vector<StabilityRun> runs(factors.size() * seeds);
    parallel_for(runs.size(), config.threads, [&](std::size_t idx) {
      const std::size_t f = idx / seeds;
      const std::size_t s = idx % seeds;
      NetworkConfig scaled = net;
      for (std::size_t k = 0; k < net.nodes; ++k) {
        const double mu_max = ms.bounds[k].mu_max;
        scaled.step_sizes[k] = std::isfinite(mu_max) ? factors[f] * mu_max : 0.0;
      }
      TrialOptions opts;
      opts.noncooperative = false;
      opts.divergence_cap = 10.0 * config.stability.divergence_ratio * initial;
      const auto curves = simulate_trial(scaled, config.stability.horizon,
                                         derive_seed(base, streams::kTrial, s), opts);
      const LearningCurve& c = *curves.incremental;
      StabilityRun run;
      run.kind = kind;
      run.factor = factors[f];
      run.seed_index = s;
      run.initial_msd = initial;
      run.final_msd = c.network_average()[c.msd.rows() - 1];
      double peak = 0.0;
      for (Eigen::Index i = 0; i < c.msd.size(); ++i) {
        const double v = c.msd.data()[i];
        peak = std::isfinite(v) ? std::max(peak, v)
                                : std::numeric_limits<double>::infinity();
      }
      run.peak_ratio = peak / initial;
      run.diverged = run.peak_ratio > config.stability.divergence_ratio;
      run.converged = std::isfinite(run.final_msd) && run.final_msd < initial;
      runs[idx] = run;
    });
    ms.runs = std::move(runs);
    report.models.push_back(std::move(ms));
  }
  return report;
}

}  // namespace incaapa
