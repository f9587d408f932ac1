// incaapa: batch experiment runner.
//
//   incaapa run       --config cfg.json --out out/
//   incaapa sweep-t   --config cfg.json --t 1,4,8
//   incaapa stability --config cfg.json
//   incaapa theory    --config cfg.json
//   incaapa signals   --model noncircular_arma --n 100000
//
// Exit status: 0 success, 2 unstable configuration, 1 I/O or config error.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "incaapa/config.hpp"
#include "incaapa/errors.hpp"
#include "incaapa/harness.hpp"
#include "incaapa/report_io.hpp"
#include "incaapa/signals.hpp"
#include "incaapa/theory.hpp"

namespace fs = std::filesystem;
using namespace incaapa;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUnstable = 2;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> horizon;
  std::optional<std::size_t> threads;
  std::string format = "csv";
  bool no_plots = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON config file (defaults to the built-in baseline)");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--trials", f.trials, "independent trials per algorithm");
  cmd->add_option("--horizon", f.horizon, "cycles per trial");
  cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
  cmd->add_option("--format", f.format, "table format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_flag("--no-plots", f.no_plots, "skip SVG output");
}

ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig cfg = f.config.empty() ? ExperimentConfig::reference_baseline()
                                          : load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.out) cfg.output_dir = *f.out;
  if (f.trials) cfg.trials = *f.trials;
  if (f.horizon) cfg.horizon = *f.horizon;
  if (f.threads) cfg.threads = *f.threads;
  cfg.validate();
  return cfg;
}

void list_written(const std::vector<fs::path>& paths) {
  for (const auto& p : paths) std::cout << "wrote " << p.string() << '\n';
}

std::string db(double linear) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%8.2f", to_db(linear));
  return buf;
}

void print_report(const ExperimentReport& report) {
  for (const auto& m : report.models) {
    std::cout << to_string(m.kind) << ":";
    if (m.incremental_steady.diverged) {
      std::cout << " incAAPA diverged\n";
      continue;
    }
    std::cout << " incAAPA " << db(m.incremental_steady.network_msd) << " dB";
    if (m.noncooperative_steady) {
      std::cout << "  non-coop "
                << (m.noncooperative_steady->diverged ? std::string("diverged")
                                                      : db(m.noncooperative_steady->network_msd) + " dB");
    }
    if (m.theory) {
      std::cout << "  theory "
                << (m.theory->stable ? db(m.theory->network_msd) + " dB" : std::string("unstable"));
    }
    std::cout << '\n';
  }
  std::printf("runtime %.2f s on %zu thread(s)\n", report.runtime_seconds, report.threads_used);
}

int cmd_run(const CommonFlags& f) {
  const ExperimentConfig cfg = resolve(f);
  const ExperimentReport report = run_experiment(cfg);
  const TableFormat format = parse_table_format(f.format);
  list_written(write_report(report, cfg.output_dir, format));
  if (!f.no_plots) list_written(emit_plots(report, cfg.output_dir));
  print_report(report);
  return report.unstable() ? kExitUnstable : kExitOk;
}

int cmd_sweep(const CommonFlags& f, const std::vector<std::size_t>& t_override) {
  const ExperimentConfig cfg = resolve(f);
  const std::vector<std::size_t>& ts = t_override.empty() ? cfg.t_values : t_override;
  for (std::size_t t : ts) {
    if (t == 0) throw ConfigError("projection orders must be >= 1");
  }
  const SweepReport sweep = sweep_T(cfg, ts);
  const TableFormat format = parse_table_format(f.format);
  list_written(write_sweep(sweep, cfg.output_dir, format));
  if (!f.no_plots) list_written(emit_sweep_plots(sweep, cfg.output_dir));
  bool unstable = false;
  for (std::size_t i = 0; i < sweep.reports.size(); ++i) {
    std::cout << "T = " << sweep.t_values[i] << '\n';
    print_report(sweep.reports[i]);
    unstable = unstable || sweep.reports[i].unstable();
  }
  return unstable ? kExitUnstable : kExitOk;
}

int cmd_stability(const CommonFlags& f) {
  const ExperimentConfig cfg = resolve(f);
  const StabilityReport report = check_stability(cfg);
  list_written(write_stability(report, cfg.output_dir, parse_table_format(f.format)));
  for (const auto& m : report.models) {
    std::cout << to_string(m.kind) << '\n';
    for (std::size_t k = 0; k < m.bounds.size(); ++k) {
      std::printf("  node %2zu  mu_max %.4f  (bisection %.4f)  configured %.4f%s\n", k + 1,
                  m.bounds[k].mu_max, m.spectral_limits[k], m.configured_step_sizes[k],
                  m.configured_step_sizes[k] >= m.bounds[k].mu_max ? "  UNSTABLE" : "");
    }
    for (const auto& r : m.runs) {
      std::printf("  %.2f x mu_max  seed %zu  final/initial %.3e  %s\n", r.factor, r.seed_index,
                  r.final_msd / r.initial_msd,
                  r.diverged ? "diverged" : r.converged ? "converged" : "bounded");
    }
  }
  return report.unstable() ? kExitUnstable : kExitOk;
}

int cmd_theory(const CommonFlags& f) {
  const ExperimentConfig cfg = resolve(f);
  bool unstable = false;
  std::vector<fs::path> written;
  for (SignalKind kind : cfg.models) {
    ModelReport m;
    m.kind = kind;
    m.network = cfg.network_for(kind);
    const std::vector<MomentSet> moments = estimate_network_moments(m.network, cfg);
    m.theory = predict_msd(m.network, moments, cfg.theory);
    for (const auto& ms : moments) m.stability.push_back(stability_bound(ms, cfg.theory.coupling));
    unstable = unstable || !m.theory->stable;
    const fs::path p = cfg.output_dir / ("theory_" + std::string(to_string(kind)) + ".json");
    write_text_file(p, theory_summary(m, cfg.hash()).dump(2) + "\n");
    written.push_back(p);
    std::cout << to_string(kind) << ": ";
    if (m.theory->stable) {
      std::cout << "network MSD " << db(m.theory->network_msd) << " dB\n";
      for (std::size_t k = 0; k < m.network.nodes; ++k) {
        std::printf("  node %2zu  %s dB  mu_max %.4f\n", k + 1, db(m.theory->node_msd[k]).c_str(),
                    m.stability[k].mu_max);
      }
    } else {
      std::printf("unstable (cyclic spectral radius %.4f)\n", m.theory->worst_radius);
    }
  }
  list_written(written);
  return unstable ? kExitUnstable : kExitOk;
}

int cmd_signals(const CommonFlags& f, const std::string& model_name, std::size_t n) {
  const ExperimentConfig cfg = resolve(f);
  const SignalKind kind = parse_signal_kind(model_name);
  SignalModel model = cfg.network_for(kind).signals.front();
  model.seed = cfg.seed;
  const ComplexSequence seq = generate(model, n);
  const CircularityReport c = estimate_circularity(seq.samples);
  std::ostringstream o;
  write_sequence_csv(o, seq);
  const fs::path p = cfg.output_dir / ("signal_" + model_name + ".csv");
  write_text_file(p, o.str());
  std::cout << "wrote " << p.string() << '\n';
  std::printf("variance %.6f  |pseudocovariance| %.6f  circularity %.4f\n", c.covariance.real(),
              std::abs(c.pseudocovariance), c.coefficient);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"incAAPA simulation and analysis over an incremental ring network"};
  app.require_subcommand(1);

  CommonFlags run_f, sweep_f, stab_f, theory_f, sig_f;
  std::vector<std::size_t> t_values;
  std::string model = "noncircular_arma";
  std::size_t n = 100000;

  auto* run = app.add_subcommand("run", "multi-trial simulation with theory comparison");
  add_common(run, run_f);
  auto* sweep = app.add_subcommand("sweep-t", "steady-state MSD over projection orders");
  add_common(sweep, sweep_f);
  sweep->add_option("--t", t_values, "projection orders (overrides the config)")->delimiter(',');
  auto* stab = app.add_subcommand("stability", "step-size bound and empirical check");
  add_common(stab, stab_f);
  auto* theory = app.add_subcommand("theory", "closed-form steady-state MSD only");
  add_common(theory, theory_f);
  auto* sig = app.add_subcommand("signals", "dump a generated input sequence");
  add_common(sig, sig_f);
  sig->add_option("--model", model, "circular_ar1 | noncircular_arma | ikeda");
  sig->add_option("--n", n, "number of samples")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*run) return cmd_run(run_f);
    if (*sweep) return cmd_sweep(sweep_f, t_values);
    if (*stab) return cmd_stability(stab_f);
    if (*theory) return cmd_theory(theory_f);
    if (*sig) return cmd_signals(sig_f, model, n);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kExitError;
}
