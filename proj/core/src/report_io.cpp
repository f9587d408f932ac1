#include "incaapa/report_io.hpp"

#include <algorithm>
#include <array>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "incaapa/errors.hpp"
#include "incaapa/format.hpp"
#include "incaapa/svg_plot.hpp"

namespace incaapa {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json optional_index(const std::optional<std::size_t>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string model_name(SignalKind kind) { return std::string(to_string(kind)); }

json steady_json(const SteadyState& ss) {
  json j;
  j["available"] = ss.available;
  j["diverged"] = ss.diverged;
  j["window"] = {ss.window_begin, ss.window_end};
  j["converged_at"] = optional_index(ss.converged_at);
  j["cycles_to_convergence"] = optional_index(ss.cycles_to_convergence);
  j["network_msd_db"] = finite_or_null(to_db(ss.network_msd));
  json nodes = json::array();
  for (double v : ss.node_msd) nodes.push_back(finite_or_null(to_db(v)));
  j["node_msd_db"] = nodes;
  return j;
}

bool integer_column(const std::string& name) {
  static const std::array<std::string_view, 6> names{
      "T", "node", "seed_index", "cycles_to_convergence", "converged", "diverged"};
  return std::find(names.begin(), names.end(), name) != names.end();
}

void write_table(const fs::path& base, TableFormat format, std::uint64_t config_hash,
                 const std::vector<std::string>& columns,
                 const std::vector<std::vector<double>>& rows,
                 std::vector<fs::path>& written) {
  if (format == TableFormat::Csv) {
    std::ostringstream o;
    o << "# config_hash=" << hex(config_hash) << '\n';
    for (std::size_t c = 0; c < columns.size(); ++c) o << (c ? "," : "") << columns[c];
    o << '\n';
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        o << (c ? "," : "") << format_double(row[c]);
      }
      o << '\n';
    }
    fs::path p = base;
    p += ".csv";
    write_text_file(p, o.str());
    written.push_back(p);
  } else {
    json arr = json::array();
    for (const auto& row : rows) {
      json r;
      for (std::size_t c = 0; c < columns.size(); ++c) {
        const double v = row[c];
        if (integer_column(columns[c]) && std::isfinite(v)) {
          r[columns[c]] = static_cast<long long>(v);
        } else {
          r[columns[c]] = finite_or_null(v);
        }
      }
      arr.push_back(r);
    }
    json doc;
    doc["config_hash"] = hex(config_hash);
    doc["rows"] = std::move(arr);
    fs::path p = base;
    p += ".json";
    write_text_file(p, doc.dump(2) + "\n");
    written.push_back(p);
  }
}

}  // namespace

TableFormat parse_table_format(std::string_view name) {
  if (name == "csv") return TableFormat::Csv;
  if (name == "json") return TableFormat::Json;
  throw ConfigError("format must be 'csv' or 'json'");
}

void write_text_file(const fs::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

void write_learning_curve_csv(std::ostream& out, const LearningCurve& curve,
                              std::string_view algorithm, SignalKind kind) {
  out << "# config_hash=" << hex(curve.config_hash) << " algorithm=" << algorithm
      << " model=" << to_string(kind) << " trials=" << curve.trials << '\n';
  out << "cycle,node,msd_linear,msd_db\n";
  for (std::size_t i = 0; i < curve.horizon(); ++i) {
    for (std::size_t k = 0; k < curve.nodes(); ++k) {
      const double v = curve.msd(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      out << i << ',' << (k + 1) << ',' << format_double(v) << ','
          << format_double(to_db(v)) << '\n';
    }
  }
}

json theory_summary(const ModelReport& model, std::uint64_t config_hash) {
  json j;
  j["model"] = model_name(model.kind);
  j["config_hash"] = hex(config_hash);
  if (!model.theory) {
    j["available"] = false;
    return j;
  }
  const MsdPrediction& p = *model.theory;
  const auto positions = model.network.ring_positions();
  j["available"] = true;
  j["stable"] = p.stable;
  j["worst_cyclic_radius"] = p.worst_radius;
  j["network_msd_db"] = p.stable ? finite_or_null(to_db(p.network_msd)) : json(nullptr);
  json nodes = json::array();
  for (std::size_t k = 0; k < model.network.nodes; ++k) {
    json n;
    n["node"] = k + 1;
    n["ring_position"] = positions[k] + 1;
    n["step_size"] = model.network.step_sizes[k];
    n["noise_variance"] = model.network.noise.variances[k];
    // P_{k+1,1} closes the ring at node k's output.
    n["cyclic_radius"] = p.radii[(positions[k] + 1) % model.network.nodes];
    if (p.stable) {
      n["msd_linear"] = p.node_msd[k];
      n["msd_db"] = finite_or_null(to_db(p.node_msd[k]));
    }
    if (k < model.stability.size()) {
      const auto& s = model.stability[k];
      n["mu_max"] = finite_or_null(s.mu_max);
      n["bound_mn"] = finite_or_null(s.bound_mn);
      n["bound_h"] = finite_or_null(s.bound_h);
      n["h_complex_spectrum"] = s.h_complex_spectrum;
      n["m_singular"] = s.m_singular;
    }
    nodes.push_back(n);
  }
  j["nodes"] = nodes;
  return j;
}

json report_summary(const ExperimentReport& report) {
  json j;
  j["config_hash"] = hex(report.config_hash);
  j["config"] = report.config_echo;
  j["projection_order"] = report.projection_order;
  j["runtime_seconds"] = report.runtime_seconds;
  j["threads"] = report.threads_used;
  j["unstable"] = report.unstable();
  json models = json::array();
  for (const auto& m : report.models) {
    json mj;
    mj["model"] = model_name(m.kind);
    mj["unstable"] = m.unstable;
    mj["noise_variances"] = m.network.noise.variances;
    mj["incaapa"] = steady_json(m.incremental_steady);
    if (m.noncooperative_steady) mj["noncooperative"] = steady_json(*m.noncooperative_steady);
    if (m.theory) mj["theory"] = theory_summary(m, report.config_hash);
    models.push_back(mj);
  }
  j["models"] = models;
  return j;
}

std::vector<fs::path> write_report(const ExperimentReport& report, const fs::path& dir,
                                   TableFormat format) {
  std::vector<fs::path> written;
  for (const auto& m : report.models) {
    const std::string name = model_name(m.kind);
    {
      std::ostringstream o;
      write_learning_curve_csv(o, m.incremental, "incaapa", m.kind);
      const fs::path p = dir / ("curves_" + name + "_incaapa.csv");
      write_text_file(p, o.str());
      written.push_back(p);
    }
    if (m.noncooperative) {
      std::ostringstream o;
      write_learning_curve_csv(o, *m.noncooperative, "noncooperative", m.kind);
      const fs::path p = dir / ("curves_" + name + "_noncooperative.csv");
      write_text_file(p, o.str());
      written.push_back(p);
    }
    std::vector<std::vector<double>> rows;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < m.network.nodes; ++k) {
      const double sim = to_db(m.incremental_steady.node_msd[k]);
      const double theory = m.theory && m.theory->stable ? to_db(m.theory->node_msd[k]) : nan;
      const double nc = m.noncooperative_steady ? to_db(m.noncooperative_steady->node_msd[k]) : nan;
      rows.push_back({static_cast<double>(k + 1), sim, theory, theory - sim, nc});
    }
    write_table(dir / ("steady_state_" + name), format, report.config_hash,
                {"node", "incaapa_sim_db", "incaapa_theory_db", "theory_minus_sim_db",
                 "noncooperative_sim_db"},
                rows, written);
    if (m.theory) {
      const fs::path p = dir / ("theory_" + name + ".json");
      write_text_file(p, theory_summary(m, report.config_hash).dump(2) + "\n");
      written.push_back(p);
    }
  }
  const fs::path p = dir / "report.json";
  write_text_file(p, report_summary(report).dump(2) + "\n");
  written.push_back(p);
  return written;
}

std::vector<fs::path> emit_plots(const ExperimentReport& report, const fs::path& dir) {
  std::vector<fs::path> written;
  for (const auto& m : report.models) {
    const std::string name = model_name(m.kind);
    SvgPlot curves("Network MSD learning curves (" + name + ")", "cycle", "MSD (dB)");
    const auto add_curve = [&](const LearningCurve& c, const std::string& label) {
      const RVector avg = c.network_average();
      std::vector<double> x(static_cast<std::size_t>(avg.size()));
      std::vector<double> y(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = static_cast<double>(i);
        y[i] = to_db(avg[static_cast<Eigen::Index>(i)]);
      }
      curves.add_line(label, std::move(x), std::move(y));
    };
    add_curve(m.incremental, "incAAPA");
    if (m.noncooperative) add_curve(*m.noncooperative, "non-cooperative");
    const fs::path p = dir / ("learning_curves_" + name + ".svg");
    write_text_file(p, curves.render());
    written.push_back(p);

    if (m.theory && m.theory->stable) {
      SvgPlot bars("Steady-state MSD per node (" + name + ")", "node", "MSD (dB)");
      std::vector<std::string> cats;
      std::vector<double> sim;
      std::vector<double> theory;
      for (std::size_t k = 0; k < m.network.nodes; ++k) {
        cats.push_back(std::to_string(k + 1));
        sim.push_back(to_db(m.incremental_steady.node_msd[k]));
        theory.push_back(to_db(m.theory->node_msd[k]));
      }
      bars.set_categories(std::move(cats));
      bars.add_bars("simulation", std::move(sim));
      bars.add_bars("theory", std::move(theory));
      const fs::path q = dir / ("theory_vs_sim_" + name + ".svg");
      write_text_file(q, bars.render());
      written.push_back(q);
    }
  }
  return written;
}

json sweep_summary(const SweepReport& sweep) {
  json j = json::array();
  for (std::size_t i = 0; i < sweep.reports.size(); ++i) {
    json r = report_summary(sweep.reports[i]);
    r.erase("config");
    r["T"] = sweep.t_values[i];
    j.push_back(r);
  }
  return j;
}

std::vector<fs::path> write_sweep(const SweepReport& sweep, const fs::path& dir,
                                  TableFormat format) {
  std::vector<fs::path> written;
  if (sweep.reports.empty()) return written;
  const auto& models = sweep.reports.front().models;
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const std::string name = model_name(models[mi].kind);
    std::vector<std::vector<double>> rows;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < sweep.reports.size(); ++i) {
      const ModelReport& m = sweep.reports[i].models[mi];
      const auto& ss = m.incremental_steady;
      const double speed = ss.cycles_to_convergence
                               ? static_cast<double>(*ss.cycles_to_convergence)
                               : nan;
      for (std::size_t k = 0; k < m.network.nodes; ++k) {
        const double theory = m.theory && m.theory->stable ? to_db(m.theory->node_msd[k]) : nan;
        rows.push_back({static_cast<double>(sweep.t_values[i]), static_cast<double>(k + 1),
                        ss.node_msd[k], to_db(ss.node_msd[k]), theory,
                        to_db(ss.network_msd), speed});
      }
    }
    write_table(dir / ("sweep_T_" + name), format, sweep.config_hash,
                {"T", "node", "msd_linear", "msd_db", "theory_db", "network_msd_db",
                 "cycles_to_convergence"},
                rows, written);
  }
  const fs::path p = dir / "sweep_T.json";
  write_text_file(p, sweep_summary(sweep).dump(2) + "\n");
  written.push_back(p);
  return written;
}

std::vector<fs::path> emit_sweep_plots(const SweepReport& sweep, const fs::path& dir) {
  std::vector<fs::path> written;
  if (sweep.reports.empty()) return written;
  const auto& models = sweep.reports.front().models;
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const std::string name = model_name(models[mi].kind);
    SvgPlot plot("Steady-state MSD per node vs. T (" + name + ")", "node", "MSD (dB)");
    for (std::size_t i = 0; i < sweep.reports.size(); ++i) {
      const ModelReport& m = sweep.reports[i].models[mi];
      std::vector<double> x;
      std::vector<double> y;
      for (std::size_t k = 0; k < m.network.nodes; ++k) {
        x.push_back(static_cast<double>(k + 1));
        y.push_back(to_db(m.incremental_steady.node_msd[k]));
      }
      plot.add_line("T = " + std::to_string(sweep.t_values[i]), std::move(x), std::move(y));
    }
    const fs::path p = dir / ("sweep_T_" + name + ".svg");
    write_text_file(p, plot.render());
    written.push_back(p);
  }
  return written;
}

json stability_summary(const StabilityReport& report) {
  json j;
  j["config_hash"] = hex(report.config_hash);
  j["unstable"] = report.unstable();
  json models = json::array();
  for (const auto& m : report.models) {
    json mj;
    mj["model"] = model_name(m.kind);
    mj["configured_unstable"] = m.configured_unstable;
    json nodes = json::array();
    for (std::size_t k = 0; k < m.bounds.size(); ++k) {
      nodes.push_back({{"node", k + 1},
                       {"mu_max", finite_or_null(m.bounds[k].mu_max)},
                       {"bound_mn", finite_or_null(m.bounds[k].bound_mn)},
                       {"bound_h", finite_or_null(m.bounds[k].bound_h)},
                       {"spectral_limit", finite_or_null(m.spectral_limits[k])},
                       {"h_complex_spectrum", m.bounds[k].h_complex_spectrum},
                       {"configured_step_size", m.configured_step_sizes[k]}});
    }
    mj["nodes"] = nodes;
    json runs = json::array();
    for (const auto& r : m.runs) {
      runs.push_back({{"factor", r.factor},
                      {"seed_index", r.seed_index},
                      {"initial_msd", r.initial_msd},
                      {"final_msd", finite_or_null(r.final_msd)},
                      {"peak_ratio", finite_or_null(r.peak_ratio)},
                      {"label", r.diverged ? "diverged" : r.converged ? "converged" : "bounded"}});
    }
    mj["runs"] = runs;
    models.push_back(mj);
  }
  j["models"] = models;
  return j;
}

std::vector<fs::path> write_stability(const StabilityReport& report, const fs::path& dir,
                                      TableFormat format) {
  std::vector<fs::path> written;
  for (const auto& m : report.models) {
    std::vector<std::vector<double>> rows;
    for (const auto& r : m.runs) {
      rows.push_back({r.factor, static_cast<double>(r.seed_index), r.initial_msd, r.final_msd,
                      r.peak_ratio, r.converged ? 1.0 : 0.0, r.diverged ? 1.0 : 0.0});
    }
    write_table(dir / ("stability_runs_" + model_name(m.kind)), format, report.config_hash,
                {"factor", "seed_index", "initial_msd", "final_msd", "peak_ratio", "converged",
                 "diverged"},
                rows, written);
  }
  const fs::path p = dir / "stability.json";
  write_text_file(p, stability_summary(report).dump(2) + "\n");
  written.push_back(p);
  return written;
}

}  // namespace incaapa
