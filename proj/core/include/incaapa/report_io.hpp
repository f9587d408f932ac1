#pragma once

// Serialization of experiment results: learning-curve CSVs, per-node tables,
// theory JSON and SVG plots. Every writer returns the paths it created and
// throws IoError when a file cannot be written.

#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "incaapa/harness.hpp"

namespace incaapa {

enum class TableFormat { Csv, Json };

/// "csv" or "json"; throws ConfigError otherwise.
TableFormat parse_table_format(std::string_view name);

/// Columns (cycle, node, msd_linear, msd_db); node labels are 1-based. A
/// `#` header line carries the config hash, trial count and provenance.
void write_learning_curve_csv(std::ostream& out, const LearningCurve& curve,
                              std::string_view algorithm, SignalKind kind);

/// Per-node theory summary: MSD (dB), μ_max, spectral radii.
nlohmann::json theory_summary(const ModelReport& model, std::uint64_t config_hash);

nlohmann::json report_summary(const ExperimentReport& report);
nlohmann::json sweep_summary(const SweepReport& sweep);
nlohmann::json stability_summary(const StabilityReport& report);

std::vector<std::filesystem::path> write_report(const ExperimentReport& report,
                                                const std::filesystem::path& dir,
                                                TableFormat format);

/// Learning-curve plot per model, and a theory-vs-simulation bar chart per
/// model that has a theory prediction.
std::vector<std::filesystem::path> emit_plots(const ExperimentReport& report,
                                              const std::filesystem::path& dir);

std::vector<std::filesystem::path> write_sweep(const SweepReport& sweep,
                                               const std::filesystem::path& dir,
                                               TableFormat format);

/// Per-node steady-state MSD lines, one per projection order. Nothing is
/// written for an empty sweep.
std::vector<std::filesystem::path> emit_sweep_plots(const SweepReport& sweep,
                                                    const std::filesystem::path& dir);

std::vector<std::filesystem::path> write_stability(const StabilityReport& report,
                                                   const std::filesystem::path& dir,
                                                   TableFormat format);

/// Writes `contents` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace incaapa
