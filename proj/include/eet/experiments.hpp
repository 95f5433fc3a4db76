#pragma once

// Configuration-driven experiments behind the `eetsim` command line tool.
// Every command returns plain data; file and stream handling lives here too so
// tests can exercise the exact bytes the tool writes.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "eet/model.hpp"
#include "eet/noise.hpp"
#include "eet/oracle.hpp"

namespace eet::experiments {

inline constexpr const char* kOutputDirEnv = "EETSIM_OUTPUT_DIR";

struct ExperimentConfig {
  std::string preset = "near_resonant";  // near_resonant | non_resonant | custom
  model::SystemHamiltonian hamiltonian = model::SystemHamiltonian::near_resonant();
  noise::FluctuatorConfig noise;
  noise::EnsembleConfig ensemble;
  double step_fs = 5.0;  // coherent output grid
  std::string output_dir;
  std::string prefix = "run";

  /// Fully resolved configuration (defaults filled in), as echoed into outputs.
  nlohmann::json to_json() const;
};

/// Throws eet::ConfigError on unknown sections or keys, wrong types, unknown
/// presets or invalid values.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

model::SystemHamiltonian hamiltonian_from_json(const nlohmann::json& section,
                                               std::string* preset_out = nullptr);

/// Nine significant digits, locale independent.
std::string format_number(double value);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column_index(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
};

/// '# key: value' provenance lines, then the header row and numeric rows.
void write_csv(std::ostream& out, const Table& table, const nlohmann::json& provenance);
/// Parses a CSV written by write_csv; provenance lines are returned through
/// `provenance` as {key: value} (JSON-decoded when possible).
Table read_csv(std::istream& in, nlohmann::json* provenance = nullptr);

/// Columns t_fs, p{m}_analytic, p{m}_circuit [, p{m}_sampled when shots > 0].
Table coherent_table(const ExperimentConfig& config);

struct DephasingOutput {
  noise::EnsembleSeries series;
  oracle::FitResult fit;
  Table table;            // t_fs, p{m}_mean, p{m}_stderr, p{m}_lindblad_fit
  nlohmann::json report;  // fitted rate, residual and config echo
};

DephasingOutput dephasing_experiment(const ExperimentConfig& config);

nlohmann::json resources_report(int n_sites, int fluctuators_per_site, double t_fs, double dt_fs,
                                double switching_rate_thz);

/// Fits the dephasing rate to the p{m}_mean columns of an ensemble table.
nlohmann::json fit_report(const Table& ensemble, const model::SystemHamiltonian& h);

/// Output directory: explicit value, else $EETSIM_OUTPUT_DIR, else ".".
std::filesystem::path resolve_output_dir(const std::string& configured);

}  // namespace eet::experiments
