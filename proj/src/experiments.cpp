#include "eet/experiments.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "eet/circuits.hpp"
#include "eet/errors.hpp"
#include "eet/qcore.hpp"

namespace eet::experiments {

namespace {

using nlohmann::json;

void reject_unknown(const json& section, const std::string& where,
                    const std::set<std::string>& allowed) {
  if (!section.is_object()) throw ConfigError("section '" + where + "' must be an object");
  for (const auto& [key, value] : section.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in '" + where + "'");
  }
}

template <typename T>
T get_or(const json& section, const std::string& key, T fallback) {
  if (!section.contains(key)) return fallback;
  try {
    return section.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
}

std::string site_column(int m, const char* suffix) {
  return "p" + std::to_string(m) + "_" + suffix;
}

std::vector<double> time_grid(double t_max, double step) {
  if (!(step > 0.0)) throw ConfigError("time step must be positive");
  if (!(t_max >= 0.0)) throw ConfigError("t_max must be non-negative");
  const auto n = static_cast<long>(std::floor(t_max / step + 1e-9));
  std::vector<double> t(static_cast<std::size_t>(n + 1));
  for (long i = 0; i <= n; ++i) t[static_cast<std::size_t>(i)] = static_cast<double>(i) * step;
  return t;
}

// Exact site populations from |0> for any chain size; closed form for two sites.
std::vector<double> reference_populations(const model::SystemHamiltonian& h, double t) {
  if (h.n_sites() == 2) {
    const auto p = model::analytic_populations(h, t);
    return {p.p0, p.p1};
  }
  using namespace std::complex_literals;
  Eigen::MatrixXd m = h.matrix();
  m.diagonal().array() -= m.diagonal().mean();
  const Eigen::MatrixXcd u = ((-1i * model::kPhasePerWavenumberFs * t) *
                              m.cast<std::complex<double>>()).exp();
  std::vector<double> p(static_cast<std::size_t>(h.n_sites()));
  for (int k = 0; k < h.n_sites(); ++k) p[static_cast<std::size_t>(k)] = std::norm(u(k, 0));
  return p;
}

}  // namespace

model::SystemHamiltonian hamiltonian_from_json(const json& section, std::string* preset_out) {
  reject_unknown(section, "hamiltonian", {"preset", "matrix"});
  std::string preset = get_or<std::string>(section, "preset", section.contains("matrix") ? "custom"
                                                                                          : "near_resonant");
  if (preset_out) *preset_out = preset;
  if (preset == "near_resonant" || preset == "non_resonant") {
    if (section.contains("matrix")) throw ConfigError("preset '" + preset + "' takes no matrix");
    return preset == "near_resonant" ? model::SystemHamiltonian::near_resonant()
                                     : model::SystemHamiltonian::non_resonant();
  }
  if (preset != "custom") throw ConfigError("unknown Hamiltonian preset '" + preset + "'");
  if (!section.contains("matrix")) throw ConfigError("custom Hamiltonian needs a 'matrix'");
  const auto rows = get_or<std::vector<std::vector<double>>>(section, "matrix", {});
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) throw ConfigError("Hamiltonian matrix must be square");
    for (std::size_t j = 0; j < rows.size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  try {
    return model::SystemHamiltonian::from_matrix(m);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid Hamiltonian: ") + e.what());
  }
}

json ExperimentConfig::to_json() const {
  json h{{"preset", preset}};
  if (preset == "custom") {
    std::vector<std::vector<double>> rows;
    const Eigen::MatrixXd m = hamiltonian.matrix();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      auto& row = rows.emplace_back();
      for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    }
    h["matrix"] = rows;
  }
  return json{
      {"hamiltonian", h},
      {"noise",
       {{"g_cm", noise.strengths_cm},
        {"gamma_thz", noise.switching_rate_thz},
        {"fluctuators_per_site", noise.fluctuators_per_site}}},
      {"ensemble",
       {{"runs", ensemble.runs},
        {"shots", ensemble.shots},
        {"dt_fs", ensemble.dt_fs},
        {"step_fs", step_fs},
        {"t_max_fs", ensemble.t_max_fs},
        {"seed", ensemble.master_seed},
        {"workers", ensemble.workers}}},
      {"output", {{"dir", output_dir}, {"prefix", prefix}}},
  };
}

ExperimentConfig parse_config(const json& doc) {
  reject_unknown(doc, "<root>", {"hamiltonian", "noise", "ensemble", "output"});
  ExperimentConfig cfg;
  cfg.hamiltonian = hamiltonian_from_json(doc.value("hamiltonian", json::object()), &cfg.preset);
  const auto n_sites = static_cast<std::size_t>(cfg.hamiltonian.n_sites());

  const json noise = doc.value("noise", json::object());
  reject_unknown(noise, "noise", {"g_cm", "gamma_thz", "fluctuators_per_site"});
  if (noise.contains("g_cm") && noise.at("g_cm").is_array()) {
    cfg.noise.strengths_cm = get_or<std::vector<double>>(noise, "g_cm", {});
    if (cfg.noise.strengths_cm.size() != n_sites) {
      throw ConfigError("noise.g_cm must list one strength per site");
    }
  } else {
    cfg.noise.strengths_cm.assign(n_sites, get_or<double>(noise, "g_cm", 0.0));
  }
  cfg.noise.switching_rate_thz = get_or<double>(noise, "gamma_thz", 125.0);
  cfg.noise.fluctuators_per_site = get_or<int>(noise, "fluctuators_per_site", 1);
  for (double g : cfg.noise.strengths_cm) {
    if (!(g >= 0.0)) throw ConfigError("noise.g_cm must be >= 0");
  }
  if (!(cfg.noise.switching_rate_thz > 0.0)) throw ConfigError("noise.gamma_thz must be > 0");
  if (cfg.noise.fluctuators_per_site < 1) throw ConfigError("noise.fluctuators_per_site must be >= 1");

  const json ens = doc.value("ensemble", json::object());
  reject_unknown(ens, "ensemble", {"runs", "shots", "dt_fs", "step_fs", "t_max_fs", "seed", "workers"});
  cfg.ensemble.runs = get_or<int>(ens, "runs", 250);
  cfg.ensemble.shots = get_or<std::uint64_t>(ens, "shots", 0);
  cfg.ensemble.dt_fs = get_or<double>(ens, "dt_fs", 2.0);
  cfg.step_fs = get_or<double>(ens, "step_fs", 5.0);
  cfg.ensemble.t_max_fs = get_or<double>(ens, "t_max_fs", 300.0);
  cfg.ensemble.master_seed = get_or<std::uint64_t>(ens, "seed", 1);
  cfg.ensemble.workers = get_or<unsigned>(ens, "workers", 1);
  if (cfg.ensemble.runs < 1) throw ConfigError("ensemble.runs must be >= 1");
  if (!(cfg.ensemble.dt_fs > 0.0)) throw ConfigError("ensemble.dt_fs must be > 0");
  if (!(cfg.step_fs > 0.0)) throw ConfigError("ensemble.step_fs must be > 0");
  if (!(cfg.ensemble.t_max_fs >= 0.0)) throw ConfigError("ensemble.t_max_fs must be >= 0");

  const json out = doc.value("output", json::object());
  reject_unknown(out, "output", {"dir", "prefix"});
  cfg.output_dir = get_or<std::string>(out, "dir", "");
  cfg.prefix = get_or<std::string>(out, "prefix", "run");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

std::size_t Table::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw std::invalid_argument("missing column '" + name + "'");
}

std::vector<double> Table::column(const std::string& name) const {
  const std::size_t c = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(c));
  return out;
}

void write_csv(std::ostream& out, const Table& table, const json& provenance) {
  for (const auto& [key, value] : provenance.items()) {
    out << "# " << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump())
        << '\n';
  }
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? "," : "") << table.columns[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
}

Table read_csv(std::istream& in, json* provenance) {
  Table table;
  if (provenance) *provenance = json::object();
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto colon = line.find(": ");
      if (provenance && colon != std::string::npos) {
        const std::string key = line.substr(2, colon - 2);
        const std::string value = line.substr(colon + 2);
        json parsed = json::parse(value, nullptr, false);
        (*provenance)[key] = parsed.is_discarded() ? json(value) : parsed;
      }
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!have_header) {
      table.columns = cells;
      have_header = true;
      continue;
    }
    if (cells.size() != table.columns.size()) {
      throw std::invalid_argument("CSV row width differs from header");
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      double v = 0.0;
      const auto res = std::from_chars(c.data(), c.data() + c.size(), v);
      if (res.ec != std::errc{} || res.ptr != c.data() + c.size()) {
        throw std::invalid_argument("non-numeric CSV cell '" + c + "'");
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw std::invalid_argument("CSV has no header row");
  return table;
}

Table coherent_table(const ExperimentConfig& config) {
  const auto& h = config.hamiltonian;
  const int n = h.n_sites();
  const auto sys = circuits::system_qubits(h);
  const bool sampled = config.ensemble.shots > 0;

  Table table;
  table.columns.push_back("t_fs");
  for (const char* kind : {"analytic", "circuit", "sampled"}) {
    if (std::string(kind) == "sampled" && !sampled) continue;
    for (int m = 0; m < n; ++m) table.columns.push_back(site_column(m, kind));
  }

  const auto grid = time_grid(config.ensemble.t_max_fs, config.step_fs);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    std::vector<double> row{t};
    for (double p : reference_populations(h, t)) row.push_back(p);
    const auto state =
        qcore::run_circuit(circuits::build_coherent_circuit(h, t), circuits::initial_state(h));
    const auto probs = qcore::site_probabilities(state, sys);
    for (double p : probs) row.push_back(p);
    if (sampled) {
      const auto counts = qcore::sample_shots(probs, config.ensemble.shots,
                                              noise::derive_seed(config.ensemble.master_seed, i));
      for (auto c : counts) {
        row.push_back(static_cast<double>(c) / static_cast<double>(config.ensemble.shots));
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

DephasingOutput dephasing_experiment(const ExperimentConfig& config) {
  const auto& h = config.hamiltonian;
  const int n = h.n_sites();
  if (config.ensemble.shots < 1) throw ConfigError("dephasing needs ensemble.shots >= 1");
  try {
    noise::switch_interval(config.noise, config.ensemble.dt_fs);
    noise::iteration_count(config.ensemble);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  DephasingOutput out;
  out.series = noise::run_ensemble(h, config.noise, config.ensemble);
  try {
    out.fit = oracle::fit_dephasing_rate(out.series.t_fs, out.series.mean, h);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("cannot fit dephasing rate: ") + e.what());
  }
  const auto fitted = oracle::lindblad_populations(h, out.fit.dephasing_rate_thz, out.series.t_fs);

  auto& table = out.table;
  table.columns.push_back("t_fs");
  for (const char* kind : {"mean", "stderr", "lindblad_fit"}) {
    for (int m = 0; m < n; ++m) table.columns.push_back(site_column(m, kind));
  }
  for (std::size_t i = 0; i < out.series.size(); ++i) {
    std::vector<double> row{out.series.t_fs[i]};
    for (int m = 0; m < n; ++m) row.push_back(out.series.mean[static_cast<std::size_t>(m)][i]);
    for (int m = 0; m < n; ++m) row.push_back(out.series.std_error[static_cast<std::size_t>(m)][i]);
    for (int m = 0; m < n; ++m) row.push_back(fitted[static_cast<std::size_t>(m)][i]);
    table.rows.push_back(std::move(row));
  }

  out.report = json{{"gamma_deph_thz", out.fit.dephasing_rate_thz},
                    {"residual_rms", out.fit.residual_rms},
                    {"fit_evaluations", out.fit.evaluations},
                    {"switch_interval_iterations",
                     noise::switch_interval(config.noise, config.ensemble.dt_fs)},
                    {"columns", table.columns},
                    {"config", config.to_json()}};
  return out;
}

json resources_report(int n_sites, int fluctuators_per_site, double t_fs, double dt_fs,
                      double switching_rate_thz) {
  model::ResourceReport r;
  int interval = 0;
  try {
    r = model::estimate_resources(n_sites, fluctuators_per_site, t_fs, dt_fs);
    noise::FluctuatorConfig fc{std::vector<double>(static_cast<std::size_t>(n_sites), 0.0),
                               switching_rate_thz, fluctuators_per_site};
    interval = noise::switch_interval(fc, dt_fs);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  // Gate structure does not depend on the Hamiltonian's values.
  const auto h = model::SystemHamiltonian(std::vector<double>(static_cast<std::size_t>(n_sites), 0.0),
                                          Eigen::MatrixXd::Zero(n_sites, n_sites));
  const std::vector<double> signs(static_cast<std::size_t>(n_sites * fluctuators_per_site), 0.5);
  const std::vector<double> strengths(static_cast<std::size_t>(n_sites), 0.0);
  const auto iteration = circuits::build_iteration_circuit(h, dt_fs, signs, strengths);
  const auto coherent = circuits::build_coherent_circuit(h, t_fs);

  return json{
      {"n_sites", r.n_sites},
      {"fluctuators_per_site", r.fluctuators_per_site},
      {"qubits", r.qubits},
      {"register_qubits", r.register_qubits},
      {"iterations", r.iterations},
      {"switch_interval_iterations", interval},
      {"per_iteration", circuits::tally_to_json(circuits::gate_count(iteration))},
      {"coherent_circuit", circuits::tally_to_json(circuits::gate_count(coherent))},
      {"bounds",
       {{"coherent_gates_N2_log2N_sq", r.coherent_gate_bound},
        {"fluctuator_gates_per_iteration_N_logN_plus_F", r.fluctuator_gate_bound_per_iteration},
        {"decoherence_gates_per_iteration", r.decoherence_gate_bound_per_iteration},
        {"decoherence_gates_total", r.decoherence_gate_bound_total}}},
  };
}

json fit_report(const Table& ensemble, const model::SystemHamiltonian& h) {
  std::vector<std::vector<double>> pops;
  for (int m = 0; m < h.n_sites(); ++m) pops.push_back(ensemble.column(site_column(m, "mean")));
  const auto t = ensemble.column("t_fs");
  const auto fit = oracle::fit_dephasing_rate(t, pops, h);
  return json{{"gamma_deph_thz", fit.dephasing_rate_thz},
              {"residual_rms", fit.residual_rms},
              {"fit_evaluations", fit.evaluations},
              {"points", t.size()}};
}

std::filesystem::path resolve_output_dir(const std::string& configured) {
  if (!configured.empty()) return configured;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return ".";
}

}  // namespace eet::experiments
