// eetsim: excitonic energy transfer experiments on a statevector simulator.
//
//   eetsim coherent  --config cfg.json [--seed N] [--out file.csv]
//   eetsim dephasing --config cfg.json [--seed N] [--out file.csv] [--workers N]
//   eetsim resources --sites N [--fluctuators F] --t T --dt DT [--gamma THz]
//   eetsim fit       --input ensemble.csv [--config cfg.json]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical validation failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "eet/errors.hpp"
#include "eet/experiments.hpp"

namespace {

namespace fs = std::filesystem;
namespace ex = eet::experiments;

constexpr int kConfigExit = 2;
constexpr int kNumericalExit = 3;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::string out;
  std::string out_dir;
};

ex::ExperimentConfig resolve(const CommonOptions& opts) {
  ex::ExperimentConfig cfg = ex::load_config(opts.config);
  if (opts.seed) cfg.ensemble.master_seed = *opts.seed;
  if (opts.workers) cfg.ensemble.workers = *opts.workers;
  if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
  return cfg;
}

fs::path output_path(const CommonOptions& opts, const ex::ExperimentConfig& cfg,
                     const std::string& suffix) {
  if (!opts.out.empty()) return opts.out;
  return ex::resolve_output_dir(cfg.output_dir) / (cfg.prefix + suffix);
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw eet::ConfigError("cannot write " + path.string());
  return out;
}

void emit_json(const nlohmann::json& doc, const std::string& out) {
  if (out.empty()) {
    std::cout << doc.dump(2) << '\n';
    return;
  }
  auto f = open_output(out);
  f << doc.dump(2) << '\n';
}

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config, "JSON experiment configuration")->required();
  cmd->add_option("--seed", opts.seed, "Override ensemble.seed");
  cmd->add_option("-o,--out", opts.out, "Output CSV path");
  cmd->add_option("--out-dir", opts.out_dir,
                  std::string("Output directory (default: output.dir, $") + ex::kOutputDirEnv + ", .)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Excitonic energy transfer: coherent and dephasing simulations"};
  app.require_subcommand(1);

  CommonOptions coherent_opts;
  auto* coherent = app.add_subcommand("coherent", "Two-level beating: analytic, circuit, sampled");
  add_common(coherent, coherent_opts);

  CommonOptions dephasing_opts;
  auto* dephasing =
      app.add_subcommand("dephasing", "Telegraph-noise ensemble with Haken-Strobl fit");
  add_common(dephasing, dephasing_opts);
  dephasing->add_option("--workers", dephasing_opts.workers, "Parallel workers (0 = all cores)");

  int sites = 2, fluctuators = 1;
  double t_fs = 0.0, dt_fs = 2.0, gamma_thz = 125.0;
  std::string resources_out;
  auto* resources = app.add_subcommand("resources", "Qubit and gate resource report");
  resources->add_option("-n,--sites", sites, "Number of molecules (power of two)")->required();
  resources->add_option("-f,--fluctuators", fluctuators, "Fluctuators per molecule");
  resources->add_option("-t,--t", t_fs, "Simulated time in fs")->required();
  resources->add_option("--dt", dt_fs, "Iteration step in fs");
  resources->add_option("--gamma", gamma_thz, "Switching rate in THz");
  resources->add_option("-o,--out", resources_out, "Output JSON path (default stdout)");

  std::string fit_input, fit_config, fit_out;
  auto* fit = app.add_subcommand("fit", "Fit a dephasing rate to an ensemble CSV");
  fit->add_option("-i,--input", fit_input, "CSV written by `dephasing`")->required();
  fit->add_option("-c,--config", fit_config, "Config supplying the Hamiltonian (default: embedded)");
  fit->add_option("-o,--out", fit_out, "Output JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    if (*coherent) {
      const auto cfg = resolve(coherent_opts);
      const auto table = ex::coherent_table(cfg);
      const auto path = output_path(coherent_opts, cfg, "_coherent.csv");
      auto out = open_output(path);
      ex::write_csv(out, table, {{"command", "coherent"}, {"config", cfg.to_json()}});
      std::cerr << "wrote " << path.string() << " (" << table.rows.size() << " rows)\n";
    } else if (*dephasing) {
      const auto cfg = resolve(dephasing_opts);
      const auto result = ex::dephasing_experiment(cfg);
      const auto path = output_path(dephasing_opts, cfg, "_dephasing.csv");
      auto out = open_output(path);
      ex::write_csv(out, result.table, {{"command", "dephasing"}, {"config", cfg.to_json()}});
      fs::path sidecar = path;
      sidecar.replace_extension(".json");
      emit_json(result.report, sidecar.string());
      std::cerr << "wrote " << path.string() << " and " << sidecar.string()
                << "; gamma_deph = " << result.fit.dephasing_rate_thz << " THz (rms "
                << result.fit.residual_rms << ")\n";
    } else if (*resources) {
      emit_json(ex::resources_report(sites, fluctuators, t_fs, dt_fs, gamma_thz), resources_out);
    } else if (*fit) {
      std::ifstream in(fit_input);
      if (!in) throw eet::ConfigError("cannot open " + fit_input);
      nlohmann::json provenance;
      const auto table = ex::read_csv(in, &provenance);
      const auto h = [&] {
        if (!fit_config.empty()) return ex::load_config(fit_config).hamiltonian;
        if (!provenance.contains("config")) {
          throw eet::ConfigError("CSV carries no embedded config; pass --config");
        }
        return ex::parse_config(provenance.at("config")).hamiltonian;
      }();
      auto report = ex::fit_report(table, h);
      report["input"] = fit_input;
      emit_json(report, fit_out);
    }
  } catch (const eet::NumericalError& e) {
    std::cerr << "numerical validation failure: " << e.what() << '\n';
    return kNumericalExit;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
