#pragma once

// Bi-stable fluctuator (random telegraph) noise and the stochastic ensemble
// that averages Trotterized circuit runs over independent noise trajectories.

#include <cstdint>
#include <vector>

#include "eet/model.hpp"

namespace eet::noise {

struct FluctuatorConfig {
  std::vector<double> strengths_cm;  // g_m per site
  double switching_rate_thz = 125.0;
  int fluctuators_per_site = 1;
};

/// Iterations per waiting interval a = 1/(gamma dt). Throws
/// std::invalid_argument (with a suggested dt) unless a is a positive integer.
int switch_interval(const FluctuatorConfig& config, double dt_fs);

/// Largest dt <= requested that makes 1/(gamma dt) an integer.
double suggest_dt(double switching_rate_thz, double requested_dt_fs);

/// splitmix64-based mix of (seed, index); used to bind RNG streams to run
/// indices and time points independently of execution order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

class FluctuatorTrajectory {
 public:
  /// `interval_signs` holds one sign per (interval, site, fluctuator).
  FluctuatorTrajectory(int n_sites, int fluctuators_per_site, int interval,
                       std::int64_t n_iterations, std::vector<double> interval_signs);

  int n_sites() const { return n_sites_; }
  int fluctuators_per_site() const { return per_site_; }
  int interval() const { return interval_; }
  std::int64_t n_iterations() const { return n_iterations_; }
  std::int64_t n_intervals() const;

  double sign(std::int64_t iteration, int site, int fluctuator) const;
  /// Signs at an iteration, laid out [site][fluctuator].
  std::vector<double> signs_at(std::int64_t iteration) const;
  /// sum_f xi_mf at an iteration.
  double site_factor(std::int64_t iteration, int site) const;
  /// Index of the waiting interval containing `iteration`.
  std::int64_t interval_of(std::int64_t iteration) const { return iteration / interval_; }
  /// Compact key of the sign pattern in an interval (bit set = +1/2).
  std::uint32_t pattern(std::int64_t interval_index) const;

  /// The same noise realization on a grid `factor` times finer.
  FluctuatorTrajectory refined(int factor) const;

 private:
  int n_sites_;
  int per_site_;
  int interval_;
  std::int64_t n_iterations_;
  std::vector<double> signs_;
};

/// A fair coin per (site, fluctuator) at iteration 0 and at every multiple of
/// the switch interval; the value may repeat, so constant-energy periods have
/// random lengths.
FluctuatorTrajectory generate_trajectory(const FluctuatorConfig& config, double dt_fs,
                                         std::int64_t n_iterations, std::uint64_t seed);

struct EnsembleConfig {
  int runs = 250;
  std::uint64_t shots = 5000;
  double dt_fs = 2.0;
  double t_max_fs = 600.0;
  std::uint64_t master_seed = 1;
  unsigned workers = 1;  // 0 = hardware concurrency
};

/// Number of Trotter iterations t_max/dt; throws unless dt divides t_max.
std::int64_t iteration_count(const EnsembleConfig& ens);

struct EnsembleSeries {
  std::vector<double> t_fs;
  std::vector<std::vector<double>> mean;    // [site][time]
  std::vector<std::vector<double>> std_error;  // [site][time]

  std::size_t size() const { return t_fs.size(); }
};

/// Runs are independent: run r uses seeds derived from (master_seed, r) for
/// its trajectory and for the shot draws at each time point, so the output
/// does not depend on `workers`. At t = i dt the state after i iteration
/// circuits is measured with `shots` samples; the result is the across-run
/// mean of shot frequencies with its standard error.
EnsembleSeries run_ensemble(const model::SystemHamiltonian& h, const FluctuatorConfig& noise,
                            const EnsembleConfig& ens);

/// Exact (unsampled) site probabilities of one trajectory at every iteration
/// grid point, from the Trotterized circuits.
std::vector<std::vector<double>> trotter_trajectory_probabilities(
    const model::SystemHamiltonian& h, const std::vector<double>& strengths,
    const FluctuatorTrajectory& trajectory, double dt_fs);

}  // namespace eet::noise
