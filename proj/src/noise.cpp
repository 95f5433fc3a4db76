#include "eet/noise.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "eet/circuits.hpp"
#include "eet/qcore.hpp"

namespace eet::noise {

namespace {

constexpr double kGridTol = 1e-9;

void validate(const FluctuatorConfig& config) {
  if (config.strengths_cm.empty()) throw std::invalid_argument("no fluctuation strengths given");
  for (double g : config.strengths_cm) {
    if (!(g >= 0.0) || !std::isfinite(g)) {
      throw std::invalid_argument("fluctuation strength must be finite and >= 0");
    }
  }
  if (!(config.switching_rate_thz > 0.0) || !std::isfinite(config.switching_rate_thz)) {
    throw std::invalid_argument("switching rate must be positive");
  }
  if (config.fluctuators_per_site < 1) {
    throw std::invalid_argument("need at least one fluctuator per site");
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Iteration circuits depend only on the sign pattern, so they are built once
// per pattern and reused along the trajectory.
class IterationCircuitCache {
 public:
  IterationCircuitCache(const model::SystemHamiltonian& h, const std::vector<double>& strengths,
                        double dt)
      : h_(h), strengths_(strengths), dt_(dt) {}

  const qcore::QuantumCircuit& get(const FluctuatorTrajectory& traj, std::int64_t iteration) {
    const std::uint32_t key = traj.pattern(traj.interval_of(iteration));
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      const auto signs = traj.signs_at(iteration);
      it = cache_.emplace(key, circuits::build_iteration_circuit(h_, dt_, signs, strengths_)).first;
    }
    return it->second;
  }

 private:
  const model::SystemHamiltonian& h_;
  const std::vector<double>& strengths_;
  double dt_;
  std::map<std::uint32_t, qcore::QuantumCircuit> cache_;
};

}  // namespace

int switch_interval(const FluctuatorConfig& config, double dt_fs) {
  validate(config);
  if (!(dt_fs > 0.0)) throw std::invalid_argument("iteration step must be positive");
  const double waiting_fs = 1.0 / (config.switching_rate_thz * model::kPerFsPerTHz);
  const double a = waiting_fs / dt_fs;
  const double rounded = std::round(a);
  if (rounded < 1.0 || std::abs(a - rounded) > kGridTol * std::max(1.0, a)) {
    std::ostringstream msg;
    msg << "waiting time 1/gamma = " << waiting_fs << " fs is not an integer multiple of dt = "
        << dt_fs << " fs; use dt = " << suggest_dt(config.switching_rate_thz, dt_fs) << " fs";
    throw std::invalid_argument(msg.str());
  }
  return static_cast<int>(rounded);
}

double suggest_dt(double switching_rate_thz, double requested_dt_fs) {
  const double waiting_fs = 1.0 / (switching_rate_thz * model::kPerFsPerTHz);
  const double a = std::max(1.0, std::ceil(waiting_fs / requested_dt_fs - kGridTol));
  return waiting_fs / a;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

FluctuatorTrajectory::FluctuatorTrajectory(int n_sites, int fluctuators_per_site, int interval,
                                           std::int64_t n_iterations,
                                           std::vector<double> interval_signs)
    : n_sites_(n_sites),
      per_site_(fluctuators_per_site),
      interval_(interval),
      n_iterations_(n_iterations),
      signs_(std::move(interval_signs)) {
  if (n_sites < 1 || fluctuators_per_site < 1 || interval < 1 || n_iterations < 0) {
    throw std::invalid_argument("invalid trajectory dimensions");
  }
  if (static_cast<std::int64_t>(n_sites) * fluctuators_per_site > 32) {
    throw std::invalid_argument("at most 32 fluctuators in total are supported");
  }
  const auto expected = static_cast<std::size_t>(n_intervals()) *
                        static_cast<std::size_t>(n_sites * fluctuators_per_site);
  if (signs_.size() != expected) throw std::invalid_argument("sign count does not match shape");
  for (double xi : signs_) {
    if (xi != 0.5 && xi != -0.5) throw std::invalid_argument("fluctuator sign must be +/-1/2");
  }
}

std::int64_t FluctuatorTrajectory::n_intervals() const {
  return std::max<std::int64_t>(1, (n_iterations_ + interval_ - 1) / interval_);
}

double FluctuatorTrajectory::sign(std::int64_t iteration, int site, int fluctuator) const {
  if (iteration < 0 || iteration >= std::max<std::int64_t>(1, n_iterations_)) {
    throw std::out_of_range("iteration outside trajectory");
  }
  const std::int64_t block = interval_of(iteration);
  const auto idx = static_cast<std::size_t>((block * n_sites_ + site) * per_site_ + fluctuator);
  return signs_.at(idx);
}

std::vector<double> FluctuatorTrajectory::signs_at(std::int64_t iteration) const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_sites_ * per_site_));
  for (int m = 0; m < n_sites_; ++m)
    for (int f = 0; f < per_site_; ++f) out.push_back(sign(iteration, m, f));
  return out;
}

double FluctuatorTrajectory::site_factor(std::int64_t iteration, int site) const {
  double sum = 0.0;
  for (int f = 0; f < per_site_; ++f) sum += sign(iteration, site, f);
  return sum;
}

std::uint32_t FluctuatorTrajectory::pattern(std::int64_t interval_index) const {
  const std::size_t width = static_cast<std::size_t>(n_sites_ * per_site_);
  const std::size_t base = static_cast<std::size_t>(interval_index) * width;
  std::uint32_t key = 0;
  for (std::size_t k = 0; k < width; ++k) {
    if (signs_.at(base + k) > 0.0) key |= std::uint32_t{1} << k;
  }
  return key;
}

FluctuatorTrajectory FluctuatorTrajectory::refined(int factor) const {
  if (factor < 1) throw std::invalid_argument("refinement factor must be >= 1");
  return FluctuatorTrajectory(n_sites_, per_site_, interval_ * factor, n_iterations_ * factor,
                              signs_);
}

FluctuatorTrajectory generate_trajectory(const FluctuatorConfig& config, double dt_fs,
                                         std::int64_t n_iterations, std::uint64_t seed) {
  const int a = switch_interval(config, dt_fs);
  if (n_iterations < 0) throw std::invalid_argument("iteration count must be non-negative");
  const int n_sites = static_cast<int>(config.strengths_cm.size());
  const int per_site = config.fluctuators_per_site;
  const std::int64_t blocks = std::max<std::int64_t>(1, (n_iterations + a - 1) / a);

  std::vector<double> signs(static_cast<std::size_t>(blocks * n_sites * per_site));
  for (int m = 0; m < n_sites; ++m) {
    for (int f = 0; f < per_site; ++f) {
      // Independent stream per fluctuator.
      std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(m * per_site + f)));
      std::bernoulli_distribution coin(0.5);
      for (std::int64_t b = 0; b < blocks; ++b) {
        signs[static_cast<std::size_t>((b * n_sites + m) * per_site + f)] = coin(rng) ? 0.5 : -0.5;
      }
    }
  }
  return FluctuatorTrajectory(n_sites, per_site, a, n_iterations, std::move(signs));
}

std::int64_t iteration_count(const EnsembleConfig& ens) {
  if (!(ens.dt_fs > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(ens.t_max_fs >= 0.0)) throw std::invalid_argument("t_max must be non-negative");
  const double ratio = ens.t_max_fs / ens.dt_fs;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > kGridTol * std::max(1.0, ratio)) {
    throw std::invalid_argument("dt must divide t_max");
  }
  return static_cast<std::int64_t>(rounded);
}

std::vector<std::vector<double>> trotter_trajectory_probabilities(
    const model::SystemHamiltonian& h, const std::vector<double>& strengths,
    const FluctuatorTrajectory& trajectory, double dt_fs) {
  if (trajectory.n_sites() != h.n_sites()) {
    throw std::invalid_argument("trajectory and Hamiltonian disagree on site count");
  }
  IterationCircuitCache cache(h, strengths, dt_fs);
  const auto sys = circuits::system_qubits(h);
  qcore::StateVector state = circuits::initial_state(h);

  std::vector<std::vector<double>> probs;
  probs.reserve(static_cast<std::size_t>(trajectory.n_iterations() + 1));
  probs.push_back(qcore::site_probabilities(state, sys));
  for (std::int64_t i = 0; i < trajectory.n_iterations(); ++i) {
    state = qcore::run_circuit(cache.get(trajectory, i), std::move(state));
    probs.push_back(qcore::site_probabilities(state, sys));
  }
  return probs;
}

EnsembleSeries run_ensemble(const model::SystemHamiltonian& h, const FluctuatorConfig& noise,
                            const EnsembleConfig& ens) {
  validate(noise);
  if (static_cast<int>(noise.strengths_cm.size()) != h.n_sites()) {
    throw std::invalid_argument("need one fluctuation strength per site");
  }
  if (ens.runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (ens.shots < 1) throw std::invalid_argument("shots must be >= 1");
  const std::int64_t n_iter = iteration_count(ens);
  switch_interval(noise, ens.dt_fs);

  const auto n_sites = static_cast<std::size_t>(h.n_sites());
  const auto n_points = static_cast<std::size_t>(n_iter + 1);
  const auto runs = static_cast<std::size_t>(ens.runs);

  // freq[run][time * n_sites + site]
  std::vector<std::vector<double>> freq(runs);

  auto simulate_run = [&](std::size_t r) {
    const std::uint64_t run_seed = derive_seed(ens.master_seed, r);
    const auto traj = generate_trajectory(noise, ens.dt_fs, n_iter, derive_seed(run_seed, 0));
    const auto probs = trotter_trajectory_probabilities(h, noise.strengths_cm, traj, ens.dt_fs);
    std::vector<double> out(n_points * n_sites);
    for (std::size_t i = 0; i < n_points; ++i) {
      const auto counts = qcore::sample_shots(probs[i], ens.shots, derive_seed(run_seed, 1 + i));
      for (std::size_t m = 0; m < n_sites; ++m) {
        out[i * n_sites + m] = static_cast<double>(counts[m]) / static_cast<double>(ens.shots);
      }
    }
    freq[r] = std::move(out);
  };

  unsigned workers = ens.workers == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                      : ens.workers;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, runs));
  if (workers <= 1) {
    for (std::size_t r = 0; r < runs; ++r) simulate_run(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t r = next++; r < runs; r = next++) {
            try {
              simulate_run(r);
            } catch (...) {
              std::lock_guard lock(failure_mutex);
              if (!failure) failure = std::current_exception();
              next = runs;
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  // Reduction in run-index order keeps the result independent of scheduling.
  EnsembleSeries series;
  series.t_fs.resize(n_points);
  series.mean.assign(n_sites, std::vector<double>(n_points, 0.0));
  series.std_error.assign(n_sites, std::vector<double>(n_points, 0.0));
  for (std::size_t i = 0; i < n_points; ++i) {
    series.t_fs[i] = static_cast<double>(i) * ens.dt_fs;
    for (std::size_t m = 0; m < n_sites; ++m) {
      double sum = 0.0;
      for (std::size_t r = 0; r < runs; ++r) sum += freq[r][i * n_sites + m];
      const double mean = sum / static_cast<double>(runs);
      double ss = 0.0;
      for (std::size_t r = 0; r < runs; ++r) {
        const double d = freq[r][i * n_sites + m] - mean;
        ss += d * d;
      }
      series.mean[m][i] = mean;
      series.std_error[m][i] =
          runs > 1 ? std::sqrt(ss / static_cast<double>(runs - 1) / static_cast<double>(runs)) : 0.0;
    }
  }
  return series;
}

}  // namespace eet::noise
