#include "eet/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "eet/errors.hpp"

namespace eet::oracle {

namespace {

using namespace std::complex_literals;

constexpr double kHermitianTol = 1e-10;
constexpr double kTraceTol = 1e-9;
constexpr double kPositivityTol = -1e-8;
constexpr double kTraceDriftLimit = 1e-6;

// Hamiltonian in rad/fs with the mean site energy removed; the commutator is
// unchanged and the cancellation of ~1e4 cm^-1 diagonals is avoided.
Eigen::MatrixXcd angular_hamiltonian(const model::SystemHamiltonian& h) {
  Eigen::MatrixXd m = h.matrix();
  const double mean = m.diagonal().mean();
  m.diagonal().array() -= mean;
  return (m * model::kPhasePerWavenumberFs).cast<std::complex<double>>();
}

struct Generator {
  Eigen::MatrixXcd h;  // rad/fs
  double rate;         // fs^-1

  // -i[H, rho] + rate * sum_m (L_m rho L_m - 1/2 {L_m, rho}), L_m = |m><m|.
  // For projectors the dissipator reduces to diag(rho) - rho.
  Eigen::MatrixXcd operator()(const Eigen::MatrixXcd& rho) const {
    Eigen::MatrixXcd out = -1i * (h * rho - rho * h);
    if (rate != 0.0) {
      Eigen::MatrixXcd dissipator = -rho;
      dissipator.diagonal() += rho.diagonal();
      out += rate * dissipator;
    }
    return out;
  }
};

void rk4_step(const Generator& f, Eigen::MatrixXcd& rho, double step) {
  const Eigen::MatrixXcd k1 = f(rho);
  const Eigen::MatrixXcd k2 = f(rho + (0.5 * step) * k1);
  const Eigen::MatrixXcd k3 = f(rho + (0.5 * step) * k2);
  const Eigen::MatrixXcd k4 = f(rho + step * k3);
  rho += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double coverage_period(const model::SystemHamiltonian& h) {
  if (h.n_sites() == 2) return model::beating_period(h);
  const auto eig = model::eigendecompose(h);
  const double spread = eig.energies.front() - eig.energies.back();
  if (spread == 0.0) throw std::domain_error("degenerate spectrum has no beating period");
  return 2.0 * std::numbers::pi / (spread * model::kPhasePerWavenumberFs);
}

}  // namespace

DensityMatrix::DensityMatrix(Eigen::MatrixXcd rho) : rho_(std::move(rho)) { validate(rho_); }

DensityMatrix DensityMatrix::pure_site(int dimension, int site) {
  if (dimension < 1 || site < 0 || site >= dimension) {
    throw std::out_of_range("site outside density matrix");
  }
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dimension, dimension);
  rho(site, site) = 1.0;
  return DensityMatrix(std::move(rho));
}

std::vector<double> DensityMatrix::populations() const {
  std::vector<double> p(static_cast<std::size_t>(dimension()));
  for (int m = 0; m < dimension(); ++m) p[static_cast<std::size_t>(m)] = population(m);
  return p;
}

double DensityMatrix::trace_error() const { return std::abs(rho_.trace() - 1.0); }

double DensityMatrix::hermiticity_error() const {
  return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  const Eigen::MatrixXcd herm = 0.5 * (rho_ + rho_.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void DensityMatrix::validate(const Eigen::MatrixXcd& rho) {
  if (rho.rows() != rho.cols() || rho.rows() == 0) {
    throw std::invalid_argument("density matrix must be square and non-empty");
  }
  if (!rho.allFinite()) throw std::invalid_argument("density matrix has non-finite entries");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol) {
    throw std::invalid_argument("density matrix is not Hermitian");
  }
  if (std::abs(rho.trace() - 1.0) > kTraceTol) {
    throw std::invalid_argument("density matrix trace differs from 1");
  }
  const Eigen::MatrixXcd herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < kPositivityTol) {
    throw std::invalid_argument("density matrix is not positive semidefinite");
  }
}

std::vector<DensityMatrix> lindblad_integrate(const LindbladModel& model, const DensityMatrix& rho0,
                                              std::span<const double> t_grid_fs,
                                              double max_step_fs) {
  if (!(model.dephasing_rate_thz >= 0.0)) throw std::invalid_argument("dephasing rate must be >= 0");
  if (rho0.dimension() != model.h.n_sites()) {
    throw std::invalid_argument("density matrix dimension differs from site count");
  }
  if (!(max_step_fs > 0.0)) throw std::invalid_argument("integration step must be positive");

  const Generator f{angular_hamiltonian(model.h), model.dephasing_rate_thz * model::kPerFsPerTHz};
  Eigen::MatrixXcd rho = rho0.matrix();
  double t = 0.0;

  std::vector<DensityMatrix> out;
  out.reserve(t_grid_fs.size());
  for (double target : t_grid_fs) {
    if (!(target >= t)) throw std::invalid_argument("time grid must be ascending and >= 0");
    const double span = target - t;
    if (span > 0.0) {
      const auto steps = static_cast<long>(std::ceil(span / max_step_fs - 1e-12));
      const double step = span / static_cast<double>(steps);
      for (long s = 0; s < steps; ++s) rk4_step(f, rho, step);
      t = target;
    }
    const double drift = std::abs(rho.trace() - 1.0);
    if (drift > kTraceDriftLimit) {
      throw NumericalError("Lindblad integration trace drift " + std::to_string(drift) +
                           "; reduce the step");
    }
    try {
      out.emplace_back(rho);
    } catch (const std::invalid_argument& e) {
      throw NumericalError(std::string("Lindblad integration left the state space: ") + e.what());
    }
  }
  return out;
}

std::vector<std::vector<double>> lindblad_populations(const model::SystemHamiltonian& h,
                                                      double dephasing_rate_thz,
                                                      std::span<const double> t_grid_fs,
                                                      int initial_site, double max_step_fs) {
  const auto states =
      lindblad_integrate(LindbladModel{h, dephasing_rate_thz},
                         DensityMatrix::pure_site(h.n_sites(), initial_site), t_grid_fs, max_step_fs);
  std::vector<std::vector<double>> pops(static_cast<std::size_t>(h.n_sites()),
                                        std::vector<double>(states.size()));
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (int m = 0; m < h.n_sites(); ++m) pops[static_cast<std::size_t>(m)][i] = states[i].population(m);
  }
  return pops;
}

std::vector<std::vector<double>> exact_trajectory_series(const model::SystemHamiltonian& h,
                                                         const std::vector<double>& strengths,
                                                         const noise::FluctuatorTrajectory& traj,
                                                         double dt_fs) {
  const int n = h.n_sites();
  if (traj.n_sites() != n || static_cast<int>(strengths.size()) != n) {
    throw std::invalid_argument("trajectory, strengths and Hamiltonian disagree on site count");
  }
  if (!(dt_fs > 0.0)) throw std::invalid_argument("iteration step must be positive");

  const Eigen::MatrixXcd base = angular_hamiltonian(h);
  std::map<std::uint32_t, Eigen::MatrixXcd> step_propagators;
  auto propagator = [&](std::int64_t iteration) -> const Eigen::MatrixXcd& {
    const std::uint32_t key = traj.pattern(traj.interval_of(iteration));
    auto it = step_propagators.find(key);
    if (it == step_propagators.end()) {
      Eigen::MatrixXcd hb = base;
      for (int m = 0; m < n; ++m) {
        hb(m, m) += strengths[static_cast<std::size_t>(m)] * traj.site_factor(iteration, m) *
                    model::kPhasePerWavenumberFs;
      }
      const Eigen::MatrixXcd generator = (-1i * dt_fs) * hb;
      it = step_propagators.emplace(key, generator.exp()).first;
    }
    return it->second;
  };

  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(n);
  psi(0) = 1.0;
  auto probs = [&] {
    std::vector<double> p(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m) p[static_cast<std::size_t>(m)] = std::norm(psi(m));
    return p;
  };

  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(traj.n_iterations() + 1));
  out.push_back(probs());
  for (std::int64_t i = 0; i < traj.n_iterations(); ++i) {
    psi = propagator(i) * psi;
    out.push_back(probs());
  }
  return out;
}

std::vector<double> exact_trajectory_propagate(const model::SystemHamiltonian& h,
                                               const std::vector<double>& strengths,
                                               const noise::FluctuatorTrajectory& traj,
                                               double dt_fs, double t_fs) {
  if (!(dt_fs > 0.0) || !(t_fs >= 0.0)) throw std::invalid_argument("invalid time arguments");
  const double ratio = t_fs / dt_fs;
  const auto steps = static_cast<std::int64_t>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(steps)) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument("t is not on the iteration grid");
  }
  if (steps > traj.n_iterations()) throw std::invalid_argument("trajectory shorter than t/dt");
  const noise::FluctuatorTrajectory prefix = [&] {
    // Same realization truncated to the requested number of iterations.
    std::vector<double> signs;
    const std::int64_t blocks = std::max<std::int64_t>(1, (steps + traj.interval() - 1) / traj.interval());
    for (std::int64_t b = 0; b < blocks; ++b) {
      const std::int64_t it = b * traj.interval();
      for (int m = 0; m < traj.n_sites(); ++m)
        for (int f = 0; f < traj.fluctuators_per_site(); ++f) signs.push_back(traj.sign(it, m, f));
    }
    return noise::FluctuatorTrajectory(traj.n_sites(), traj.fluctuators_per_site(), traj.interval(),
                                       steps, std::move(signs));
  }();
  return exact_trajectory_series(h, strengths, prefix, dt_fs).back();
}

FitResult fit_dephasing_rate(std::span<const double> t_fs,
                             const std::vector<std::vector<double>>& populations,
                             const model::SystemHamiltonian& h) {
  const auto n_sites = static_cast<std::size_t>(h.n_sites());
  if (populations.size() != n_sites) throw std::invalid_argument("need one series per site");
  if (t_fs.size() < 3) throw std::invalid_argument("series too short to fit");
  for (double t : t_fs) {
    if (!std::isfinite(t)) throw std::invalid_argument("non-finite time value");
  }
  for (const auto& series : populations) {
    if (series.size() != t_fs.size()) throw std::invalid_argument("series length mismatch");
    for (double p : series) {
      if (!std::isfinite(p)) throw std::invalid_argument("non-finite population value");
    }
  }
  const double coverage = t_fs.back() - t_fs.front();
  if (coverage < 2.0 * coverage_period(h)) {
    throw std::invalid_argument("series must cover at least two beating periods");
  }

  FitResult result;
  auto sse = [&](double log_rate) {
    ++result.evaluations;
    const auto model_pops = lindblad_populations(h, std::exp(log_rate), t_fs);
    double sum = 0.0;
    for (std::size_t m = 0; m < n_sites; ++m)
      for (std::size_t i = 0; i < t_fs.size(); ++i) {
        const double d = model_pops[m][i] - populations[m][i];
        sum += d * d;
      }
    return sum;
  };

  constexpr int kScanPoints = 33;
  const double lo = std::log(kFitLowerTHz), hi = std::log(kFitUpperTHz);
  std::vector<double> grid(kScanPoints), values(kScanPoints);
  for (int i = 0; i < kScanPoints; ++i) {
    grid[i] = lo + (hi - lo) * i / (kScanPoints - 1);
    values[i] = sse(grid[i]);
  }
  const int best = static_cast<int>(std::min_element(values.begin(), values.end()) - values.begin());
  if (best == kScanPoints - 1) {
    throw NumericalError("dephasing fit failed to bracket a minimum below " +
                         std::to_string(kFitUpperTHz) + " THz");
  }

  // Golden-section search on log(rate) inside the bracketing cell.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = grid[std::max(best - 1, 0)];
  double b = grid[best + 1];
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = sse(c), fd = sse(d);
  while (b - a > 1e-6) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = sse(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = sse(d);
    }
  }
  double x = 0.5 * (a + b);
  double fx = sse(x);
  if (values[best] < fx) {
    x = grid[best];
    fx = values[best];
  }

  result.dephasing_rate_thz = std::exp(x);
  result.residual_rms = std::sqrt(fx / static_cast<double>(n_sites * t_fs.size()));
  return result;
}

}  // namespace eet::oracle
