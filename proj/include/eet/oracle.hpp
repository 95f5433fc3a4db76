#pragma once

// Classical reference solutions: piecewise-exact propagation for a given
// noise trajectory, Haken-Strobl (pure dephasing Lindblad) integration and
// the fit of its dephasing rate to ensemble data.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "eet/model.hpp"
#include "eet/noise.hpp"

namespace eet::oracle {

class DensityMatrix {
 public:
  /// Throws std::invalid_argument unless Hermitian (1e-10), unit trace (1e-9)
  /// and positive semidefinite (min eigenvalue >= -1e-8).
  explicit DensityMatrix(Eigen::MatrixXcd rho);

  static DensityMatrix pure_site(int dimension, int site);

  int dimension() const { return static_cast<int>(rho_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return rho_; }
  double population(int site) const { return rho_(site, site).real(); }
  std::vector<double> populations() const;

  double trace_error() const;
  double hermiticity_error() const;
  double min_eigenvalue() const;

  /// Same checks as the constructor applied to an arbitrary matrix.
  static void validate(const Eigen::MatrixXcd& rho);

 private:
  Eigen::MatrixXcd rho_;
};

struct LindbladModel {
  model::SystemHamiltonian h;
  double dephasing_rate_thz = 0.0;  // jump operators |m><m| for every site
};

inline constexpr double kDefaultLindbladStepFs = 0.5;

/// Fixed-step RK4 of d rho/dt = -i k [H, rho] + g sum_m D[|m><m|] rho, output
/// at every point of the ascending, non-negative `t_grid_fs` (rho0 at t = 0).
/// Throws eet::NumericalError if the trace drifts by more than 1e-6 or an
/// output violates the density-matrix invariants.
std::vector<DensityMatrix> lindblad_integrate(const LindbladModel& model, const DensityMatrix& rho0,
                                              std::span<const double> t_grid_fs,
                                              double max_step_fs = kDefaultLindbladStepFs);

/// Site populations of `lindblad_integrate` for an initially excited site,
/// [site][time].
std::vector<std::vector<double>> lindblad_populations(const model::SystemHamiltonian& h,
                                                      double dephasing_rate_thz,
                                                      std::span<const double> t_grid_fs,
                                                      int initial_site = 0,
                                                      double max_step_fs = kDefaultLindbladStepFs);

/// Site probabilities at every iteration grid point for H_S + sum g_m xi_m(t)
/// |m><m|, propagated by exact matrix exponentials (no Trotter splitting).
/// Output index i corresponds to t = i dt, i = 0..n_iterations.
std::vector<std::vector<double>> exact_trajectory_series(const model::SystemHamiltonian& h,
                                                         const std::vector<double>& strengths,
                                                         const noise::FluctuatorTrajectory& traj,
                                                         double dt_fs);

/// Site probabilities at time t (must lie on the iteration grid).
std::vector<double> exact_trajectory_propagate(const model::SystemHamiltonian& h,
                                               const std::vector<double>& strengths,
                                               const noise::FluctuatorTrajectory& traj,
                                               double dt_fs, double t_fs);

struct FitResult {
  double dephasing_rate_thz = 0.0;
  double residual_rms = 0.0;
  int evaluations = 0;
};

inline constexpr double kFitLowerTHz = 0.1;
inline constexpr double kFitUpperTHz = 500.0;

/// Least-squares fit of the Haken-Strobl dephasing rate to averaged site
/// populations `populations[site][time]` on `t_fs` (starting from site 0).
/// Log-spaced scan of [0.1, 500] THz followed by golden-section refinement.
/// Throws std::invalid_argument for non-finite data or fewer than two beating
/// periods of coverage, eet::NumericalError when no interior or lower-edge
/// minimum exists.
FitResult fit_dephasing_rate(std::span<const double> t_fs,
                             const std::vector<std::vector<double>>& populations,
                             const model::SystemHamiltonian& h);

}  // namespace eet::oracle
