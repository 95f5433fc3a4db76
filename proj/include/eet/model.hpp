#pragma once

// Exciton-chain Hamiltonians in the site basis. Energies are in cm^-1 and
// times in fs throughout; phases are formed as energy * kPhasePerWavenumberFs * t.

#include <cstdint>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace eet::model {

/// Speed of light in cm/fs.
inline constexpr double kSpeedOfLightCmPerFs = 2.99792458e-5;
/// 2*pi*c: angular frequency (rad/fs) of an energy of 1 cm^-1.
inline constexpr double kPhasePerWavenumberFs = 2.0 * std::numbers::pi * kSpeedOfLightCmPerFs;
/// 1 THz = 1e-3 fs^-1.
inline constexpr double kPerFsPerTHz = 1e-3;

struct UnitsContext {
  double phase_per_cm1_fs = kPhasePerWavenumberFs;
};

bool is_power_of_two(std::int64_t n);
int log2_exact(std::int64_t n);

class SystemHamiltonian {
 public:
  /// Couplings must be symmetric with zero diagonal; n_sites = 2^q, q >= 1.
  SystemHamiltonian(std::vector<double> site_energies, Eigen::MatrixXd couplings);

  /// Splits a full symmetric matrix into site energies (diagonal) and couplings.
  static SystemHamiltonian from_matrix(const Eigen::MatrixXd& h);
  static SystemHamiltonian two_site(double eps0, double eps1, double coupling);

  /// [[13000, 126], [126, 12900]] cm^-1
  static SystemHamiltonian near_resonant();
  /// [[12900, 132], [132, 12300]] cm^-1
  static SystemHamiltonian non_resonant();

  int n_sites() const { return static_cast<int>(site_energies_.size()); }
  int system_qubits() const { return log2_exact(n_sites()); }
  const std::vector<double>& site_energies() const { return site_energies_; }
  double site_energy(int m) const { return site_energies_.at(static_cast<std::size_t>(m)); }
  double coupling(int m, int n) const { return couplings_(m, n); }
  const Eigen::MatrixXd& couplings() const { return couplings_; }

  Eigen::MatrixXd matrix() const;
  SystemHamiltonian shifted(double offset) const;

 private:
  std::vector<double> site_energies_;
  Eigen::MatrixXd couplings_;
};

/// Rows of `transform` are eigenvectors: H = T^T diag(E) T.
struct EigenDecomposition {
  std::vector<double> energies;  // descending, cm^-1
  Eigen::MatrixXd transform;
};

/// Closed form for two sites, cyclic Jacobi rotations otherwise.
EigenDecomposition eigendecompose(const SystemHamiltonian& h);

/// Cyclic Jacobi eigensolver for a real symmetric matrix (descending order).
/// Throws std::invalid_argument for non-symmetric input.
EigenDecomposition jacobi_eigensolver(const Eigen::MatrixXd& a, double tol = 1e-14,
                                      int max_sweeps = 100);

/// Angle for which RotY(theta) is the site-to-energy transform T of a
/// two-site Hamiltonian with row 0 the upper eigenvector:
/// theta = -atan2(2J, eps0 - eps1).
double mixing_angle(const SystemHamiltonian& h);

/// Omega = sqrt(w^2 + 4 J^2), w = eps1 - eps0 (cm^-1).
double beating_frequency(const SystemHamiltonian& h);

struct Populations {
  double p0 = 1.0;
  double p1 = 0.0;
};

/// Closed-form two-site populations starting from the donor |0>:
/// P1 = (4 J^2 / Omega^2) sin^2(Omega k t / 2).
Populations analytic_populations(const SystemHamiltonian& h, double t_fs);

/// 2 pi / (Omega k) in fs. Throws std::domain_error when Omega == 0.
double beating_period(const SystemHamiltonian& h);

struct ResourceReport {
  int n_sites = 0;
  int fluctuators_per_site = 0;
  int qubits = 0;           // 2 log2 N
  int register_qubits = 0;  // log2 N system qubits + one shared ancilla
  std::int64_t iterations = 0;
  double coherent_gate_bound = 0;                  // N^2 log2^2 N
  double fluctuator_gate_bound_per_iteration = 0;  // N (log2 N + F)
  double decoherence_gate_bound_per_iteration = 0; // N^2 log2^2 N + N F
  double decoherence_gate_bound_total = 0;         // iterations * per-iteration bound
};

ResourceReport estimate_resources(int n_sites, int fluctuators_per_site, double t_fs,
                                  double dt_fs);

}  // namespace eet::model
