#include "eet/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace eet::model {

namespace {

constexpr double kSymmetryTol = 1e-9;

void require_two_sites(const SystemHamiltonian& h, const char* what) {
  if (h.n_sites() != 2) {
    throw std::invalid_argument(std::string(what) + " requires a two-site Hamiltonian");
  }
}

}  // namespace

bool is_power_of_two(std::int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

int log2_exact(std::int64_t n) {
  if (!is_power_of_two(n)) {
    throw std::invalid_argument("expected a power of two, got " + std::to_string(n));
  }
  int q = 0;
  while ((std::int64_t{1} << q) < n) ++q;
  return q;
}

SystemHamiltonian::SystemHamiltonian(std::vector<double> site_energies, Eigen::MatrixXd couplings)
    : site_energies_(std::move(site_energies)), couplings_(std::move(couplings)) {
  const auto n = static_cast<std::int64_t>(site_energies_.size());
  if (n < 2 || !is_power_of_two(n)) {
    throw std::invalid_argument("number of sites must be a power of two >= 2");
  }
  if (couplings_.rows() != n || couplings_.cols() != n) {
    throw std::invalid_argument("coupling matrix shape does not match site count");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(site_energies_[static_cast<std::size_t>(i)])) {
      throw std::invalid_argument("non-finite site energy");
    }
    if (couplings_(i, i) != 0.0) throw std::invalid_argument("coupling diagonal must be zero");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!std::isfinite(couplings_(i, j))) throw std::invalid_argument("non-finite coupling");
      if (std::abs(couplings_(i, j) - couplings_(j, i)) > kSymmetryTol) {
        throw std::invalid_argument("coupling matrix is not symmetric");
      }
    }
  }
}

SystemHamiltonian SystemHamiltonian::from_matrix(const Eigen::MatrixXd& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("Hamiltonian must be square");
  std::vector<double> energies(static_cast<std::size_t>(h.rows()));
  Eigen::MatrixXd couplings = h;
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    energies[static_cast<std::size_t>(i)] = h(i, i);
    couplings(i, i) = 0.0;
  }
  return SystemHamiltonian(std::move(energies), std::move(couplings));
}

SystemHamiltonian SystemHamiltonian::two_site(double eps0, double eps1, double coupling) {
  Eigen::MatrixXd c(2, 2);
  c << 0.0, coupling, coupling, 0.0;
  return SystemHamiltonian({eps0, eps1}, std::move(c));
}

SystemHamiltonian SystemHamiltonian::near_resonant() { return two_site(13000.0, 12900.0, 126.0); }

SystemHamiltonian SystemHamiltonian::non_resonant() { return two_site(12900.0, 12300.0, 132.0); }

Eigen::MatrixXd SystemHamiltonian::matrix() const {
  Eigen::MatrixXd h = couplings_;
  for (int m = 0; m < n_sites(); ++m) h(m, m) = site_energies_[static_cast<std::size_t>(m)];
  return h;
}

SystemHamiltonian SystemHamiltonian::shifted(double offset) const {
  std::vector<double> e = site_energies_;
  for (double& v : e) v += offset;
  return SystemHamiltonian(std::move(e), couplings_);
}

EigenDecomposition jacobi_eigensolver(const Eigen::MatrixXd& a_in, double tol, int max_sweeps) {
  const Eigen::Index n = a_in.rows();
  if (n != a_in.cols() || n == 0) throw std::invalid_argument("matrix must be square");
  if ((a_in - a_in.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol) {
    throw std::invalid_argument("matrix is not symmetric");
  }
  Eigen::MatrixXd a = a_in;
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);  // columns = eigenvectors
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
    if (off <= tol * scale) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        // Rotation zeroing a(p,q) (Golub & Van Loan, sym.schur2).
        const double tau = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

  EigenDecomposition out;
  out.transform.resize(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::Index src = order[static_cast<std::size_t>(r)];
    out.energies.push_back(a(src, src));
    out.transform.row(r) = v.col(src).transpose();
  }
  return out;
}

double mixing_angle(const SystemHamiltonian& h) {
  require_two_sites(h, "mixing_angle");
  return -std::atan2(2.0 * h.coupling(0, 1), h.site_energy(0) - h.site_energy(1));
}

double beating_frequency(const SystemHamiltonian& h) {
  require_two_sites(h, "beating_frequency");
  const double w = h.site_energy(1) - h.site_energy(0);
  const double j = h.coupling(0, 1);
  return std::sqrt(w * w + 4.0 * j * j);
}

EigenDecomposition eigendecompose(const SystemHamiltonian& h) {
  if (h.n_sites() != 2) return jacobi_eigensolver(h.matrix());

  const double mean = 0.5 * (h.site_energy(0) + h.site_energy(1));
  const double omega = beating_frequency(h);
  const double theta = mixing_angle(h);
  const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);

  EigenDecomposition out;
  out.energies = {mean + 0.5 * omega, mean - 0.5 * omega};
  out.transform.resize(2, 2);
  out.transform << c, -s, s, c;
  return out;
}

Populations analytic_populations(const SystemHamiltonian& h, double t_fs) {
  require_two_sites(h, "analytic_populations");
  const double omega = beating_frequency(h);
  if (omega == 0.0) return {};
  const double j = h.coupling(0, 1);
  const double amplitude = 4.0 * j * j / (omega * omega);
  const double s = std::sin(0.5 * omega * kPhasePerWavenumberFs * t_fs);
  const double p1 = amplitude * s * s;
  return {1.0 - p1, p1};
}

double beating_period(const SystemHamiltonian& h) {
  const double omega = beating_frequency(h);
  if (omega == 0.0) {
    throw std::domain_error("beating period undefined for a degenerate uncoupled system");
  }
  return 2.0 * std::numbers::pi / (omega * kPhasePerWavenumberFs);
}

ResourceReport estimate_resources(int n_sites, int fluctuators_per_site, double t_fs,
                                  double dt_fs) {
  if (!is_power_of_two(n_sites) || n_sites < 2) {
    throw std::invalid_argument("n_sites must be a power of two >= 2");
  }
  if (fluctuators_per_site < 1) throw std::invalid_argument("need at least one fluctuator per site");
  if (!(dt_fs > 0.0)) throw std::invalid_argument("dt must be positive");
  if (!(t_fs >= 0.0)) throw std::invalid_argument("t must be non-negative");

  const double ratio = t_fs / dt_fs;
  const auto iterations = static_cast<std::int64_t>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(iterations)) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument("t must be an integer multiple of dt");
  }

  const int log_n = log2_exact(n_sites);
  const double n = n_sites;
  const double f = fluctuators_per_site;

  ResourceReport r;
  r.n_sites = n_sites;
  r.fluctuators_per_site = fluctuators_per_site;
  r.qubits = 2 * log_n;
  r.register_qubits = log_n + 1;
  r.iterations = iterations;
  r.coherent_gate_bound = n * n * log_n * log_n;
  r.fluctuator_gate_bound_per_iteration = n * (log_n + f);
  r.decoherence_gate_bound_per_iteration = n * n * log_n * log_n + n * f;
  r.decoherence_gate_bound_total =
      static_cast<double>(iterations) * r.decoherence_gate_bound_per_iteration;
  return r;
}

}  // namespace eet::model
