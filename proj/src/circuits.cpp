#include "eet/circuits.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace eet::circuits {

namespace {

using qcore::Gate;
using qcore::QuantumCircuit;

// Sandwich `body` between X gates on every system qubit whose bit in `site`
// is zero, so that all-ones controls select exactly |site>.
template <typename Body>
void on_site_branch(QuantumCircuit& c, int site, const std::vector<int>& sys, Body&& body) {
  std::vector<int> flips;
  for (std::size_t b = 0; b < sys.size(); ++b) {
    if (((site >> b) & 1) == 0) flips.push_back(sys[b]);
  }
  for (int q : flips) c.append(Gate::x(q));
  body();
  for (int q : flips) c.append(Gate::x(q));
}

void append_basis_change(QuantumCircuit& c, const model::SystemHamiltonian& h,
                         const model::EigenDecomposition& eig, bool inverse) {
  const auto sys = system_qubits(h);
  if (h.n_sites() == 2) {
    const double theta = model::mixing_angle(h);
    c.append(Gate::ry(sys[0], inverse ? -theta : theta));
    return;
  }
  Eigen::MatrixXcd t = eig.transform.cast<std::complex<double>>();
  if (inverse) t.adjointInPlace();
  c.append(Gate::dense(sys, std::move(t)));
}

void append_energy_phases(QuantumCircuit& c, const model::SystemHamiltonian& h,
                          const model::EigenDecomposition& eig, double t_fs) {
  const auto sys = system_qubits(h);
  const int anc = ancilla_qubit(h);
  const double mean =
      std::accumulate(eig.energies.begin(), eig.energies.end(), 0.0) / eig.energies.size();
  for (int m = 0; m < h.n_sites(); ++m) {
    const double shifted = eig.energies[static_cast<std::size_t>(m)] - mean;
    const double phi = -2.0 * shifted * model::kPhasePerWavenumberFs * t_fs;
    on_site_branch(c, m, sys, [&] { c.append(Gate::crz(sys, anc, phi)); });
  }
}

}  // namespace

int register_width(const model::SystemHamiltonian& h) { return h.system_qubits() + 1; }

int ancilla_qubit(const model::SystemHamiltonian& h) { return h.system_qubits(); }

std::vector<int> system_qubits(const model::SystemHamiltonian& h) {
  std::vector<int> q(static_cast<std::size_t>(h.system_qubits()));
  std::iota(q.begin(), q.end(), 0);
  return q;
}

qcore::StateVector initial_state(const model::SystemHamiltonian& h, int site) {
  if (site < 0 || site >= h.n_sites()) throw std::out_of_range("initial site outside chain");
  const std::size_t index = (std::size_t{1} << ancilla_qubit(h)) | static_cast<std::size_t>(site);
  return qcore::StateVector::basis_state(register_width(h), index);
}

qcore::QuantumCircuit build_coherent_circuit(const model::SystemHamiltonian& h, double t_fs) {
  if (!(t_fs >= 0.0)) throw std::invalid_argument("evolution time must be non-negative");
  const auto eig = model::eigendecompose(h);
  QuantumCircuit c(register_width(h));
  append_basis_change(c, h, eig, false);
  append_energy_phases(c, h, eig, t_fs);
  append_basis_change(c, h, eig, true);
  return c;
}

qcore::QuantumCircuit build_iteration_circuit(const model::SystemHamiltonian& h, double dt_fs,
                                              std::span<const double> signs,
                                              std::span<const double> strengths) {
  if (!(dt_fs > 0.0)) throw std::invalid_argument("iteration step must be positive");
  const auto n = static_cast<std::size_t>(h.n_sites());
  if (strengths.size() != n) throw std::invalid_argument("need one fluctuation strength per site");
  if (signs.empty() || signs.size() % n != 0) {
    throw std::invalid_argument("need the same number of fluctuator signs for every site");
  }
  for (double xi : signs) {
    if (xi != 0.5 && xi != -0.5) throw std::invalid_argument("fluctuator sign must be +1/2 or -1/2");
  }
  const std::size_t per_site = signs.size() / n;

  QuantumCircuit c = build_coherent_circuit(h, dt_fs);
  const auto sys = system_qubits(h);
  const int anc = ancilla_qubit(h);
  for (std::size_t m = 0; m < n; ++m) {
    on_site_branch(c, static_cast<int>(m), sys, [&] {
      for (std::size_t f = 0; f < per_site; ++f) {
        const double xi = signs[m * per_site + f];
        const double phi = -2.0 * xi * strengths[m] * model::kPhasePerWavenumberFs * dt_fs;
        c.append(Gate::crz(sys, anc, phi));
      }
    });
  }
  return c;
}

std::uint64_t GateTally::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

GateTally& GateTally::operator+=(const GateTally& other) {
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  return *this;
}

GateTally gate_count(const qcore::QuantumCircuit& circuit) {
  GateTally t;
  for (const auto& g : circuit.gates()) ++t.counts[static_cast<std::size_t>(g.kind)];
  return t;
}

nlohmann::json tally_to_json(const GateTally& tally) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t i = 0; i < qcore::kGateKindCount; ++i) {
    if (tally.counts[i] == 0) continue;
    j[std::string(qcore::gate_kind_name(static_cast<qcore::GateKind>(i)))] = tally.counts[i];
  }
  return j;
}

nlohmann::json circuit_to_json(const qcore::QuantumCircuit& circuit) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& g : circuit.gates()) {
    nlohmann::json rec{{"kind", std::string(qcore::gate_kind_name(g.kind))},
                       {"targets", g.targets},
                       {"controls", g.controls},
                       {"angle", g.angle}};
    if (g.kind == qcore::GateKind::DenseUnitary) {
      nlohmann::json rows = nlohmann::json::array();
      for (Eigen::Index r = 0; r < g.matrix.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index col = 0; col < g.matrix.cols(); ++col) {
          row.push_back({g.matrix(r, col).real(), g.matrix(r, col).imag()});
        }
        rows.push_back(std::move(row));
      }
      rec["matrix"] = std::move(rows);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace eet::circuits
