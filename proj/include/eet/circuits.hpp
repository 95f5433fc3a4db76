#pragma once

// Circuit constructions for exciton-chain evolution. Register layout: system
// qubits 0..q-1 encode the site index (binary, qubit 0 least significant) and
// qubit q is a single ancilla prepared in |1> that absorbs controlled phase
// rotations (phase kickback onto the selected system branch).

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

#include "eet/model.hpp"
#include "eet/qcore.hpp"

namespace eet::circuits {

int register_width(const model::SystemHamiltonian& h);
int ancilla_qubit(const model::SystemHamiltonian& h);
std::vector<int> system_qubits(const model::SystemHamiltonian& h);

/// |site> (x) |1>_anc.
qcore::StateVector initial_state(const model::SystemHamiltonian& h, int site = 0);

/// exp(-i H t) as T^T . diag phases . T. For two sites:
///   [RotY(th); X; CRotZ(-2E'0 k t); X; CRotZ(-2E'1 k t); RotY(-th)]
/// with E'_m = E_m - mean(E). Larger chains use dense T gates and
/// multi-controlled phase rotations. Throws std::invalid_argument for t < 0.
qcore::QuantumCircuit build_coherent_circuit(const model::SystemHamiltonian& h, double t_fs);

/// One first-order Trotter step exp(-i H_F dt) exp(-i H_S dt).
///
/// `signs` holds xi in {+1/2, -1/2} laid out as [site][fluctuator]
/// (size n_sites * F); `strengths` holds g_m per site in cm^-1. Each
/// fluctuator adds CRotZ(-2 xi g k dt) on its site's branch, realizing
/// H_F = sum_m g_m (sum_f xi_mf) |m><m|.
qcore::QuantumCircuit build_iteration_circuit(const model::SystemHamiltonian& h, double dt_fs,
                                              std::span<const double> signs,
                                              std::span<const double> strengths);

struct GateTally {
  std::array<std::uint64_t, qcore::kGateKindCount> counts{};

  std::uint64_t operator[](qcore::GateKind kind) const {
    return counts[static_cast<std::size_t>(kind)];
  }
  std::uint64_t total() const;
  GateTally& operator+=(const GateTally& other);
  bool operator==(const GateTally&) const = default;
};

GateTally gate_count(const qcore::QuantumCircuit& circuit);

/// {kind: count} for every kind with a non-zero count.
nlohmann::json tally_to_json(const GateTally& tally);

/// List of {kind, targets, controls, angle} records (plus "matrix" as
/// [[re, im], ...] rows for dense gates).
nlohmann::json circuit_to_json(const qcore::QuantumCircuit& circuit);

}  // namespace eet::circuits
