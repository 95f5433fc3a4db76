#pragma once

// Small dense statevector simulator: gates, circuits, marginal probabilities
// and shot sampling. Basis ordering: qubit 0 is the least significant bit.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace eet::qcore {

using Amplitude = std::complex<double>;

inline constexpr int kMaxQubits = 16;

struct Gate;

class StateVector {
 public:
  /// |0...0> on `num_qubits` qubits.
  explicit StateVector(int num_qubits);

  static StateVector basis_state(int num_qubits, std::size_t index);
  /// Throws std::invalid_argument unless the length is a power of two and the
  /// vector has unit norm within 1e-9.
  static StateVector from_amplitudes(std::vector<Amplitude> amplitudes);

  int num_qubits() const { return num_qubits_; }
  std::size_t dimension() const { return amplitudes_.size(); }
  std::span<const Amplitude> amplitudes() const { return amplitudes_; }
  const Amplitude& operator[](std::size_t i) const { return amplitudes_[i]; }
  double norm_squared() const;

 private:
  StateVector() = default;

  int num_qubits_ = 0;
  std::vector<Amplitude> amplitudes_;

  friend StateVector apply_gate(const StateVector& state, const Gate& gate);
};

enum class GateKind { PauliX, RotY, RotZ, ControlledRotZ, ControlledNot, DenseUnitary };

inline constexpr std::size_t kGateKindCount = 6;

std::string_view gate_kind_name(GateKind kind);

struct Gate {
  GateKind kind = GateKind::PauliX;
  std::vector<int> targets;
  std::vector<int> controls;
  double angle = 0.0;
  /// Only for DenseUnitary; targets[0] is the least significant local bit.
  Eigen::MatrixXcd matrix;

  static Gate x(int target);
  static Gate ry(int target, double theta);
  static Gate rz(int target, double phi);
  /// RotZ(phi) on `target` on the subspace where every control qubit is 1.
  static Gate crz(std::vector<int> controls, int target, double phi);
  static Gate crz(int control, int target, double phi) {
    return crz(std::vector<int>{control}, target, phi);
  }
  static Gate cnot(int control, int target);
  /// Rejects matrices with ||U^dagger U - I||_max >= 1e-10.
  static Gate dense(std::vector<int> targets, Eigen::MatrixXcd unitary);
};

/// Local matrix of the gate acting on its targets (controls excluded).
///   RotY(t) = [[cos(t/2), -sin(t/2)], [sin(t/2), cos(t/2)]]
///   RotZ(p) = diag(exp(-i p/2), exp(+i p/2))
Eigen::MatrixXcd gate_matrix(const Gate& gate);

/// Full 2^n x 2^n unitary of the gate embedded in an n-qubit register.
Eigen::MatrixXcd embedded_unitary(const Gate& gate, int num_qubits);

class QuantumCircuit {
 public:
  explicit QuantumCircuit(int num_qubits);

  int num_qubits() const { return num_qubits_; }
  const std::vector<Gate>& gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }

  /// Throws std::out_of_range for invalid or overlapping qubit indices.
  QuantumCircuit& append(Gate gate);
  QuantumCircuit& append(const QuantumCircuit& other);

 private:
  int num_qubits_;
  std::vector<Gate> gates_;
};

void validate_gate(const Gate& gate, int num_qubits);

StateVector apply_gate(const StateVector& state, const Gate& gate);

/// Applies every gate in order. Throws eet::NumericalError if the final norm
/// drifts by more than 1e-9.
StateVector run_circuit(const QuantumCircuit& circuit, StateVector initial);

/// Marginal distribution over `system_qubits` (other qubits summed out).
/// Outcome index bit k corresponds to system_qubits[k].
std::vector<double> site_probabilities(const StateVector& state,
                                       std::span<const int> system_qubits);

/// Multinomial sample of `shots` outcomes. Deterministic for a fixed seed.
std::vector<std::uint64_t> sample_shots(std::span<const double> probabilities,
                                        std::uint64_t shots, std::uint64_t rng_seed);

}  // namespace eet::qcore
