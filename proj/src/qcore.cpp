#include "eet/qcore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "eet/errors.hpp"

namespace eet::qcore {

namespace {

constexpr double kUnitarityTol = 1e-10;
constexpr double kNormTol = 1e-9;

void check_qubit_count(int num_qubits) {
  if (num_qubits < 1 || num_qubits > kMaxQubits) {
    throw std::invalid_argument("qubit count must be in [1, " + std::to_string(kMaxQubits) +
                                "], got " + std::to_string(num_qubits));
  }
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

StateVector::StateVector(int num_qubits) : num_qubits_(num_qubits) {
  check_qubit_count(num_qubits);
  amplitudes_.assign(std::size_t{1} << num_qubits, Amplitude{0.0, 0.0});
  amplitudes_[0] = 1.0;
}

StateVector StateVector::basis_state(int num_qubits, std::size_t index) {
  StateVector s(num_qubits);
  if (index >= s.dimension()) {
    throw std::out_of_range("basis index " + std::to_string(index) + " outside register");
  }
  s.amplitudes_[0] = 0.0;
  s.amplitudes_[index] = 1.0;
  return s;
}

StateVector StateVector::from_amplitudes(std::vector<Amplitude> amplitudes) {
  if (!is_power_of_two(amplitudes.size()) || amplitudes.size() < 2) {
    throw std::invalid_argument("amplitude count must be a power of two >= 2");
  }
  StateVector s;
  s.num_qubits_ = std::countr_zero(amplitudes.size());
  check_qubit_count(s.num_qubits_);
  s.amplitudes_ = std::move(amplitudes);
  for (const auto& a : s.amplitudes_) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
      throw std::invalid_argument("non-finite amplitude");
    }
  }
  if (std::abs(s.norm_squared() - 1.0) > kNormTol) {
    throw std::invalid_argument("state is not normalized");
  }
  return s;
}

double StateVector::norm_squared() const {
  double sum = 0.0;
  for (const auto& a : amplitudes_) sum += std::norm(a);
  return sum;
}

std::string_view gate_kind_name(GateKind kind) {
  switch (kind) {
    case GateKind::PauliX: return "X";
    case GateKind::RotY: return "RotY";
    case GateKind::RotZ: return "RotZ";
    case GateKind::ControlledRotZ: return "CRotZ";
    case GateKind::ControlledNot: return "CNOT";
    case GateKind::DenseUnitary: return "Dense";
  }
  return "?";
}

Gate Gate::x(int target) { return Gate{GateKind::PauliX, {target}, {}, 0.0, {}}; }

Gate Gate::ry(int target, double theta) { return Gate{GateKind::RotY, {target}, {}, theta, {}}; }

Gate Gate::rz(int target, double phi) { return Gate{GateKind::RotZ, {target}, {}, phi, {}}; }

Gate Gate::crz(std::vector<int> controls, int target, double phi) {
  if (controls.empty()) throw std::invalid_argument("CRotZ needs at least one control");
  return Gate{GateKind::ControlledRotZ, {target}, std::move(controls), phi, {}};
}

Gate Gate::cnot(int control, int target) {
  return Gate{GateKind::ControlledNot, {target}, {control}, 0.0, {}};
}

Gate Gate::dense(std::vector<int> targets, Eigen::MatrixXcd unitary) {
  const auto dim = Eigen::Index{1} << targets.size();
  if (targets.empty() || unitary.rows() != dim || unitary.cols() != dim) {
    throw std::invalid_argument("dense gate matrix must be 2^k x 2^k for k targets");
  }
  const Eigen::MatrixXcd defect =
      unitary.adjoint() * unitary - Eigen::MatrixXcd::Identity(dim, dim);
  if (defect.cwiseAbs().maxCoeff() >= kUnitarityTol) {
    throw std::invalid_argument("dense gate matrix is not unitary");
  }
  return Gate{GateKind::DenseUnitary, std::move(targets), {}, 0.0, std::move(unitary)};
}

Eigen::MatrixXcd gate_matrix(const Gate& gate) {
  using namespace std::complex_literals;
  Eigen::MatrixXcd m(2, 2);
  const double half = gate.angle / 2.0;
  switch (gate.kind) {
    case GateKind::PauliX:
    case GateKind::ControlledNot:
      m << 0.0, 1.0, 1.0, 0.0;
      return m;
    case GateKind::RotY:
      m << std::cos(half), -std::sin(half), std::sin(half), std::cos(half);
      return m;
    case GateKind::RotZ:
    case GateKind::ControlledRotZ:
      m << std::exp(-1i * half), 0.0, 0.0, std::exp(1i * half);
      return m;
    case GateKind::DenseUnitary:
      return gate.matrix;
  }
  throw std::logic_error("unknown gate kind");
}

void validate_gate(const Gate& gate, int num_qubits) {
  std::uint64_t seen = 0;
  auto claim = [&](int q) {
    if (q < 0 || q >= num_qubits) {
      throw std::out_of_range("qubit index " + std::to_string(q) + " outside register of " +
                              std::to_string(num_qubits));
    }
    const std::uint64_t bit = std::uint64_t{1} << q;
    if (seen & bit) {
      throw std::out_of_range("qubit " + std::to_string(q) + " used twice in one gate");
    }
    seen |= bit;
  };
  if (gate.targets.empty()) throw std::out_of_range("gate has no target");
  for (int q : gate.targets) claim(q);
  for (int q : gate.controls) claim(q);
  if (gate.kind != GateKind::DenseUnitary && gate.targets.size() != 1) {
    throw std::out_of_range("single-qubit gate kind with several targets");
  }
}

StateVector apply_gate(const StateVector& state, const Gate& gate) {
  validate_gate(gate, state.num_qubits());
  const Eigen::MatrixXcd local = gate_matrix(gate);

  std::size_t control_mask = 0;
  for (int q : gate.controls) control_mask |= std::size_t{1} << q;
  std::size_t target_mask = 0;
  for (int q : gate.targets) target_mask |= std::size_t{1} << q;

  const std::size_t local_dim = std::size_t{1} << gate.targets.size();
  std::vector<std::size_t> offsets(local_dim, 0);
  for (std::size_t j = 0; j < local_dim; ++j) {
    for (std::size_t b = 0; b < gate.targets.size(); ++b) {
      if (j & (std::size_t{1} << b)) offsets[j] |= std::size_t{1} << gate.targets[b];
    }
  }

  StateVector out = state;
  std::vector<Amplitude> gathered(local_dim);
  for (std::size_t base = 0; base < state.dimension(); ++base) {
    if ((base & target_mask) != 0) continue;
    if ((base & control_mask) != control_mask) continue;
    for (std::size_t j = 0; j < local_dim; ++j) gathered[j] = state.amplitudes_[base | offsets[j]];
    for (std::size_t r = 0; r < local_dim; ++r) {
      Amplitude acc{0.0, 0.0};
      for (std::size_t c = 0; c < local_dim; ++c) {
        acc += local(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * gathered[c];
      }
      out.amplitudes_[base | offsets[r]] = acc;
    }
  }
  return out;
}

Eigen::MatrixXcd embedded_unitary(const Gate& gate, int num_qubits) {
  const auto dim = Eigen::Index{1} << num_qubits;
  Eigen::MatrixXcd u(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const StateVector image =
        apply_gate(StateVector::basis_state(num_qubits, static_cast<std::size_t>(col)), gate);
    for (Eigen::Index row = 0; row < dim; ++row) u(row, col) = image[static_cast<std::size_t>(row)];
  }
  return u;
}

QuantumCircuit::QuantumCircuit(int num_qubits) : num_qubits_(num_qubits) {
  check_qubit_count(num_qubits);
}

QuantumCircuit& QuantumCircuit::append(Gate gate) {
  validate_gate(gate, num_qubits_);
  gates_.push_back(std::move(gate));
  return *this;
}

QuantumCircuit& QuantumCircuit::append(const QuantumCircuit& other) {
  if (other.num_qubits_ != num_qubits_) {
    throw std::invalid_argument("cannot concatenate circuits of different widths");
  }
  gates_.insert(gates_.end(), other.gates_.begin(), other.gates_.end());
  return *this;
}

StateVector run_circuit(const QuantumCircuit& circuit, StateVector initial) {
  if (initial.num_qubits() != circuit.num_qubits()) {
    throw std::invalid_argument("state and circuit widths differ");
  }
  for (const Gate& g : circuit.gates()) initial = apply_gate(initial, g);
  if (std::abs(initial.norm_squared() - 1.0) > kNormTol) {
    throw NumericalError("norm drift after circuit execution");
  }
  return initial;
}

std::vector<double> site_probabilities(const StateVector& state,
                                       std::span<const int> system_qubits) {
  if (system_qubits.empty()) throw std::invalid_argument("empty system qubit set");
  std::size_t mask = 0;
  for (int q : system_qubits) {
    if (q < 0 || q >= state.num_qubits()) throw std::out_of_range("system qubit outside register");
    if (mask & (std::size_t{1} << q)) throw std::invalid_argument("duplicate system qubit");
    mask |= std::size_t{1} << q;
  }
  std::vector<double> probs(std::size_t{1} << system_qubits.size(), 0.0);
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    std::size_t outcome = 0;
    for (std::size_t k = 0; k < system_qubits.size(); ++k) {
      if (i & (std::size_t{1} << system_qubits[k])) outcome |= std::size_t{1} << k;
    }
    probs[outcome] += std::norm(state[i]);
  }
  return probs;
}

std::vector<std::uint64_t> sample_shots(std::span<const double> probabilities,
                                        std::uint64_t shots, std::uint64_t rng_seed) {
  if (probabilities.empty()) throw std::invalid_argument("empty distribution");
  if (shots < 1) throw std::invalid_argument("shots must be >= 1");
  double total = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) throw std::invalid_argument("negative or non-finite probability");
    total += p;
  }
  if (std::abs(total - 1.0) > kNormTol) {
    throw std::invalid_argument("probabilities do not sum to 1");
  }

  // Sequential conditional binomials give an exact multinomial draw.
  std::mt19937_64 rng(rng_seed);
  std::vector<std::uint64_t> counts(probabilities.size(), 0);
  std::uint64_t remaining = shots;
  double mass_left = 1.0;
  for (std::size_t i = 0; i + 1 < probabilities.size() && remaining > 0; ++i) {
    const double p = mass_left > 0.0 ? std::clamp(probabilities[i] / mass_left, 0.0, 1.0) : 0.0;
    std::binomial_distribution<std::uint64_t> draw(remaining, p);
    counts[i] = draw(rng);
    remaining -= counts[i];
    mass_left -= probabilities[i];
  }
  counts.back() += remaining;
  return counts;
}

}  // namespace eet::qcore
