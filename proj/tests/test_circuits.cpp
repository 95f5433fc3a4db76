#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "eet/circuits.hpp"
#include "support.hpp"

namespace eet::circuits {
namespace {

using model::SystemHamiltonian;
using qcore::GateKind;

std::vector<double> populations(const qcore::QuantumCircuit& c, const SystemHamiltonian& h) {
  return qcore::site_probabilities(qcore::run_circuit(c, initial_state(h)), system_qubits(h));
}

std::vector<double> populations_after(const std::vector<qcore::QuantumCircuit>& seq,
                                      const SystemHamiltonian& h) {
  auto s = initial_state(h);
  for (const auto& c : seq) s = qcore::run_circuit(c, std::move(s));
  return qcore::site_probabilities(s, system_qubits(h));
}

double ancilla_zero_population(const qcore::StateVector& s, int ancilla) {
  double p = 0.0;
  for (std::size_t i = 0; i < s.dimension(); ++i) {
    if (((i >> ancilla) & 1) == 0) p += std::norm(s[i]);
  }
  return p;
}

TEST(CoherentCircuit, StructureMatchesConstruction) {
  const auto h = SystemHamiltonian::near_resonant();
  const auto c = build_coherent_circuit(h, 50.0);
  ASSERT_EQ(c.size(), 6u);
  const GateKind expected[] = {GateKind::RotY,           GateKind::PauliX,
                               GateKind::ControlledRotZ, GateKind::PauliX,
                               GateKind::ControlledRotZ, GateKind::RotY};
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(c.gates()[i].kind, expected[i]);
  EXPECT_DOUBLE_EQ(c.gates()[0].angle, model::mixing_angle(h));
  EXPECT_DOUBLE_EQ(c.gates()[5].angle, -model::mixing_angle(h));
  // Angles -2 E'_m k t with E'_m = +-Omega/2.
  const double omega = model::beating_frequency(h);
  EXPECT_NEAR(c.gates()[2].angle, -omega * model::kPhasePerWavenumberFs * 50.0, 1e-12);
  EXPECT_NEAR(c.gates()[4].angle, omega * model::kPhasePerWavenumberFs * 50.0, 1e-12);
  EXPECT_EQ(c.gates()[2].targets, std::vector<int>{1});
  EXPECT_EQ(c.gates()[2].controls, std::vector<int>{0});
}

TEST(CoherentCircuit, ZeroTimeIsIdentityOnPopulations) {
  const auto p = populations(build_coherent_circuit(SystemHamiltonian::near_resonant(), 0.0),
                             SystemHamiltonian::near_resonant());
  EXPECT_NEAR(p[0], 1.0, 1e-15);
  EXPECT_NEAR(p[1], 0.0, 1e-15);
  EXPECT_THROW(build_coherent_circuit(SystemHamiltonian::near_resonant(), -1.0),
               std::invalid_argument);
}

TEST(CoherentCircuit, MatchesClosedFormOnGrid) {
  for (const auto& h : {SystemHamiltonian::near_resonant(), SystemHamiltonian::non_resonant(),
                        SystemHamiltonian::two_site(12900, 12900, 126),
                        SystemHamiltonian::two_site(12000, 12500, -80)}) {
    double worst = 0.0;
    for (int i = 0; i <= 30; ++i) {
      const double t = 10.0 * i;
      const auto p = populations(build_coherent_circuit(h, t), h);
      const auto ref = model::analytic_populations(h, t);
      worst = std::max({worst, std::abs(p[0] - ref.p0), std::abs(p[1] - ref.p1)});
    }
    EXPECT_LT(worst, 1e-9);
  }
}

TEST(CoherentCircuit, NearResonantValues) {
  const auto h = SystemHamiltonian::near_resonant();
  auto p = populations(build_coherent_circuit(h, 61.5), h);
  EXPECT_NEAR(p[0], 0.136, 1e-3);
  EXPECT_NEAR(p[1], 0.864, 1e-3);
  EXPECT_NEAR(p[1], model::analytic_populations(h, 61.5).p1, 1e-6);
  p = populations(build_coherent_circuit(h, model::beating_period(h)), h);
  EXPECT_NEAR(p[0], 1.0, 1e-6);
  p = populations(build_coherent_circuit(h, 123.03), h);
  EXPECT_NEAR(p[0], 1.0, 1e-6);
}

TEST(CoherentCircuit, AngleLinearity) {
  const auto h = SystemHamiltonian::non_resonant();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> t(0.0, 150.0);
  for (int i = 0; i < 50; ++i) {
    const double t1 = t(rng), t2 = t(rng);
    const auto joint = populations(build_coherent_circuit(h, t1 + t2), h);
    const auto split =
        populations_after({build_coherent_circuit(h, t1), build_coherent_circuit(h, t2)}, h);
    EXPECT_LT(testing::max_abs_diff(joint, split), 1e-12);
  }
}

TEST(CoherentCircuit, LargerChainMatchesDenseExponential) {
  std::mt19937_64 rng(77);
  for (int n : {4, 8}) {
    Eigen::MatrixXd m = testing::random_symmetric(rng, n, 150.0);
    m.diagonal().array() += 12500.0;
    const auto h = SystemHamiltonian::from_matrix(m);
    for (double t : {0.0, 17.0, 85.5, 240.0}) {
      const auto c = build_coherent_circuit(h, t);
      const auto p = populations(c, h);
      EXPECT_LT(testing::max_abs_diff(p, testing::dense_populations(m, t)), 1e-9) << n << " " << t;
      EXPECT_EQ(gate_count(c)[GateKind::DenseUnitary], 2u);
    }
  }
}

TEST(IterationCircuit, GateTally) {
  const auto h = SystemHamiltonian::near_resonant();
  const std::vector<double> signs{0.5, -0.5}, g{300, 300};
  const auto tally = gate_count(build_iteration_circuit(h, 2.0, signs, g));
  EXPECT_EQ(tally[GateKind::PauliX], 4u);
  EXPECT_EQ(tally[GateKind::ControlledRotZ], 4u);
  EXPECT_EQ(tally[GateKind::RotY], 2u);
  EXPECT_EQ(tally.total(), 10u);
  EXPECT_EQ(tally_to_json(tally), (nlohmann::json{{"CRotZ", 4}, {"RotY", 2}, {"X", 4}}));

  auto doubled = tally;
  doubled += tally;
  qcore::QuantumCircuit two(2);
  two.append(build_iteration_circuit(h, 2.0, signs, g)).append(build_iteration_circuit(h, 2.0, signs, g));
  EXPECT_EQ(gate_count(two), doubled);
  EXPECT_EQ(gate_count(qcore::QuantumCircuit(2)).total(), 0u);
}

TEST(IterationCircuit, FluctuatorAngles) {
  const auto h = SystemHamiltonian::near_resonant();
  const auto c = build_iteration_circuit(h, 2.0, std::vector<double>{0.5, -0.5},
                                         std::vector<double>{300, 100});
  const double k = model::kPhasePerWavenumberFs;
  EXPECT_NEAR(c.gates()[7].angle, -2 * 0.5 * 300 * k * 2.0, 1e-15);
  EXPECT_NEAR(c.gates()[9].angle, -2 * -0.5 * 100 * k * 2.0, 1e-15);
}

TEST(IterationCircuit, RejectsBadArguments) {
  const auto h = SystemHamiltonian::near_resonant();
  const std::vector<double> g{300, 300};
  EXPECT_THROW(build_iteration_circuit(h, 2.0, std::vector<double>{0.5, 1.0}, g),
               std::invalid_argument);
  EXPECT_THROW(build_iteration_circuit(h, 0.0, std::vector<double>{0.5, 0.5}, g),
               std::invalid_argument);
  EXPECT_THROW(build_iteration_circuit(h, 2.0, std::vector<double>{0.5}, g), std::invalid_argument);
}

TEST(IterationCircuit, NoiseFreeReduction) {
  const auto h = SystemHamiltonian::near_resonant();
  const std::vector<double> zero{0, 0};
  for (const auto& signs : {std::vector<double>{0.5, 0.5}, std::vector<double>{0.5, -0.5}}) {
    const auto p = populations(build_iteration_circuit(h, 2.0, signs, zero), h);
    EXPECT_LT(testing::max_abs_diff(p, populations(build_coherent_circuit(h, 2.0), h)), 1e-12);
  }
  // N_i noise-free iterations compose to one coherent circuit at N_i dt.
  std::vector<qcore::QuantumCircuit> steps(150,
                                           build_iteration_circuit(h, 2.0, std::vector<double>{0.5, -0.5}, zero));
  EXPECT_LT(testing::max_abs_diff(populations_after(steps, h),
                                  populations(build_coherent_circuit(h, 300.0), h)),
            1e-9);
}

TEST(IterationCircuit, SingleStepAgainstDenseExponential) {
  const auto h = SystemHamiltonian::near_resonant();
  const std::vector<double> g{300, 300};
  for (const auto& signs : {std::vector<double>{0.5, -0.5}, std::vector<double>{-0.5, 0.5},
                            std::vector<double>{0.5, 0.5}}) {
    Eigen::MatrixXd full = h.matrix();
    full(0, 0) += g[0] * signs[0];
    full(1, 1) += g[1] * signs[1];
    const auto p = populations(build_iteration_circuit(h, 2.0, signs, g), h);
    EXPECT_LT(testing::max_abs_diff(p, testing::dense_populations(full, 2.0)), 1e-3);
  }
}

TEST(IterationCircuit, AncillaStaysInOne) {
  const auto h = SystemHamiltonian::non_resonant();
  std::mt19937_64 rng(4);
  std::bernoulli_distribution coin(0.5);
  auto s = initial_state(h);
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> signs{coin(rng) ? 0.5 : -0.5, coin(rng) ? 0.5 : -0.5};
    s = qcore::run_circuit(build_iteration_circuit(h, 2.0, signs, std::vector<double>{700, 700}),
                           std::move(s));
    ASSERT_LT(ancilla_zero_population(s, ancilla_qubit(h)), 1e-12);
  }
}

TEST(IterationCircuit, MultipleFluctuatorsPerSite) {
  const auto h = SystemHamiltonian::near_resonant();
  // Two fluctuators per site; opposing signs on site 0 cancel.
  const std::vector<double> signs{0.5, -0.5, 0.5, 0.5}, g{200, 200};
  const auto c = build_iteration_circuit(h, 2.0, signs, g);
  EXPECT_EQ(gate_count(c)[GateKind::ControlledRotZ], 2u + 4u);
  Eigen::MatrixXd full = h.matrix();
  full(1, 1) += 200.0;
  EXPECT_LT(testing::max_abs_diff(populations(c, h), testing::dense_populations(full, 2.0)), 1e-3);
}

TEST(CircuitJson, RecordsKindsAndAngles) {
  const auto c = build_coherent_circuit(SystemHamiltonian::near_resonant(), 10.0);
  const auto j = circuit_to_json(c);
  ASSERT_EQ(j.size(), 6u);
  EXPECT_EQ(j[0]["kind"], "RotY");
  EXPECT_EQ(j[2]["kind"], "CRotZ");
  EXPECT_EQ(j[2]["controls"], nlohmann::json::array({0}));
  EXPECT_DOUBLE_EQ(j[2]["angle"].get<double>(), c.gates()[2].angle);

  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(4, 4) * 100.0;
  m(0, 1) = m(1, 0) = 10.0;
  const auto dense = circuit_to_json(build_coherent_circuit(SystemHamiltonian::from_matrix(m), 1.0));
  EXPECT_EQ(dense[0]["kind"], "Dense");
  EXPECT_EQ(dense[0]["matrix"].size(), 4u);
}

}  // namespace
}  // namespace eet::circuits
