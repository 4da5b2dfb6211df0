#include "edrsim/optics.hpp"

#include "edrsim/edr.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace edrsim {
namespace {

using testing::kPi;
using testing::rng_for;
using testing::uniform;
using testing::y_plus;

const PbsSpec kNearIdeal(1e12, 1e12);

double max_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

double weak_probe_eps(const StateVector& psi, double gw, double th, const ApparatusSpec& a) {
  return weak_probe_error(
      marginal_joint(imperfect_chain_distribution(psi, gw, Basis::kZ, th, a), OutcomePair::kWpMa), gw);
}

double weak_probe_eta(const StateVector& psi, double gw, double th, const ApparatusSpec& a) {
  return weak_probe_disturbance(
      marginal_joint(imperfect_chain_distribution(psi, gw, Basis::kX, th, a), OutcomePair::kWpPost), gw);
}

TEST(PbsSpec, RejectsRatiosAtOrBelowOne) {
  EXPECT_THROW(PbsSpec(1.0, 1000.0), std::invalid_argument);
  EXPECT_THROW(PbsSpec(100.0, 0.5), std::invalid_argument);
  EXPECT_THROW(PbsSpec(std::nan(""), 10.0), std::invalid_argument);
  EXPECT_TRUE(PbsSpec::ideal().is_ideal());
  EXPECT_FALSE(PbsSpec(100.0, 1000.0).is_ideal());
}

TEST(PbsCoefficients, Values) {
  const PbsCoefficients ideal = pbs_coefficients(kNearIdeal);
  EXPECT_NEAR(ideal.t_h, 1.0, 1e-12);
  EXPECT_NEAR(ideal.r_h, 0.0, 1e-12);
  EXPECT_NEAR(ideal.t_v, 0.0, 1e-12);
  EXPECT_NEAR(ideal.r_v, 1.0, 1e-12);
  const PbsCoefficients wp = pbs_coefficients(PbsSpec(100, 1000));
  EXPECT_NEAR(wp.t_h, 0.99, 1e-15);
  EXPECT_NEAR(wp.r_h, 0.01, 1e-15);
  EXPECT_NEAR(wp.t_v, 0.001, 1e-15);
  EXPECT_NEAR(wp.r_v, 0.999, 1e-15);
  const PbsCoefficients ma = pbs_coefficients(PbsSpec(50, 1000));
  EXPECT_NEAR(ma.t_h, 0.98, 1e-15);
  EXPECT_NEAR(ma.r_h, 0.02, 1e-15);
  EXPECT_NEAR(ma.t_v, 0.001, 1e-15);
  EXPECT_NEAR(ma.r_v, 0.999, 1e-15);
}

TEST(PbsCnot, IsUnitaryAndIdealAtInfinity) {
  EXPECT_TRUE(pbs_cnot(PbsSpec(50, 1000)).is_unitary(1e-12));
  // The leak flag always starts in |0>, so only even columns matter.
  const Matrix u = pbs_cnot(PbsSpec::ideal()).entries();
  const Matrix ref = tensor(cnot(), pauli_i()).entries();
  for (int c = 0; c < 8; c += 2) EXPECT_LT((u.col(c) - ref.col(c)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ImperfectStage, IdealLimitPovm) {
  for (const PbsSpec& spec : {PbsSpec::ideal(), kNearIdeal}) {
    for (double th : {0.0, kPi / 8, kPi / 6, kPi / 4}) {
      for (Basis b : {Basis::kZ, Basis::kX}) {
        const MeasurementStage ideal = make_stage(th, b);
        const MeasurementStage st = imperfect_stage(th, b, spec);
        for (int o = 0; o < 2; ++o) {
          EXPECT_LT(max_diff(st.povm()[o].op.entries(), ideal.povm()[o].op.entries()), 1e-10);
        }
      }
    }
  }
}

TEST(ImperfectStage, ProjectionLeaksAtZeroTheta) {
  const MeasurementStage st = imperfect_stage(0.0, Basis::kZ, PbsSpec(50, 1000));
  const Matrix& e_plus = st.povm()[0].op.entries();
  EXPECT_GT(e_plus(1, 1).real(), 0.0);
  // H keeps its path with T_H, V is misrouted into the +1 port with T_V.
  EXPECT_NEAR(e_plus(0, 0).real(), 0.98, 1e-12);
  EXPECT_NEAR(e_plus(1, 1).real(), 0.001, 1e-12);
  EXPECT_NEAR(std::abs(e_plus(0, 1)), 0.0, 1e-12);
}

TEST(ImperfectStage, KrausOperatorsReproducePovm) {
  auto rng = rng_for(40);
  for (int t = 0; t < 50; ++t) {
    const PbsSpec spec(uniform(rng, 2, 200), uniform(rng, 2, 2000));
    const MeasurementStage st = imperfect_stage(uniform(rng, 0, kPi / 4), t % 2 ? Basis::kX : Basis::kZ, spec);
    EXPECT_EQ(st.environment_qubits(), 1u);
    for (int o = 0; o < 2; ++o) {
      Matrix kk = Matrix::Zero(2, 2);
      for (const auto& k : st.outcome_kraus(o)) kk += k.entries().adjoint() * k.entries();
      EXPECT_LT(max_diff(kk, st.povm()[o].op.entries()), 1e-10);
    }
  }
}

TEST(ImperfectChain, IdealLimitMatchesCircuit) {
  const ApparatusSpec ideal = ApparatusSpec::ideal();
  const JointTable3 a = imperfect_chain_distribution(y_plus(), 0.104, Basis::kZ, kPi / 6, ideal);
  const JointTable3 b = chain_distribution(ideal_chain(y_plus(), 0.104, Basis::kZ, kPi / 6));
  for (int c = 0; c < 8; ++c) EXPECT_NEAR(a.entries()[c], b.entries()[c], 1e-10);
}

TEST(ImperfectChain, ReferenceSetupIsNormalized) {
  const JointTable3 t = imperfect_chain_distribution(y_plus(), 0.104, Basis::kZ, kPi / 6,
                                                     ApparatusSpec::reference_setup());
  double sum = 0.0;
  for (double v : t.entries()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    sum += v;
  }
  EXPECT_NEAR(sum, 1.0, 1e-10);
}

TEST(ImperfectChain, EndpointsLiftOffZero) {
  const ApparatusSpec ref = ApparatusSpec::reference_setup();
  EXPECT_GT(weak_probe_eps(y_plus(), 0.104, 0.0, ref), 0.0);
  EXPECT_GT(weak_probe_eta(y_plus(), 0.104, kPi / 4, ref), 0.0);
  EXPECT_GT(direct_error(imperfect_stage(0.0, Basis::kZ, ref.ma_pbs), y_plus()), 0.0);
}

TEST(ImperfectChain, DilatedRegisterMatchesKrausUpdates) {
  auto rng = rng_for(41);
  for (int t = 0; t < 20; ++t) {
    const StateVector psi = random_state(rng, 2);
    const ChainConfig cfg = imperfect_chain(psi, uniform(rng, 0.05, 1), t % 2 ? Basis::kX : Basis::kZ,
                                            uniform(rng, 0, kPi / 4), ApparatusSpec::reference_setup());
    const JointTable3 a = chain_distribution(cfg);
    const JointTable3 b = chain_distribution_dilated(cfg);
    for (int c = 0; c < 8; ++c) EXPECT_NEAR(a.entries()[c], b.entries()[c], 1e-12);
  }
}

// Properties.

TEST(OpticsProperty, LosslessPerPolarization) {
  auto rng = rng_for(42);
  for (int t = 0; t < 1000; ++t) {
    const double e_r = std::exp(uniform(rng, 0.01, 30));
    const double e_t = std::exp(uniform(rng, 0.01, 30));
    const PbsCoefficients k = pbs_coefficients(PbsSpec(e_r, e_t));
    EXPECT_NEAR(k.t_h + k.r_h, 1.0, 1e-15);
    EXPECT_NEAR(k.t_v + k.r_v, 1.0, 1e-15);
    // Port contrast tracks the extinction ratios to relative order 1/e.
    EXPECT_LE(std::abs(k.t_h / k.t_v - e_t) / e_t, 1.0 / e_r + 1e-12);
    EXPECT_LE(std::abs(k.r_v / k.r_h - e_r) / e_r, 1.0 / e_t + 1e-12);
  }
}

TEST(OpticsProperty, LowerExtinctionNeverImprovesProjectiveError) {
  double previous = -1.0;
  for (double e_r : {50.0, 40.0, 30.0, 20.0, 15.0, 10.0}) {
    const ApparatusSpec a{PbsSpec(100, 1000), PbsSpec(e_r, 1000), PbsSpec(100, 1000)};
    const double eps = weak_probe_eps(y_plus(), 0.104, 0.0, a);
    EXPECT_GE(eps, previous) << "e_r = " << e_r;
    previous = eps;
  }
}

TEST(OpticsProperty, IdealLimitRegression) {
  auto rng = rng_for(43);
  const ApparatusSpec near{kNearIdeal, kNearIdeal, kNearIdeal};
  for (int t = 0; t < 50; ++t) {
    const StateVector psi = random_state(rng, 2);
    const double gw = uniform(rng, 0.05, 1);
    const double th = uniform(rng, 0, kPi / 4);
    for (Basis b : {Basis::kZ, Basis::kX}) {
      const JointTable3 a = imperfect_chain_distribution(psi, gw, b, th, near);
      const JointTable3 ref = chain_distribution(ideal_chain(psi, gw, b, th));
      for (int c = 0; c < 8; ++c) EXPECT_NEAR(a.entries()[c], ref.entries()[c], 1e-8);
    }
    const MeasurementStage ma = imperfect_stage(th, Basis::kZ, kNearIdeal);
    EXPECT_NEAR(direct_error(ma, psi), std::sqrt(2 * (1 - std::cos(2 * th))), 1e-8);
    EXPECT_NEAR(direct_disturbance(ma, psi), std::sqrt(2 * (1 - std::sin(2 * th))), 1e-8);
  }
}

TEST(OpticsProperty, RelationsHoldAcrossReferenceSweep) {
  const ApparatusSpec ref = ApparatusSpec::reference_setup();
  const DensityMatrix rho_in = state_entering_ma(y_plus(), imperfect_stage(0.5 * std::acos(0.104), Basis::kZ,
                                                                           ref.wp_pbs));
  for (int g = 0; g <= 20; ++g) {
    const double th = 0.5 * std::acos(g / 20.0);
    EdrPoint p;
    p.eps = weak_probe_eps(y_plus(), 0.104, th, ref);
    p.eta = weak_probe_eta(y_plus(), 0.104, th, ref);
    p.sigma_a = std_dev(pauli_z(), rho_in);
    p.sigma_b = std_dev(pauli_x(), rho_in);
    p.c_bound = commutator_bound(pauli_z(), pauli_x(), rho_in);
    const EdrReport r = edr_report(p);
    EXPECT_GE(r.lhs_ozawa, p.c_bound - 1e-9) << "strength " << g / 20.0;
    EXPECT_GE(r.lhs_branciard, p.c_bound - 1e-9) << "strength " << g / 20.0;
  }
}

}  // namespace
}  // namespace edrsim
