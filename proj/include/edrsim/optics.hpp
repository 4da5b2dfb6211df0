#pragma once

// Imperfect polarizing beamsplitters. A PBS with reflection extinction
// ratio e_r and transmission extinction ratio e_t sends a fraction 1/e_r of
// H into the reflected port and 1/e_t of V into the transmitted port. Inside
// a stage the PBS plays the CNOT (path flips for V, stays for H), so a leak
// is a misrouted path. Leaked light is modeled as distinguishable from the
// main beam: a leak flag qubit (the stage's environment) is rotated to
// sqrt(T)|0> + sqrt(R)|1> per polarization and flips the path when set.
// Leaked amplitudes carry no relative phase.

#include "edrsim/circuit.hpp"
#include "edrsim/qcore.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace edrsim {

struct PbsSpec {
  double e_r = std::numeric_limits<double>::infinity();
  double e_t = std::numeric_limits<double>::infinity();

  PbsSpec() = default;
  PbsSpec(double reflection_ratio, double transmission_ratio)
      : e_r(reflection_ratio), e_t(transmission_ratio) {
    if (!(e_r > 1.0) || !(e_t > 1.0) || std::isnan(e_r) || std::isnan(e_t)) {
      throw std::invalid_argument("PbsSpec: extinction ratios must exceed 1, got e_r=" +
                                  std::to_string(e_r) + " e_t=" + std::to_string(e_t));
    }
  }

  static PbsSpec ideal() { return {}; }
  bool is_ideal() const { return std::isinf(e_r) && std::isinf(e_t); }

  friend bool operator==(const PbsSpec&, const PbsSpec&) = default;
};

/// Intensity splitting per polarization; each pair sums to 1.
struct PbsCoefficients {
  double t_h;
  double r_h;
  double t_v;
  double r_v;
};

inline PbsCoefficients pbs_coefficients(const PbsSpec& spec) {
  const double leak_h = 1.0 / spec.e_r;
  const double leak_v = 1.0 / spec.e_t;
  return {1.0 - leak_h, leak_h, leak_v, 1.0 - leak_v};
}

/// Imperfect CNOT on signal ⊗ path ⊗ leak flag.
inline LinearOperator pbs_cnot(const PbsSpec& spec) {
  const PbsCoefficients k = pbs_coefficients(spec);
  auto rotation = [](double leak) {
    const double a = std::sqrt(1.0 - leak), b = std::sqrt(leak);
    Matrix r(2, 2);
    r << a, -b, b, a;
    return r;
  };
  Matrix leak_flag = Matrix::Zero(4, 4);
  leak_flag.block(0, 0, 2, 2) = rotation(k.r_h);
  leak_flag.block(2, 2, 2, 2) = rotation(k.t_v);
  const LinearOperator u = embed(cnot(), 3, {2, 1}) * embed(LinearOperator(leak_flag), 3, {0, 2}) *
                           embed(cnot(), 3, {0, 1});
  return LinearOperator::unitary(u.entries());
}

/// Stage whose CNOT is an imperfect PBS. With infinite extinction ratios the
/// leak flag never sets and this is make_stage.
inline MeasurementStage imperfect_stage(double theta, Basis basis, const PbsSpec& spec) {
  const LinearOperator u_z = LinearOperator::unitary(
      (pbs_cnot(spec) * tensor(tensor(pauli_i(), s_gate(theta)), pauli_i())).entries());
  return MeasurementStage::from_dilation(theta, basis,
                                         basis == Basis::kZ ? u_z : to_x_basis(u_z));
}

struct ApparatusSpec {
  PbsSpec wp_pbs;
  PbsSpec ma_pbs;
  PbsSpec post_pbs;

  static ApparatusSpec ideal() { return {}; }
  /// e_r ≈ 100 for WP and post, 50 for MA, e_t = 1000 throughout.
  static ApparatusSpec reference_setup() {
    return {PbsSpec(100.0, 1000.0), PbsSpec(50.0, 1000.0), PbsSpec(100.0, 1000.0)};
  }

  friend bool operator==(const ApparatusSpec&, const ApparatusSpec&) = default;
};

inline ChainConfig imperfect_chain(const StateVector& signal, double wp_strength, Basis wp_basis,
                                   double ma_theta, const ApparatusSpec& apparatus) {
  return ChainConfig(signal,
                     imperfect_stage(theta_from_strength(wp_strength), wp_basis, apparatus.wp_pbs),
                     imperfect_stage(ma_theta, Basis::kZ, apparatus.ma_pbs),
                     imperfect_stage(0.0, Basis::kX, apparatus.post_pbs));
}

inline JointTable3 imperfect_chain_distribution(const StateVector& signal, double wp_strength,
                                                Basis wp_basis, double ma_theta,
                                                const ApparatusSpec& apparatus) {
  return chain_distribution(imperfect_chain(signal, wp_strength, wp_basis, ma_theta, apparatus));
}

}  // namespace edrsim
