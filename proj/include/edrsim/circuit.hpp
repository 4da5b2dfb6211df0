#pragma once

// The weak-probe measurement chain: weak probe (WP), measurement apparatus
// (MA) and projective X post-measurement. An ideal stage is the signal ⊗
// probe interaction U = CNOT · (I ⊗ S(θ)) with the probe prepared in |0>;
// the probe's Z outcome is the meter reading.

#include "edrsim/qcore.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace edrsim {

enum class Basis { kZ, kX };

inline const char* to_string(Basis b) { return b == Basis::kZ ? "Z" : "X"; }

/// Meter value for outcome index 0 or 1.
constexpr int meter_value(int index) { return index == 0 ? +1 : -1; }

inline constexpr double kQuarterPi = std::numbers::pi / 4.0;

inline void check_theta(double theta) {
  if (!(theta >= -kConstructTol && theta <= kQuarterPi + kConstructTol)) {
    throw std::invalid_argument("theta must lie in [0, pi/4], got " + std::to_string(theta));
  }
}

/// θ such that cos 2θ equals the requested measurement strength.
inline double theta_from_strength(double strength) {
  if (!(strength >= 0.0 && strength <= 1.0)) {
    throw std::invalid_argument("measurement strength must lie in [0, 1], got " +
                                std::to_string(strength));
  }
  return 0.5 * std::acos(strength);
}

/// Probe rotation S(θ) = [[cos θ, sin θ], [sin θ, -cos θ]].
inline LinearOperator s_gate(double theta) {
  check_theta(theta);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Matrix m(2, 2);
  m << c, s, s, -c;
  return LinearOperator::unitary(m);
}

/// A two-outcome instrument on the signal qubit together with the unitary
/// that realizes it on signal ⊗ probe ⊗ environment. The probe and any
/// environment qubits start in |0>; the probe's Z reading is the outcome.
/// Ideal stages have no environment and exactly one Kraus operator per
/// outcome.
class MeasurementStage {
 public:
  static MeasurementStage from_dilation(double theta, Basis basis, LinearOperator interaction) {
    check_theta(theta);
    const Eigen::Index dim = interaction.dim();
    if (dim < 4 || !detail::is_power_of_two(dim) || !interaction.is_unitary(kConstructTol)) {
      throw std::invalid_argument(
          "MeasurementStage: interaction must be a unitary on signal ⊗ probe ⊗ environment");
    }
    const Eigen::Index env_dim = dim / 4;
    std::array<std::vector<LinearOperator>, 2> by_outcome;
    std::vector<LinearOperator> all;
    std::vector<PovmElement> povm;
    for (int p = 0; p < 2; ++p) {
      Matrix e = Matrix::Zero(2, 2);
      for (Eigen::Index env = 0; env < env_dim; ++env) {
        // K_{p,env}(s', s) = <s' p env| U |s 0 0>
        Matrix k(2, 2);
        for (int so = 0; so < 2; ++so)
          for (int si = 0; si < 2; ++si)
            k(so, si) = interaction((2 * so + p) * env_dim + env, 2 * si * env_dim);
        if (env_dim > 1 && k.cwiseAbs().maxCoeff() == 0.0) continue;
        e += k.adjoint() * k;
        by_outcome[p].emplace_back(k);
        all.emplace_back(k);
      }
      e = (e + e.adjoint()) / 2.0;
      povm.push_back({meter_value(p), LinearOperator::hermitian(e)});
    }
    return MeasurementStage(theta, basis, std::move(interaction), std::move(by_outcome),
                            KrausChannel(std::move(all)), PovmSet(std::move(povm)));
  }

  double theta() const { return theta_; }
  Basis basis() const { return basis_; }
  /// cos 2θ: 0 is no measurement, 1 is projective.
  double strength() const { return std::cos(2.0 * theta_); }
  const LinearOperator& interaction() const { return interaction_; }
  /// Qubits in the interaction register besides signal and probe.
  std::size_t environment_qubits() const { return detail::qubit_count(interaction_.dim() / 4); }
  /// Kraus operators for one outcome index (0 ↔ +1).
  const std::vector<LinearOperator>& outcome_kraus(int index) const { return outcome_kraus_[index]; }
  /// All Kraus operators; the non-selective channel.
  const KrausChannel& kraus() const { return kraus_; }
  const PovmSet& povm() const { return povm_; }

  /// Unnormalized post-measurement state for one outcome.
  Matrix update(const Matrix& rho, int index) const {
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    for (const auto& k : outcome_kraus_[index]) out += k.entries() * rho * k.entries().adjoint();
    return out;
  }

  /// Mean meter reading Σ z Tr(E_z ρ).
  double mean_meter(const DensityMatrix& rho) const {
    const auto p = povm_probabilities(povm_, rho);
    return p[0] * meter_value(0) + p[1] * meter_value(1);
  }

 private:
  MeasurementStage(double theta, Basis basis, LinearOperator interaction,
                   std::array<std::vector<LinearOperator>, 2> outcome_kraus, KrausChannel kraus,
                   PovmSet povm)
      : theta_(theta),
        basis_(basis),
        interaction_(std::move(interaction)),
        outcome_kraus_(std::move(outcome_kraus)),
        kraus_(std::move(kraus)),
        povm_(std::move(povm)) {}

  double theta_;
  Basis basis_;
  LinearOperator interaction_;
  std::array<std::vector<LinearOperator>, 2> outcome_kraus_;
  KrausChannel kraus_;
  PovmSet povm_;
};

/// Conjugates the signal qubit of an interaction with Hadamards, turning a
/// Z-basis stage into an X-basis one.
inline LinearOperator to_x_basis(const LinearOperator& z_interaction) {
  const LinearOperator hh = tensor(hadamard(), LinearOperator::identity(z_interaction.dim() / 2));
  return LinearOperator::unitary((hh * z_interaction * hh).entries());
}

/// Ideal stage: K+ = cos θ P0 + sin θ P1, K- = sin θ P0 + cos θ P1 in the
/// Z basis, Hadamard-conjugated in the X basis.
inline MeasurementStage make_stage(double theta, Basis basis) {
  const LinearOperator u_z =
      LinearOperator::unitary((cnot() * tensor(pauli_i(), s_gate(theta))).entries());
  return MeasurementStage::from_dilation(theta, basis,
                                         basis == Basis::kZ ? u_z : to_x_basis(u_z));
}

inline MeasurementStage make_stage_for_strength(double strength, Basis basis) {
  return make_stage(theta_from_strength(strength), basis);
}

namespace detail {

inline LinearOperator pull_back(const MeasurementStage& stage, const LinearOperator& local) {
  const LinearOperator& u = stage.interaction();
  const LinearOperator rest = LinearOperator::identity(u.dim() / local.dim());
  const LinearOperator full = tensor(local, rest);
  Matrix m = (u.adjoint() * full * u).entries();
  return LinearOperator::hermitian((m + m.adjoint()) / 2.0);
}

}  // namespace detail

/// U†(I ⊗ Z ⊗ I)U: the meter observable pulled back through the
/// interaction. 4x4 for ideal stages.
inline LinearOperator dilated_output_observable(const MeasurementStage& stage) {
  return detail::pull_back(stage, tensor(pauli_i(), pauli_z()));
}

/// U†(B ⊗ I)U for a signal observable B.
inline LinearOperator dilated_signal_observable(const MeasurementStage& stage,
                                                const LinearOperator& b) {
  return detail::pull_back(stage, b);
}

/// Joint distribution over two ±1 outcomes, index 0 ↔ +1.
class JointTable2 {
 public:
  explicit JointTable2(std::array<double, 4> p) : p_(p) {
    double sum = 0.0;
    for (double& v : p_) {
      if (!std::isfinite(v) || v < -kConstructTol) {
        throw std::invalid_argument("JointTable2: entries must be nonnegative");
      }
      if (v < 0.0) v = 0.0;
      sum += v;
    }
    if (std::abs(sum - 1.0) > kValidateTol) {
      throw std::invalid_argument("JointTable2: entries do not sum to 1");
    }
  }

  double operator()(int i, int f) const { return p_[2 * i + f]; }
  const std::array<double, 4>& entries() const { return p_; }

  /// Σ v_i v_f P(i, f) with v = ±1.
  double correlator() const {
    double c = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int f = 0; f < 2; ++f) c += meter_value(i) * meter_value(f) * (*this)(i, f);
    return c;
  }

 private:
  std::array<double, 4> p_;
};

/// Distribution over (WP, MA, post) outcomes, i-major.
class JointTable3 {
 public:
  explicit JointTable3(std::array<double, 8> p) : p_(p) {
    double sum = 0.0;
    for (double& v : p_) {
      if (!std::isfinite(v) || v < -kConstructTol) {
        throw std::invalid_argument("JointTable3: entries must be nonnegative");
      }
      if (v < 0.0) v = 0.0;
      sum += v;
    }
    if (std::abs(sum - 1.0) > kValidateTol) {
      throw std::invalid_argument("JointTable3: entries do not sum to 1");
    }
  }

  static constexpr int index(int i, int j, int k) { return 4 * i + 2 * j + k; }

  double operator()(int i, int j, int k) const { return p_[index(i, j, k)]; }
  const std::array<double, 8>& entries() const { return p_; }

 private:
  std::array<double, 8> p_;
};

enum class OutcomePair { kWpMa, kWpPost };

inline JointTable2 marginal_joint(const JointTable3& t, OutcomePair pair) {
  std::array<double, 4> p{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        const int f = pair == OutcomePair::kWpMa ? j : k;
        p[2 * i + f] += t(i, j, k);
      }
  return JointTable2(p);
}

struct ChainConfig {
  StateVector signal;
  MeasurementStage wp;
  MeasurementStage ma;
  MeasurementStage post;

  ChainConfig(StateVector signal_state, MeasurementStage weak_probe, MeasurementStage main)
      : ChainConfig(std::move(signal_state), std::move(weak_probe), std::move(main),
                    make_stage(0.0, Basis::kX)) {}

  ChainConfig(StateVector signal_state, MeasurementStage weak_probe, MeasurementStage main,
              MeasurementStage post_measurement)
      : signal(std::move(signal_state)),
        wp(std::move(weak_probe)),
        ma(std::move(main)),
        post(std::move(post_measurement)) {
    validate();
  }

  void validate() const {
    if (signal.dim() != 2) throw std::invalid_argument("ChainConfig: signal must be one qubit");
    if (ma.basis() != Basis::kZ) throw std::invalid_argument("ChainConfig: MA must measure Z");
    if (post.basis() != Basis::kX) {
      throw std::invalid_argument("ChainConfig: post-measurement must measure X");
    }
  }
};

/// Ideal chain with WP strength cos 2θ_w in the given basis and MA at θ.
inline ChainConfig ideal_chain(const StateVector& signal, double wp_strength, Basis wp_basis,
                               double ma_theta) {
  return ChainConfig(signal, make_stage_for_strength(wp_strength, wp_basis),
                     make_stage(ma_theta, Basis::kZ));
}

/// Exact (WP, MA, post) distribution via selective Kraus updates.
inline JointTable3 chain_distribution(const ChainConfig& cfg) {
  std::array<double, 8> p{};
  const Matrix rho = DensityMatrix(cfg.signal).entries();
  for (int i = 0; i < 2; ++i) {
    const Matrix after_wp = cfg.wp.update(rho, i);
    for (int j = 0; j < 2; ++j) {
      const Matrix after_ma = cfg.ma.update(after_wp, j);
      for (int k = 0; k < 2; ++k) {
        p[JointTable3::index(i, j, k)] = (cfg.post.povm()[k].op.entries() * after_ma).trace().real();
      }
    }
  }
  return JointTable3(p);
}

/// Same distribution from one explicit register holding the signal, the
/// three probes and every stage's environment, all probes read in Z.
inline JointTable3 chain_distribution_dilated(const ChainConfig& cfg) {
  const MeasurementStage* stages[] = {&cfg.wp, &cfg.ma, &cfg.post};
  std::size_t n = 4;
  std::size_t env_base[3];
  for (int s = 0; s < 3; ++s) {
    env_base[s] = n;
    n += stages[s]->environment_qubits();
  }
  const Eigen::Index dim = Eigen::Index{1} << n;
  Vector reg = Vector::Zero(dim);
  reg(0) = cfg.signal[0];
  reg(Eigen::Index{1} << (n - 1)) = cfg.signal[1];
  for (int s = 0; s < 3; ++s) {
    std::vector<std::size_t> qubits = {0, static_cast<std::size_t>(s + 1)};
    for (std::size_t e = 0; e < stages[s]->environment_qubits(); ++e) qubits.push_back(env_base[s] + e);
    reg = embed(stages[s]->interaction(), n, qubits).entries() * reg;
  }
  std::array<double, 8> p{};
  for (Eigen::Index idx = 0; idx < dim; ++idx) {
    const int probes = static_cast<int>((idx >> (n - 4)) & 0b111);
    p[probes] += std::norm(reg(idx));
  }
  return JointTable3(p);
}

/// Signal state handed to MA after the WP acts non-selectively.
inline DensityMatrix state_entering_ma(const StateVector& signal, const MeasurementStage& wp) {
  return apply_channel(wp.kraus(), DensityMatrix(signal));
}

/// (MA, post) distribution with no WP record, starting from a mixed state.
inline JointTable2 two_stage_distribution(const DensityMatrix& rho, const MeasurementStage& ma,
                                          const MeasurementStage& post) {
  std::array<double, 4> p{};
  for (int j = 0; j < 2; ++j) {
    const Matrix after = ma.update(rho.entries(), j);
    for (int f = 0; f < 2; ++f) {
      p[2 * j + f] = (post.povm()[f].op.entries() * after).trace().real();
    }
  }
  return JointTable2(p);
}

}  // namespace edrsim
