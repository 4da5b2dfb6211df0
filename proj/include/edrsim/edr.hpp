#pragma once

// Error ε(Z) and disturbance η(X) of a qubit measurement, computed three
// ways (operator definition on the dilation, three-state method, weak-probe
// correlators), and the left-hand sides of the Heisenberg, Ozawa,
// Branciard and tight (±1-valued) Branciard relations.

#include "edrsim/circuit.hpp"
#include "edrsim/errors.hpp"
#include "edrsim/qcore.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace edrsim {

/// Radicands in [-kRadicandWindow, 0) are clamped to zero; below that the
/// inputs are inconsistent.
inline constexpr double kRadicandWindow = 1e-9;
/// Radicands are sums of O(1) terms, so |r| below this is rounding residue
/// and is read as exactly zero.
inline constexpr double kRadicandNoise = 1e-14;
/// Slack allowed when deciding whether a relation holds.
inline constexpr double kRelationTol = 1e-9;

enum class Method { kDirect, kThreeState, kWeakProbe };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::kDirect: return "direct";
    case Method::kThreeState: return "three_state";
    case Method::kWeakProbe: return "weak_probe";
  }
  return "?";
}

enum class Relation { kHeisenberg, kOzawa, kBranciard, kBranciardTight };

inline const char* to_string(Relation r) {
  switch (r) {
    case Relation::kHeisenberg: return "heisenberg";
    case Relation::kOzawa: return "ozawa";
    case Relation::kBranciard: return "branciard";
    case Relation::kBranciardTight: return "branciard_tight";
  }
  return "?";
}

inline constexpr std::array<Relation, 4> kAllRelations = {
    Relation::kHeisenberg, Relation::kOzawa, Relation::kBranciard, Relation::kBranciardTight};

struct EdrPoint {
  double strength = 0.0;  // cos 2θ of MA
  double eps = 0.0;       // ε(Z)
  double eta = 0.0;       // η(X)
  double sigma_a = 1.0;   // σ(Z)
  double sigma_b = 1.0;   // σ(X)
  double c_bound = 1.0;   // |<[Z,X]>|/2
  Method method = Method::kDirect;
};

struct EdrReport {
  EdrPoint point;
  double tilde_eps = 0.0;
  double tilde_eta = 0.0;
  double lhs_heisenberg = 0.0;
  double lhs_ozawa = 0.0;
  double lhs_branciard = 0.0;
  double lhs_branciard_tight = 0.0;
  bool heisenberg_ok = false;
  bool ozawa_ok = false;
  bool branciard_ok = false;
  bool branciard_tight_ok = false;

  double lhs(Relation r) const {
    switch (r) {
      case Relation::kHeisenberg: return lhs_heisenberg;
      case Relation::kOzawa: return lhs_ozawa;
      case Relation::kBranciard: return lhs_branciard;
      case Relation::kBranciardTight: return lhs_branciard_tight;
    }
    return 0.0;
  }
  bool satisfied(Relation r) const {
    switch (r) {
      case Relation::kHeisenberg: return heisenberg_ok;
      case Relation::kOzawa: return ozawa_ok;
      case Relation::kBranciard: return branciard_ok;
      case Relation::kBranciardTight: return branciard_tight_ok;
    }
    return false;
  }
};

namespace detail {

inline double checked_sqrt(double radicand, const char* what) {
  if (std::abs(radicand) <= kRadicandNoise) return 0.0;
  if (radicand < 0.0) {
    if (radicand < -kRadicandWindow) {
      throw NumericalError(std::string(what) + ": negative radicand " + std::to_string(radicand));
    }
    return 0.0;
  }
  return std::sqrt(radicand);
}

inline void require_z_stage(const MeasurementStage& stage, const char* what) {
  if (stage.basis() != Basis::kZ) {
    throw std::invalid_argument(std::string(what) + ": stage must measure in the Z basis");
  }
}

/// <(O - A ⊗ I)^2> in ρ ⊗ |0...0>, where O acts on signal ⊗ ancillas.
inline double rms_deviation(const LinearOperator& out, const LinearOperator& a,
                            const DensityMatrix& rho, const char* what) {
  const Eigen::Index ancilla_dim = out.dim() / a.dim();
  const LinearOperator diff = out - tensor(a, LinearOperator::identity(ancilla_dim));
  Matrix ancilla = Matrix::Zero(ancilla_dim, ancilla_dim);
  ancilla(0, 0) = 1.0;
  const DensityMatrix joint(kron(rho.entries(), ancilla));
  const Matrix sq = (diff * diff).entries();
  return checked_sqrt(expectation(LinearOperator::hermitian((sq + sq.adjoint()) / 2.0), joint), what);
}

}  // namespace detail

/// ε(Z) = <(U†(I⊗M)U - Z⊗I)^2>^{1/2} in ρ ⊗ |0>.
inline double direct_error(const MeasurementStage& stage, const DensityMatrix& rho) {
  detail::require_z_stage(stage, "direct_error");
  if (rho.dim() != 2) throw std::invalid_argument("direct_error: signal must be one qubit");
  return detail::rms_deviation(dilated_output_observable(stage), pauli_z(), rho, "direct_error");
}

inline double direct_error(const MeasurementStage& stage, const StateVector& psi) {
  return direct_error(stage, DensityMatrix(psi));
}

/// η(X) = <(U†(X⊗I)U - X⊗I)^2>^{1/2} in ρ ⊗ |0>.
inline double direct_disturbance(const MeasurementStage& stage, const DensityMatrix& rho) {
  detail::require_z_stage(stage, "direct_disturbance");
  if (rho.dim() != 2) throw std::invalid_argument("direct_disturbance: signal must be one qubit");
  return detail::rms_deviation(dilated_signal_observable(stage, pauli_x()), pauli_x(), rho,
                               "direct_disturbance");
}

inline double direct_disturbance(const MeasurementStage& stage, const StateVector& psi) {
  return direct_disturbance(stage, DensityMatrix(psi));
}

namespace detail {

/// ε² = <M²> + <A²> + m(ψ) + m(Aψ) - m((A+I)ψ), where m(φ) is the
/// unnormalized mean reading on φ. Readings are ±1 so <M²> = 1.
template <typename MeanReading>
double three_state(const LinearOperator& a, const StateVector& psi, MeanReading&& mean,
                   const char* what) {
  if (psi.dim() != 2) throw std::invalid_argument(std::string(what) + ": signal must be one qubit");
  auto m = [&](const Vector& phi) {
    const double n2 = phi.squaredNorm();
    if (n2 <= kConstructTol) {
      throw std::invalid_argument(std::string(what) + ": zero-norm auxiliary state");
    }
    return n2 * mean(StateVector::normalized(phi));
  };
  const Vector a_psi = a.apply(psi);
  const Vector a_plus_psi = a_psi + psi.amplitudes();
  const double a2 = expectation(a * a, psi);
  const double eps2 = 1.0 + a2 + m(psi.amplitudes()) + m(a_psi) - m(a_plus_psi);
  return checked_sqrt(eps2, what);
}

}  // namespace detail

/// Error from meter statistics on |ψ>, Z|ψ> and (Z+I)|ψ>.
inline double three_state_error(const MeasurementStage& stage, const StateVector& psi) {
  detail::require_z_stage(stage, "three_state_error");
  return detail::three_state(
      pauli_z(), psi,
      [&](const StateVector& phi) { return stage.mean_meter(DensityMatrix(phi)); },
      "three_state_error");
}

/// Disturbance from post-measurement X statistics on |ψ>, X|ψ>, (X+I)|ψ>,
/// each passed through MA non-selectively.
inline double three_state_disturbance(const MeasurementStage& stage, const StateVector& psi,
                                      const MeasurementStage& post = make_stage(0.0, Basis::kX)) {
  detail::require_z_stage(stage, "three_state_disturbance");
  return detail::three_state(
      pauli_x(), psi,
      [&](const StateVector& phi) {
        return post.mean_meter(apply_channel(stage.kraus(), DensityMatrix(phi)));
      },
      "three_state_disturbance");
}

/// ε = sqrt(2(1 - corr / g_w)) from a (WP, MA) joint table. The correlator
/// of ±1 readings equals g_w cos 2θ exactly, so g_w = cos 2θ_w.
inline double weak_probe_error(const JointTable2& joint, double wp_strength) {
  if (!(wp_strength > 0.0 && wp_strength <= 1.0)) {
    throw std::invalid_argument("weak_probe_error: WP strength must lie in (0, 1]");
  }
  return detail::checked_sqrt(2.0 * (1.0 - joint.correlator() / wp_strength), "weak_probe_error");
}

/// η from a (WP in X basis, post-measurement) joint table.
inline double weak_probe_disturbance(const JointTable2& joint, double wp_strength) {
  if (!(wp_strength > 0.0 && wp_strength <= 1.0)) {
    throw std::invalid_argument("weak_probe_disturbance: WP strength must lie in (0, 1]");
  }
  return detail::checked_sqrt(2.0 * (1.0 - joint.correlator() / wp_strength),
                              "weak_probe_disturbance");
}

/// x sqrt(1 - x²/4); maps ±1-valued errors onto the unit-circle coordinates.
inline double tilde(double x) {
  const double r = 1.0 - x * x / 4.0;
  return x * std::sqrt(std::max(r, 0.0));
}

inline EdrReport edr_report(const EdrPoint& point) {
  const double vals[] = {point.eps, point.eta, point.sigma_a, point.sigma_b, point.c_bound};
  for (double v : vals) {
    if (!std::isfinite(v)) throw std::invalid_argument("edr_report: non-finite input");
  }
  const double eps = point.eps;
  const double eta = point.eta;
  const double sa = point.sigma_a;
  const double sb = point.sigma_b;
  const double c = point.c_bound;

  const double robertson = sa * sa * sb * sb - c * c;
  if (robertson < -kRelationTol) {
    throw NumericalError("edr_report: sigma_a * sigma_b < C violates the Robertson relation");
  }

  EdrReport r;
  r.point = point;
  r.tilde_eps = tilde(eps);
  r.tilde_eta = tilde(eta);
  r.lhs_heisenberg = eps * eta;
  r.lhs_ozawa = eps * eta + eps * sb + sa * eta;
  r.lhs_branciard = std::sqrt(eps * eps * sb * sb + sa * sa * eta * eta +
                              2.0 * eps * eta * std::sqrt(std::max(robertson, 0.0)));
  r.lhs_branciard_tight =
      std::sqrt(r.tilde_eps * r.tilde_eps + r.tilde_eta * r.tilde_eta +
                2.0 * r.tilde_eps * r.tilde_eta * std::sqrt(std::max(1.0 - c * c, 0.0)));
  r.heisenberg_ok = r.lhs_heisenberg >= c - kRelationTol;
  r.ozawa_ok = r.lhs_ozawa >= c - kRelationTol;
  r.branciard_ok = r.lhs_branciard >= c - kRelationTol;
  r.branciard_tight_ok = r.lhs_branciard_tight >= c - kRelationTol;
  return r;
}

struct RobertsonCheck {
  bool holds;
  double margin;  // σ(A)σ(B) - C
};

template <typename State>
RobertsonCheck robertson_check(const LinearOperator& a, const LinearOperator& b,
                               const State& state) {
  const double margin = std_dev(a, state) * std_dev(b, state) - commutator_bound(a, b, state);
  return {margin >= -kValidateTol, margin};
}

namespace detail {

/// Smallest y >= 0 with qa y² + 2 k x y + (qb x² - c²) >= 0.
inline double smallest_root(double x, double qa, double qb, double k, double c) {
  const double constant = qb * x * x - c * c;
  if (constant >= 0.0) return 0.0;
  if (qa <= 0.0) return std::numeric_limits<double>::infinity();
  const double disc = k * k * x * x - qa * constant;
  return (-k * x + std::sqrt(disc)) / qa;
}

}  // namespace detail

/// Smallest η >= 0 allowed by the relation at error ε. Heisenberg at ε = 0
/// returns +infinity.
inline double min_disturbance_bound(Relation kind, double eps, double sigma_a, double sigma_b,
                                    double c) {
  if (!(eps >= 0.0) || !(c >= 0.0) || !(sigma_a >= 0.0) || !(sigma_b >= 0.0)) {
    throw std::invalid_argument("min_disturbance_bound: arguments must be nonnegative");
  }
  switch (kind) {
    case Relation::kHeisenberg:
      if (eps == 0.0) return std::numeric_limits<double>::infinity();
      return c / eps;
    case Relation::kOzawa: {
      if (sigma_a + eps == 0.0) return std::numeric_limits<double>::infinity();
      return std::max((c - eps * sigma_b) / (sigma_a + eps), 0.0);
    }
    case Relation::kBranciard: {
      const double k = std::sqrt(std::max(sigma_a * sigma_a * sigma_b * sigma_b - c * c, 0.0));
      return detail::smallest_root(eps, sigma_a * sigma_a, sigma_b * sigma_b, k, c);
    }
    case Relation::kBranciardTight: {
      if (c > 1.0) throw std::invalid_argument("min_disturbance_bound: tight bound needs C <= 1");
      const double k = std::sqrt(std::max(1.0 - c * c, 0.0));
      const double t_eta = detail::smallest_root(tilde(std::min(eps, 2.0)), 1.0, 1.0, k, c);
      // Invert η̃ = η sqrt(1 - η²/4) on the branch η <= sqrt(2).
      const double t2 = std::min(t_eta * t_eta, 1.0);
      return std::sqrt(2.0 * (1.0 - std::sqrt(1.0 - t2)));
    }
  }
  return 0.0;
}

/// Left-hand side of one relation, for plugging bounds back in.
inline double relation_lhs(Relation kind, double eps, double eta, double sigma_a, double sigma_b,
                           double c) {
  return edr_report({0.0, eps, eta, sigma_a, sigma_b, c, Method::kDirect}).lhs(kind);
}

}  // namespace edrsim
