#pragma once

// Self-check suite run by `edrsim validate`: the library's invariants
// evaluated on random states and strength grids.

#include "edrsim/circuit.hpp"
#include "edrsim/edr.hpp"
#include "edrsim/optics.hpp"
#include "edrsim/qcore.hpp"
#include "edrsim/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace edrsim {

struct CheckResult {
  std::string name;
  bool passed;
  double worst;      // largest deviation observed
  double tolerance;
};

namespace detail {

inline CheckResult worst_case(std::string name, double tol,
                              const std::function<void(std::function<void(double)>)>& body) {
  double worst = 0.0;
  body([&](double dev) { worst = std::max(worst, std::isnan(dev) ? INFINITY : dev); });
  return {std::move(name), worst <= tol, worst, tol};
}

}  // namespace detail

inline std::vector<CheckResult> run_validation(std::uint64_t seed = 2024) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<StateVector> states;
  for (int s = 0; s < 20; ++s) states.push_back(random_state(rng, 2));
  const std::vector<double> grid = linspace(0.0, 1.0, 21);
  std::vector<CheckResult> out;

  out.push_back(detail::worst_case("ideal closed forms", 1e-10, [&](auto record) {
    for (double g : grid) {
      const MeasurementStage ma = make_stage_for_strength(g, Basis::kZ);
      const double th = theta_from_strength(g);
      for (const auto& psi : states) {
        record(std::abs(direct_error(ma, psi) - std::sqrt(2.0 * (1.0 - std::cos(2 * th)))));
        record(std::abs(direct_disturbance(ma, psi) - std::sqrt(2.0 * (1.0 - std::sin(2 * th)))));
      }
    }
  }));

  out.push_back(detail::worst_case("method agreement", 1e-9, [&](auto record) {
    for (double gw : {0.05, 0.104, 0.3, 0.9, 1.0}) {
      for (double g : grid) {
        const double th = theta_from_strength(g);
        const MeasurementStage ma = make_stage(th, Basis::kZ);
        const StateVector& psi = states[0];
        const double eps = direct_error(ma, psi);
        const double eta = direct_disturbance(ma, psi);
        record(std::abs(three_state_error(ma, psi) - eps));
        record(std::abs(three_state_disturbance(ma, psi) - eta));
        const auto z = chain_distribution(ideal_chain(psi, gw, Basis::kZ, th));
        const auto x = chain_distribution(ideal_chain(psi, gw, Basis::kX, th));
        record(std::abs(weak_probe_error(marginal_joint(z, OutcomePair::kWpMa), gw) - eps));
        record(std::abs(weak_probe_disturbance(marginal_joint(x, OutcomePair::kWpPost), gw) - eta));
      }
    }
  }));

  out.push_back(detail::worst_case("selective and dilated chains agree", 1e-10, [&](auto record) {
    for (int t = 0; t < 50; ++t) {
      const StateVector psi = random_state(rng, 2);
      const double gw = unit(rng);
      const double th = kQuarterPi * unit(rng);
      const ChainConfig cfg = ideal_chain(psi, gw, t % 2 ? Basis::kX : Basis::kZ, th);
      const auto a = chain_distribution(cfg);
      const auto b = chain_distribution_dilated(cfg);
      for (int c = 0; c < 8; ++c) record(std::abs(a.entries()[c] - b.entries()[c]));
    }
  }));

  out.push_back(detail::worst_case("channels keep trace and positivity", 1e-9, [&](auto record) {
    for (int t = 0; t < 50; ++t) {
      const StateVector psi = random_state(rng, 2);
      const double th = kQuarterPi * unit(rng);
      for (const auto& stage : {make_stage(th, Basis::kZ), make_stage(th, Basis::kX),
                                imperfect_stage(th, Basis::kZ, PbsSpec(50, 1000))}) {
        const DensityMatrix rho = apply_channel(stage.kraus(), DensityMatrix(psi));
        record(std::abs(rho.entries().trace().real() - 1.0));
        record(std::max(-rho.min_eigenvalue(), 0.0));
      }
    }
  }));

  out.push_back(detail::worst_case("tight relation saturates on ideal curve", 1e-10, [&](auto record) {
    for (double g : grid) {
      const MeasurementStage ma = make_stage_for_strength(g, Basis::kZ);
      const double te = tilde(direct_error(ma, states[0]));
      const double tn = tilde(direct_disturbance(ma, states[0]));
      record(std::abs(te * te + tn * tn - 1.0));
    }
  }));

  out.push_back(detail::worst_case("bounds are tight", 1e-8, [&](auto record) {
    for (Relation kind : kAllRelations) {
      for (int k = 1; k <= 50; ++k) {
        const double eps = k / 50.0;
        const double eta = min_disturbance_bound(kind, eps, 1.0, 1.0, 1.0);
        record(std::abs(relation_lhs(kind, eps, eta, 1.0, 1.0, 1.0) - 1.0));
      }
    }
  }));

  out.push_back(detail::worst_case("Ozawa and Branciard hold for random states", 0.0, [&](auto record) {
    for (int t = 0; t < 1000; ++t) {
      const StateVector psi = random_state(rng, 2);
      const MeasurementStage ma = make_stage(kQuarterPi * unit(rng), Basis::kZ);
      EdrPoint p;
      p.eps = direct_error(ma, psi);
      p.eta = direct_disturbance(ma, psi);
      p.sigma_a = std_dev(pauli_z(), psi);
      p.sigma_b = std_dev(pauli_x(), psi);
      p.c_bound = commutator_bound(pauli_z(), pauli_x(), psi);
      const EdrReport r = edr_report(p);
      record(r.ozawa_ok && r.branciard_ok && r.branciard_tight_ok ? 0.0 : 1.0);
    }
  }));

  out.push_back(detail::worst_case("optics ideal limit", 1e-8, [&](auto record) {
    const PbsSpec near_ideal(1e12, 1e12);
    const ApparatusSpec apparatus{near_ideal, near_ideal, near_ideal};
    for (double g : linspace(0.0, 1.0, 6)) {
      const double th = theta_from_strength(g);
      const auto a = imperfect_chain_distribution(states[1], 0.104, Basis::kZ, th, apparatus);
      const auto b = chain_distribution(ideal_chain(states[1], 0.104, Basis::kZ, th));
      for (int c = 0; c < 8; ++c) record(std::abs(a.entries()[c] - b.entries()[c]));
    }
  }));

  return out;
}

}  // namespace edrsim
