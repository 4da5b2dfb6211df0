// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Tolerances and time limits are fixed below.

#include "edrsim/edrsim.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace {

using namespace edrsim;

constexpr double kCurveTol = 1e-10;
constexpr double kAgreementTol = 1e-9;
constexpr double kPrintedCTol = 5e-4;
constexpr double kPrintedC = 0.995;
constexpr double kLhsTol = 1e-6;
constexpr double kBoundTol = 1e-8;
constexpr double kWp = 0.104;

constexpr double kLimitCurves = 1.0;
constexpr double kLimitAgreement = 5.0;
constexpr double kLimitValidity = 10.0;
constexpr double kLimitMonteCarlo = 60.0;

// Closed-form values at θ = π/8, computed independently at high precision.
constexpr double kHeisenbergPi8 = 0.58578643762690495;
constexpr double kOzawaPi8 = 2.11652016708726404;
constexpr double kBranciardPi8 = 1.08239220029239397;

struct Outcome {
  bool pass;
  std::string detail;
};

double eps_closed(double strength) { return std::sqrt(2.0 * (1.0 - strength)); }
double eta_closed(double strength) { return std::sqrt(2.0 * (1.0 - std::sqrt(1.0 - strength * strength))); }

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::vector<StateVector> random_states(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::vector<StateVector> out;
  for (int i = 0; i < count; ++i) out.push_back(random_state(rng, 2));
  return out;
}

const std::vector<double> kGrid = linspace(0.0, 1.0, 21);

Outcome ideal_curves() {
  const auto states = random_states(101, 100);
  double worst = 0.0;
  for (double g : kGrid) {
    const MeasurementStage ma = make_stage_for_strength(g, Basis::kZ);
    for (const auto& psi : states) {
      worst = std::max(worst, std::abs(direct_error(ma, psi) - eps_closed(g)));
      worst = std::max(worst, std::abs(direct_disturbance(ma, psi) - eta_closed(g)));
    }
  }
  return {worst <= kCurveTol, fmt("max deviation %.2e over 21 x 100", worst)};
}

Outcome endpoints() {
  const StateVector psi = parse_signal("y+");
  const MeasurementStage none = make_stage_for_strength(0.0, Basis::kZ);
  const MeasurementStage full = make_stage_for_strength(1.0, Basis::kZ);
  const double d = std::max({std::abs(direct_error(none, psi) - std::sqrt(2.0)),
                             std::abs(direct_disturbance(none, psi)), std::abs(direct_error(full, psi)),
                             std::abs(direct_disturbance(full, psi) - std::sqrt(2.0))});
  return {d <= kCurveTol, fmt("max deviation %.2e", d)};
}

Outcome method_agreement() {
  auto states = random_states(303, 5);
  states.push_back(parse_signal("y+"));
  double worst = 0.0;
  for (double gw : {0.05, 0.104, 0.3, 1.0}) {
    for (double g : kGrid) {
      const double th = theta_from_strength(g);
      const MeasurementStage ma = make_stage(th, Basis::kZ);
      for (const auto& psi : states) {
        const double eps = direct_error(ma, psi);
        const double eta = direct_disturbance(ma, psi);
        const auto z = chain_distribution(ideal_chain(psi, gw, Basis::kZ, th));
        const auto x = chain_distribution(ideal_chain(psi, gw, Basis::kX, th));
        worst = std::max({worst, std::abs(three_state_error(ma, psi) - eps),
                          std::abs(three_state_disturbance(ma, psi) - eta),
                          std::abs(weak_probe_error(marginal_joint(z, OutcomePair::kWpMa), gw) - eps),
                          std::abs(weak_probe_disturbance(marginal_joint(x, OutcomePair::kWpPost), gw) - eta)});
      }
    }
  }
  return {worst <= kAgreementTol, fmt("max deviation %.2e", worst)};
}

Outcome post_wp_bound() {
  const StateVector psi = parse_signal("y+");
  double worst = 0.0;
  for (double gw : linspace(0.0, 1.0, 41)) {
    const DensityMatrix rho = state_entering_ma(psi, make_stage_for_strength(gw, Basis::kZ));
    const double c = commutator_bound(pauli_z(), pauli_x(), rho);
    worst = std::max(worst, std::abs(c - std::sin(2.0 * theta_from_strength(gw))));
  }
  const DensityMatrix rho = state_entering_ma(psi, make_stage_for_strength(kWp, Basis::kZ));
  const double c = commutator_bound(pauli_z(), pauli_x(), rho);
  const bool pass = worst <= kCurveTol && std::abs(c - kPrintedC) <= kPrintedCTol;
  return {pass, fmt("C = %.6f at g_w = 0.104, |C - sin 2θ_w| <= %.2e", c, worst)};
}

Outcome heisenberg_violation_and_validity() {
  const StateVector psi = parse_signal("y+");
  const MeasurementStage ma = make_stage(std::numbers::pi / 8, Basis::kZ);
  EdrPoint p;
  p.eps = direct_error(ma, psi);
  p.eta = direct_disturbance(ma, psi);
  p.sigma_a = std_dev(pauli_z(), psi);
  p.sigma_b = std_dev(pauli_x(), psi);
  p.c_bound = commutator_bound(pauli_z(), pauli_x(), psi);
  const EdrReport r = edr_report(p);
  const double lhs_dev = std::max({std::abs(r.lhs_heisenberg - kHeisenbergPi8), std::abs(r.lhs_ozawa - kOzawaPi8),
                                   std::abs(r.lhs_branciard - kBranciardPi8)});
  bool pass = lhs_dev <= kLhsTol && r.lhs_heisenberg < p.c_bound && r.ozawa_ok && r.branciard_ok;

  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_margin = INFINITY;
  for (int t = 0; t < 10000; ++t) {
    const StateVector s = random_state(rng, 2);
    const MeasurementStage st = make_stage(kQuarterPi * unit(rng), Basis::kZ);
    EdrPoint q;
    q.eps = direct_error(st, s);
    q.eta = direct_disturbance(st, s);
    q.sigma_a = std_dev(pauli_z(), s);
    q.sigma_b = std_dev(pauli_x(), s);
    q.c_bound = commutator_bound(pauli_z(), pauli_x(), s);
    const EdrReport rq = edr_report(q);
    worst_margin = std::min({worst_margin, rq.lhs_ozawa - q.c_bound, rq.lhs_branciard - q.c_bound,
                             rq.lhs_branciard_tight - q.c_bound});
  }
  pass = pass && worst_margin >= -kRelationTol;
  return {pass, fmt("π/8: εη = %.5f, lhs deviation %.1e; worst margin over 10000 = %.2e", r.lhs_heisenberg,
                    lhs_dev, worst_margin)};
}

Outcome tight_saturation() {
  const StateVector psi = parse_signal("y+");
  double worst = 0.0;
  for (double g : kGrid) {
    const MeasurementStage ma = make_stage_for_strength(g, Basis::kZ);
    EdrPoint p;
    p.eps = direct_error(ma, psi);
    p.eta = direct_disturbance(ma, psi);
    const EdrReport r = edr_report(p);
    worst = std::max({worst, std::abs(r.tilde_eps * r.tilde_eps + r.tilde_eta * r.tilde_eta - 1.0),
                      std::abs(r.lhs_branciard_tight - 1.0)});
  }
  return {worst <= kCurveTol, fmt("max |ε̃² + η̃² - 1| = %.2e", worst)};
}

Outcome bound_curves() {
  // Points where every bound is still positive (ε < C/σ_B).
  const std::vector<double> eps_grid = linspace(0.02, 0.98, 50);
  double worst = 0.0;
  for (Relation kind : kAllRelations) {
    for (double eps : eps_grid) {
      const double eta = min_disturbance_bound(kind, eps, 1.0, 1.0, 1.0);
      worst = std::max(worst, std::abs(relation_lhs(kind, eps, eta, 1.0, 1.0, 1.0) - 1.0));
    }
  }
  return {worst <= kBoundTol, fmt("max |lhs - C| = %.2e", worst)};
}

Outcome monte_carlo() {
  SweepConfig cfg;
  cfg.mode = StatisticsMode::kMonteCarlo;
  cfg.total = 1'000'000;
  cfg.reps = 10;
  cfg.wp_strength = kWp;
  cfg.methods = {Method::kWeakProbe};
  const auto rows = run_sweep(cfg);
  bool pass = rows.size() == kGrid.size();
  double worst_ratio = 0.0;
  double min_rms = INFINITY;
  for (const auto& r : rows) {
    if (!r.eps_err || !r.eta_err) return {false, "missing error bars"};
    min_rms = std::min({min_rms, *r.eps_err, *r.eta_err});
    const double allowed = 3.0 * *r.eps_err / std::sqrt(10.0);
    const double dev = std::abs(r.eps - eps_closed(r.strength));
    worst_ratio = std::max(worst_ratio, dev / allowed);
    pass = pass && dev <= allowed && *r.eps_err > 0.0;
  }
  return {pass, fmt("worst |mean - exact| / (3 RMS/√10) = %.2f, smallest RMS = %.2e", worst_ratio, min_rms)};
}

Outcome imperfection() {
  SweepConfig cfg;
  cfg.apparatus = ApparatusSpec::reference_setup();
  const auto rows = run_sweep(cfg);
  double eps_at_one = -1.0, eta_at_zero = -1.0;
  bool relations = true;
  for (const auto& r : rows) {
    relations = relations && r.ozawa_ok && r.branciard_ok && r.branciard_tight_ok;
    if (r.method != Method::kWeakProbe) continue;
    if (r.strength == 1.0) eps_at_one = r.eps;
    if (r.strength == 0.0) eta_at_zero = r.eta;
  }
  const bool pass = eps_at_one > 0.0 && eta_at_zero > 0.0 && relations;
  return {pass, fmt("weak-probe ε(1) = %.4f, η(0) = %.4f, relations hold: %.0f", eps_at_one, eta_at_zero,
                    relations ? 1.0 : 0.0)};
}

struct Criterion {
  int id;
  const char* name;
  double time_limit;  // seconds; 0 for none
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "ideal trade-off curves", kLimitCurves, ideal_curves},
      {2, "endpoints", 0, endpoints},
      {3, "method agreement", kLimitAgreement, method_agreement},
      {4, "post-WP commutator bound", 0, post_wp_bound},
      {5, "Heisenberg violation and universal validity", kLimitValidity, heisenberg_violation_and_validity},
      {6, "tight-bound saturation", 0, tight_saturation},
      {7, "bound curves are tight", 0, bound_curves},
      {8, "Monte Carlo error bars", kLimitMonteCarlo, monte_carlo},
      {9, "imperfect optics", 0, imperfection},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool pass = o.pass;
    if (c.time_limit > 0 && secs >= c.time_limit) {
      pass = false;
      o.detail += fmt(" [time limit %.0f s exceeded]", c.time_limit);
    }
    std::printf("%s criterion %d: %s: %s (%.3f s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    if (!pass) ++failures;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
