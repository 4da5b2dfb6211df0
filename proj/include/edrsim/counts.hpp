#pragma once

// Photon-counting Monte Carlo. A run draws a fixed number of detection
// events over the eight (WP, MA, post) detector outcomes, turns the counts
// back into joint tables and re-estimates ε and η. Every draw is keyed by an
// explicit seed so repetitions and grid points can run in any order.

#include "edrsim/circuit.hpp"
#include "edrsim/edr.hpp"
#include "edrsim/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace edrsim {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent sub-stream seed for (seed, key...).
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t k : keys) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

struct CountsRecord {
  std::array<std::uint64_t, 8> n{};  // i-major: index 4i + 2j + k
  std::uint64_t total = 0;
  std::uint64_t seed = 0;

  std::uint64_t operator()(int i, int j, int k) const { return n[JointTable3::index(i, j, k)]; }

  void validate() const {
    std::uint64_t sum = 0;
    for (auto v : n) sum += v;
    if (total == 0) throw std::invalid_argument("CountsRecord: total must be positive");
    if (sum != total) throw std::invalid_argument("CountsRecord: counts do not sum to total");
  }

  static std::string csv_header() { return "seed,total,N000,N001,N010,N011,N100,N101,N110,N111"; }

  std::string csv_row() const {
    std::ostringstream os;
    os << seed << ',' << total;
    for (auto v : n) os << ',' << v;
    return os.str();
  }
};

/// Multinomial draw of `total` events over the eight cells, built from
/// successive conditional binomials.
inline CountsRecord sample_counts(const JointTable3& p, std::uint64_t total, std::uint64_t seed) {
  if (total == 0) throw std::invalid_argument("sample_counts: total must be positive");
  std::mt19937_64 rng(seed);
  CountsRecord rec;
  rec.total = total;
  rec.seed = seed;
  std::uint64_t remaining = total;
  double mass = 1.0;
  for (int c = 0; c < 8; ++c) {
    if (c == 7 || remaining == 0) {
      rec.n[c] = c == 7 ? remaining : 0;
      remaining -= rec.n[c];
      continue;
    }
    const double q = mass > 0.0 ? std::clamp(p.entries()[c] / mass, 0.0, 1.0) : 0.0;
    std::binomial_distribution<std::uint64_t> draw(remaining, q);
    rec.n[c] = q >= 1.0 ? remaining : draw(rng);
    remaining -= rec.n[c];
    mass -= p.entries()[c];
  }
  return rec;
}

enum class Normalization {
  kGrandTotal,    // P(i,f) = Σ N / total
  kPerMaOutcome,  // Σ_k N_ijk / Σ_{i,k} N_ijk, weighted 1/2 per MA outcome
};

inline const char* to_string(Normalization n) {
  return n == Normalization::kGrandTotal ? "grand_total" : "paper";
}

/// Joint (WP, MA) or (WP, post) table from counts.
///
/// kPerMaOutcome follows the per-branch normalization where each count is
/// divided by the total recorded in its MA (or post) branch; the two
/// conditional tables are then given weight 1/2 each so the result is a
/// normalized joint table. It agrees with kGrandTotal whenever the branch
/// totals are balanced.
inline JointTable2 estimate_joint(const CountsRecord& c, OutcomePair pair,
                                  Normalization mode = Normalization::kGrandTotal) {
  c.validate();
  std::array<double, 4> sums{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        const int f = pair == OutcomePair::kWpMa ? j : k;
        sums[2 * i + f] += static_cast<double>(c(i, j, k));
      }
  std::array<double, 4> p{};
  if (mode == Normalization::kGrandTotal) {
    for (int idx = 0; idx < 4; ++idx) p[idx] = sums[idx] / static_cast<double>(c.total);
  } else {
    for (int f = 0; f < 2; ++f) {
      const double branch = sums[f] + sums[2 + f];
      if (branch == 0.0) {
        throw std::invalid_argument("estimate_joint: empty branch in per-outcome normalization");
      }
      for (int i = 0; i < 2; ++i) p[2 * i + f] = 0.5 * sums[2 * i + f] / branch;
    }
  }
  return JointTable2(p);
}

/// sign(r) sqrt(|r|) of the weak-probe radicand r = 2(1 - corr/g_w). Shot
/// noise can push r below zero near the error-free end; the sign is kept.
inline double signed_weak_probe_estimate(const JointTable2& joint, double wp_strength) {
  if (!(wp_strength > 0.0 && wp_strength <= 1.0)) {
    throw std::invalid_argument("signed_weak_probe_estimate: WP strength must lie in (0, 1]");
  }
  const double r = 2.0 * (1.0 - joint.correlator() / wp_strength);
  return r >= 0.0 ? std::sqrt(r) : -std::sqrt(-r);
}

struct RunStats {
  std::vector<EdrPoint> repetitions;
  std::vector<CountsRecord> error_counts;        // Z-basis WP runs
  std::vector<CountsRecord> disturbance_counts;  // X-basis WP runs
  double eps_mean = 0.0;
  double eta_mean = 0.0;
  std::optional<double> eps_rms;  // absent for a single repetition
  std::optional<double> eta_rms;
};

struct RepetitionPlan {
  std::uint64_t total = 1'000'000;
  int reps = 10;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;  // e.g. grid index
  Normalization norm = Normalization::kGrandTotal;
};

namespace detail {

inline std::optional<double> rms_spread(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return std::nullopt;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace detail

/// Repeats the counting experiment `plan.reps` times. `error_chain` has the
/// WP in the Z basis, `disturbance_chain` in the X basis; `base` supplies
/// strength, σ and C for the per-repetition points.
inline RunStats run_repetitions(const JointTable3& error_chain, const JointTable3& disturbance_chain,
                                double wp_strength, const EdrPoint& base,
                                const RepetitionPlan& plan) {
  if (plan.reps < 1) throw std::invalid_argument("run_repetitions: reps must be at least 1");
  RunStats out;
  std::vector<double> eps, eta;
  for (int r = 0; r < plan.reps; ++r) {
    const auto rr = static_cast<std::uint64_t>(r);
    CountsRecord ce = sample_counts(error_chain, plan.total, derive_seed(plan.seed, {plan.stream, rr, 0}));
    CountsRecord cd = sample_counts(disturbance_chain, plan.total, derive_seed(plan.seed, {plan.stream, rr, 1}));
    EdrPoint p = base;
    p.method = Method::kWeakProbe;
    p.eps = signed_weak_probe_estimate(estimate_joint(ce, OutcomePair::kWpMa, plan.norm), wp_strength);
    p.eta = signed_weak_probe_estimate(estimate_joint(cd, OutcomePair::kWpPost, plan.norm), wp_strength);
    eps.push_back(p.eps);
    eta.push_back(p.eta);
    out.repetitions.push_back(p);
    out.error_counts.push_back(ce);
    out.disturbance_counts.push_back(cd);
  }
  auto mean = [](const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
  };
  out.eps_mean = mean(eps);
  out.eta_mean = mean(eta);
  out.eps_rms = detail::rms_spread(eps, out.eps_mean);
  out.eta_rms = detail::rms_spread(eta, out.eta_mean);
  return out;
}

}  // namespace edrsim
