#pragma once

// Strength sweeps and figure-data emission behind the edrsim CLI.

#include "edrsim/circuit.hpp"
#include "edrsim/counts.hpp"
#include "edrsim/edr.hpp"
#include "edrsim/errors.hpp"
#include "edrsim/optics.hpp"
#include "edrsim/qcore.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <future>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace edrsim {

enum class StatisticsMode { kExact, kMonteCarlo };

inline const char* to_string(StatisticsMode m) {
  return m == StatisticsMode::kExact ? "exact" : "mc";
}

inline std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out;
  if (count <= 0) return out;
  if (count == 1) return {lo};
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    out.push_back(i == count - 1 ? hi : lo + (hi - lo) * i / (count - 1));
  }
  return out;
}

struct SweepConfig {
  std::vector<double> grid = linspace(0.0, 1.0, 21);
  double wp_strength = 0.104;
  std::string signal = "y+";
  std::optional<ApparatusSpec> apparatus;  // nullopt: ideal instruments
  StatisticsMode mode = StatisticsMode::kExact;
  std::uint64_t total = 1'000'000;
  int reps = 10;
  std::uint64_t seed = 1;
  std::vector<Method> methods = {Method::kDirect, Method::kThreeState, Method::kWeakProbe};
  Normalization norm = Normalization::kGrandTotal;

  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

// ---------------------------------------------------------------------------
// Parsing helpers shared by the config file and command-line flags.

/// "y+", "y-", "x+", "x-", "z+", "z-" or "bloch:POLAR,AZIMUTH" in radians.
inline StateVector parse_signal(const std::string& text) {
  const double r = 1.0 / std::sqrt(2.0);
  const Complex i(0, 1);
  Vector v(2);
  if (text == "y+") {
    v << r, r * i;
  } else if (text == "y-") {
    v << r, -r * i;
  } else if (text == "x+") {
    v << r, r;
  } else if (text == "x-") {
    v << r, -r;
  } else if (text == "z+") {
    v << 1, 0;
  } else if (text == "z-") {
    v << 0, 1;
  } else if (text.rfind("bloch:", 0) == 0) {
    double polar = 0, azimuth = 0;
    char comma = 0;
    std::istringstream is(text.substr(6));
    is.imbue(std::locale::classic());
    if (!(is >> polar >> comma >> azimuth) || comma != ',' || !is.eof()) {
      throw ConfigError("signal", "expected bloch:POLAR,AZIMUTH, got '" + text + "'");
    }
    v << std::cos(polar / 2), std::exp(i * azimuth) * std::sin(polar / 2);
  } else {
    throw ConfigError("signal", "unknown state '" + text + "'");
  }
  return StateVector::normalized(v);
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_number(const std::string& s, const std::string& field) {
  double v = 0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && *b == ' ') ++b;
  while (e > b && e[-1] == ' ') --e;
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) {
    throw ConfigError(field, "not a number: '" + s + "'");
  }
  return v;
}

}  // namespace detail

/// Comma list "0,0.5,1", or "LO:HI:COUNT" for evenly spaced points. An
/// empty string is an empty grid.
inline std::vector<double> parse_grid(const std::string& text) {
  if (text.empty()) return {};
  if (text.find(':') != std::string::npos) {
    const auto parts = detail::split(text, ':');
    if (parts.size() != 3) throw ConfigError("grid", "expected LO:HI:COUNT, got '" + text + "'");
    const double count = detail::parse_number(parts[2], "grid");
    if (count < 0 || count != std::floor(count)) throw ConfigError("grid", "COUNT must be a whole number");
    return linspace(detail::parse_number(parts[0], "grid"), detail::parse_number(parts[1], "grid"),
                    static_cast<int>(count));
  }
  std::vector<double> out;
  for (const auto& p : detail::split(text, ',')) out.push_back(detail::parse_number(p, "grid"));
  return out;
}

/// "E_R,E_T".
inline PbsSpec parse_pbs(const std::string& text, const std::string& field) {
  if (text == "ideal") return PbsSpec::ideal();
  const auto parts = detail::split(text, ',');
  if (parts.size() != 2) throw ConfigError(field, "expected E_R,E_T, got '" + text + "'");
  try {
    return PbsSpec(detail::parse_number(parts[0], field), detail::parse_number(parts[1], field));
  } catch (const std::invalid_argument& e) {
    if (dynamic_cast<const ConfigError*>(&e)) throw;
    throw ConfigError(field, e.what());
  }
}

inline Method parse_method(const std::string& s) {
  if (s == "direct") return Method::kDirect;
  if (s == "three_state") return Method::kThreeState;
  if (s == "weak_probe") return Method::kWeakProbe;
  throw ConfigError("methods", "unknown method '" + s + "'");
}

inline std::vector<Method> parse_methods(const std::string& text) {
  std::vector<Method> out;
  for (const auto& p : detail::split(text, ',')) out.push_back(parse_method(p));
  return out;
}

inline Relation parse_relation(const std::string& s) {
  for (Relation r : kAllRelations)
    if (s == to_string(r)) return r;
  throw ConfigError("kind", "unknown relation '" + s + "'");
}

inline StatisticsMode parse_mode(const std::string& s) {
  if (s == "exact") return StatisticsMode::kExact;
  if (s == "mc") return StatisticsMode::kMonteCarlo;
  throw ConfigError("mode", "expected exact or mc, got '" + s + "'");
}

inline Normalization parse_norm(const std::string& s) {
  if (s == "grand_total") return Normalization::kGrandTotal;
  if (s == "paper") return Normalization::kPerMaOutcome;
  throw ConfigError("norm", "expected grand_total or paper, got '" + s + "'");
}

/// Throws ConfigError naming the first offending field.
inline void validate(const SweepConfig& cfg) {
  for (double g : cfg.grid) {
    if (!(g >= 0.0 && g <= 1.0)) {
      throw ConfigError("grid", "strength " + std::to_string(g) + " outside [0, 1]");
    }
  }
  if (!(cfg.wp_strength > 0.0 && cfg.wp_strength <= 1.0)) {
    throw ConfigError("wp_strength", "must lie in (0, 1], got " + std::to_string(cfg.wp_strength));
  }
  parse_signal(cfg.signal);
  if (cfg.reps < 1) throw ConfigError("reps", "must be at least 1");
  if (cfg.total < 1) throw ConfigError("total", "must be positive");
  if (cfg.methods.empty()) throw ConfigError("methods", "at least one method is required");
  for (std::size_t a = 0; a < cfg.methods.size(); ++a)
    for (std::size_t b = a + 1; b < cfg.methods.size(); ++b)
      if (cfg.methods[a] == cfg.methods[b]) throw ConfigError("methods", "duplicate method");
}

// ---------------------------------------------------------------------------
// JSON config files.

inline nlohmann::json to_json(const PbsSpec& p) {
  if (p.is_ideal()) return "ideal";
  return nlohmann::json::array({p.e_r, p.e_t});
}

inline nlohmann::json config_to_json(const SweepConfig& cfg) {
  nlohmann::json j;
  j["grid"] = cfg.grid;
  j["wp_strength"] = cfg.wp_strength;
  j["signal"] = cfg.signal;
  if (cfg.apparatus) {
    j["apparatus"] = {{"wp", to_json(cfg.apparatus->wp_pbs)},
                      {"ma", to_json(cfg.apparatus->ma_pbs)},
                      {"post", to_json(cfg.apparatus->post_pbs)}};
  } else {
    j["apparatus"] = "ideal";
  }
  j["mode"] = to_string(cfg.mode);
  j["total"] = cfg.total;
  j["reps"] = cfg.reps;
  j["seed"] = cfg.seed;
  std::vector<std::string> methods;
  for (Method m : cfg.methods) methods.emplace_back(to_string(m));
  j["methods"] = methods;
  j["norm"] = to_string(cfg.norm);
  return j;
}

namespace detail {

template <typename T>
T get_field(const nlohmann::json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(key, std::string("malformed value: ") + e.what());
  }
}

inline PbsSpec pbs_from_json(const nlohmann::json& j, const std::string& field) {
  if (j.is_string() && j.get<std::string>() == "ideal") return PbsSpec::ideal();
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(field, "expected [e_r, e_t] or \"ideal\"");
  }
  try {
    return PbsSpec(j[0].get<double>(), j[1].get<double>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field, e.what());
  }
}

}  // namespace detail

/// Builds a config from JSON, filling defaults for absent keys. Unknown keys
/// are rejected.
inline SweepConfig config_from_json(const nlohmann::json& j) {
  SweepConfig cfg;
  if (j.is_null()) return cfg;
  if (!j.is_object()) throw ConfigError("config", "top level must be an object");
  static const char* kKnown[] = {"grid", "wp_strength", "signal", "apparatus", "mode", "total",
                                 "reps", "seed", "methods", "norm"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown)) {
      throw ConfigError(key, "unknown key");
    }
  }
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    if (g.is_string()) {
      cfg.grid = parse_grid(g.get<std::string>());
    } else {
      cfg.grid = detail::get_field<std::vector<double>>(j, "grid");
    }
  }
  if (j.contains("wp_strength")) cfg.wp_strength = detail::get_field<double>(j, "wp_strength");
  if (j.contains("signal")) cfg.signal = detail::get_field<std::string>(j, "signal");
  if (j.contains("apparatus")) {
    const auto& a = j["apparatus"];
    if (a.is_string()) {
      if (a.get<std::string>() != "ideal") throw ConfigError("apparatus", "expected \"ideal\" or an object");
      cfg.apparatus.reset();
    } else if (a.is_object()) {
      ApparatusSpec spec;
      for (const auto& [key, value] : a.items()) {
        if (key == "wp") {
          spec.wp_pbs = detail::pbs_from_json(value, "apparatus.wp");
        } else if (key == "ma") {
          spec.ma_pbs = detail::pbs_from_json(value, "apparatus.ma");
        } else if (key == "post") {
          spec.post_pbs = detail::pbs_from_json(value, "apparatus.post");
        } else {
          throw ConfigError("apparatus." + key, "unknown key");
        }
      }
      cfg.apparatus = spec;
    } else {
      throw ConfigError("apparatus", "expected \"ideal\" or an object");
    }
  }
  if (j.contains("mode")) cfg.mode = parse_mode(detail::get_field<std::string>(j, "mode"));
  if (j.contains("total")) {
    const auto t = detail::get_field<std::int64_t>(j, "total");
    if (t < 1) throw ConfigError("total", "must be positive");
    cfg.total = static_cast<std::uint64_t>(t);
  }
  if (j.contains("reps")) cfg.reps = detail::get_field<int>(j, "reps");
  if (j.contains("seed")) cfg.seed = detail::get_field<std::uint64_t>(j, "seed");
  if (j.contains("methods")) {
    cfg.methods.clear();
    for (const auto& m : detail::get_field<std::vector<std::string>>(j, "methods")) {
      cfg.methods.push_back(parse_method(m));
    }
  }
  if (j.contains("norm")) cfg.norm = parse_norm(detail::get_field<std::string>(j, "norm"));
  validate(cfg);
  return cfg;
}

inline SweepConfig parse_config_text(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return SweepConfig{};
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", std::string("malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline SweepConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

// ---------------------------------------------------------------------------
// Sweeps.

struct FigureRow {
  Method method = Method::kDirect;
  double strength = 0.0;
  double eps = 0.0;
  double eta = 0.0;
  std::optional<double> eps_err;  // Monte Carlo weak-probe rows only
  std::optional<double> eta_err;
  double sigma_a = 0.0;
  double sigma_b = 0.0;
  double c_bound = 0.0;
  double lhs_heisenberg = 0.0;
  double lhs_ozawa = 0.0;
  double lhs_branciard = 0.0;
  double lhs_branciard_tight = 0.0;
  bool heisenberg_ok = false;
  bool ozawa_ok = false;
  bool branciard_ok = false;
  bool branciard_tight_ok = false;
  std::optional<RunStats> mc;  // per-repetition data for structured output
};

/// Instruments for one grid point, ideal or built from the apparatus spec.
struct PointInstruments {
  MeasurementStage wp_z;
  MeasurementStage wp_x;
  MeasurementStage ma;
  MeasurementStage post;
};

inline PointInstruments instruments_for(double strength, double wp_strength,
                                        const std::optional<ApparatusSpec>& apparatus) {
  const double theta = theta_from_strength(strength);
  const double theta_w = theta_from_strength(wp_strength);
  if (!apparatus) {
    return {make_stage(theta_w, Basis::kZ), make_stage(theta_w, Basis::kX),
            make_stage(theta, Basis::kZ), make_stage(0.0, Basis::kX)};
  }
  return {imperfect_stage(theta_w, Basis::kZ, apparatus->wp_pbs),
          imperfect_stage(theta_w, Basis::kX, apparatus->wp_pbs),
          imperfect_stage(theta, Basis::kZ, apparatus->ma_pbs),
          imperfect_stage(0.0, Basis::kX, apparatus->post_pbs)};
}

inline FigureRow make_row(const EdrPoint& point) {
  EdrPoint clamped = point;
  clamped.eps = std::clamp(point.eps, 0.0, 2.0);
  clamped.eta = std::clamp(point.eta, 0.0, 2.0);
  const EdrReport r = edr_report(clamped);
  FigureRow row;
  row.method = point.method;
  row.strength = point.strength;
  row.eps = point.eps;
  row.eta = point.eta;
  row.sigma_a = point.sigma_a;
  row.sigma_b = point.sigma_b;
  row.c_bound = point.c_bound;
  row.lhs_heisenberg = r.lhs_heisenberg;
  row.lhs_ozawa = r.lhs_ozawa;
  row.lhs_branciard = r.lhs_branciard;
  row.lhs_branciard_tight = r.lhs_branciard_tight;
  row.heisenberg_ok = r.heisenberg_ok;
  row.ozawa_ok = r.ozawa_ok;
  row.branciard_ok = r.branciard_ok;
  row.branciard_tight_ok = r.branciard_tight_ok;
  return row;
}

inline std::vector<FigureRow> sweep_point(const SweepConfig& cfg, const StateVector& psi,
                                          std::size_t grid_index) {
  const double g = cfg.grid[grid_index];
  const PointInstruments inst = instruments_for(g, cfg.wp_strength, cfg.apparatus);
  const DensityMatrix rho_in = state_entering_ma(psi, inst.wp_z);

  EdrPoint base;
  base.strength = g;
  base.sigma_a = std_dev(pauli_z(), rho_in);
  base.sigma_b = std_dev(pauli_x(), rho_in);
  base.c_bound = commutator_bound(pauli_z(), pauli_x(), rho_in);

  std::vector<FigureRow> rows;
  for (Method m : cfg.methods) {
    EdrPoint p = base;
    p.method = m;
    switch (m) {
      case Method::kDirect:
        p.eps = direct_error(inst.ma, psi);
        p.eta = direct_disturbance(inst.ma, psi);
        rows.push_back(make_row(p));
        break;
      case Method::kThreeState:
        p.eps = three_state_error(inst.ma, psi);
        p.eta = three_state_disturbance(inst.ma, psi);
        rows.push_back(make_row(p));
        break;
      case Method::kWeakProbe: {
        const JointTable3 z_chain = chain_distribution(ChainConfig(psi, inst.wp_z, inst.ma, inst.post));
        const JointTable3 x_chain = chain_distribution(ChainConfig(psi, inst.wp_x, inst.ma, inst.post));
        if (cfg.mode == StatisticsMode::kExact) {
          p.eps = weak_probe_error(marginal_joint(z_chain, OutcomePair::kWpMa), cfg.wp_strength);
          p.eta = weak_probe_disturbance(marginal_joint(x_chain, OutcomePair::kWpPost), cfg.wp_strength);
          rows.push_back(make_row(p));
        } else {
          RepetitionPlan plan{cfg.total, cfg.reps, cfg.seed, grid_index, cfg.norm};
          RunStats stats = run_repetitions(z_chain, x_chain, cfg.wp_strength, p, plan);
          p.eps = stats.eps_mean;
          p.eta = stats.eta_mean;
          FigureRow row = make_row(p);
          row.eps_err = stats.eps_rms;
          row.eta_err = stats.eta_rms;
          row.mc = std::move(stats);
          rows.push_back(std::move(row));
        }
        break;
      }
    }
  }
  return rows;
}

/// One row per grid point per method, ordered by (strength, method).
/// Grid points are evaluated concurrently; Monte Carlo streams are keyed by
/// (seed, grid index, repetition) so the output does not depend on timing.
inline std::vector<FigureRow> run_sweep(const SweepConfig& cfg) {
  validate(cfg);
  const StateVector psi = parse_signal(cfg.signal);
  std::vector<std::future<std::vector<FigureRow>>> jobs;
  jobs.reserve(cfg.grid.size());
  for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
    jobs.push_back(std::async(std::launch::async, [&cfg, &psi, i] { return sweep_point(cfg, psi, i); }));
  }
  std::vector<FigureRow> rows;
  for (auto& job : jobs) {
    for (auto& r : job.get()) rows.push_back(std::move(r));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const FigureRow& a, const FigureRow& b) {
    if (a.strength != b.strength) return a.strength < b.strength;
    return static_cast<int>(a.method) < static_cast<int>(b.method);
  });
  return rows;
}

struct BoundRow {
  double eps;
  std::optional<double> min_eta;  // empty where the bound is infinite
};

inline std::vector<BoundRow> emit_bounds_curve(Relation kind, double c,
                                               const std::vector<double>& eps_grid,
                                               double sigma_a = 1.0, double sigma_b = 1.0) {
  std::vector<BoundRow> rows;
  rows.reserve(eps_grid.size());
  for (double eps : eps_grid) {
    const double eta = min_disturbance_bound(kind, eps, sigma_a, sigma_b, c);
    rows.push_back({eps, std::isinf(eta) ? std::nullopt : std::optional<double>(eta)});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV output: comma separated, '.' decimal, header row, newline-terminated.

inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

inline std::string figure_csv_header() {
  return "method,strength,eps,eta,eps_err,eta_err,sigma_a,sigma_b,c_bound,lhs_heisenberg,"
         "lhs_ozawa,lhs_branciard,lhs_branciard_tight,heisenberg_ok,ozawa_ok,branciard_ok,"
         "branciard_tight_ok";
}

inline std::string figure_csv_row(const FigureRow& r) {
  std::string s = to_string(r.method);
  for (double v : {r.strength, r.eps, r.eta}) s += ',' + format_number(v);
  s += ',' + format_optional(r.eps_err);
  s += ',' + format_optional(r.eta_err);
  for (double v : {r.sigma_a, r.sigma_b, r.c_bound, r.lhs_heisenberg, r.lhs_ozawa, r.lhs_branciard,
                   r.lhs_branciard_tight}) {
    s += ',' + format_number(v);
  }
  for (bool b : {r.heisenberg_ok, r.ozawa_ok, r.branciard_ok, r.branciard_tight_ok}) {
    s += b ? ",1" : ",0";
  }
  return s;
}

inline void write_figure_csv(std::ostream& os, const std::vector<FigureRow>& rows) {
  os << figure_csv_header() << '\n';
  for (const auto& r : rows) os << figure_csv_row(r) << '\n';
}

inline nlohmann::json point_to_json(const EdrPoint& p) {
  return {{"strength", p.strength}, {"eps", p.eps},         {"eta", p.eta},
          {"sigma_a", p.sigma_a},   {"sigma_b", p.sigma_b}, {"c_bound", p.c_bound},
          {"method", to_string(p.method)}};
}

/// Full config plus every row, with per-repetition estimates and raw counts
/// for Monte Carlo rows.
inline nlohmann::json figure_report_json(const SweepConfig& cfg, const std::vector<FigureRow>& rows) {
  nlohmann::json out;
  out["config"] = config_to_json(cfg);
  out["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j = {{"method", to_string(r.method)},
                        {"strength", r.strength},
                        {"eps", r.eps},
                        {"eta", r.eta},
                        {"sigma_a", r.sigma_a},
                        {"sigma_b", r.sigma_b},
                        {"c_bound", r.c_bound},
                        {"lhs_heisenberg", r.lhs_heisenberg},
                        {"lhs_ozawa", r.lhs_ozawa},
                        {"lhs_branciard", r.lhs_branciard},
                        {"lhs_branciard_tight", r.lhs_branciard_tight},
                        {"heisenberg_ok", r.heisenberg_ok},
                        {"ozawa_ok", r.ozawa_ok},
                        {"branciard_ok", r.branciard_ok},
                        {"branciard_tight_ok", r.branciard_tight_ok}};
    j["eps_err"] = r.eps_err ? nlohmann::json(*r.eps_err) : nlohmann::json(nullptr);
    j["eta_err"] = r.eta_err ? nlohmann::json(*r.eta_err) : nlohmann::json(nullptr);
    if (r.mc) {
      nlohmann::json reps = nlohmann::json::array();
      for (std::size_t k = 0; k < r.mc->repetitions.size(); ++k) {
        nlohmann::json rep = point_to_json(r.mc->repetitions[k]);
        rep["error_counts"] = r.mc->error_counts[k].n;
        rep["disturbance_counts"] = r.mc->disturbance_counts[k].n;
        rep["error_seed"] = r.mc->error_counts[k].seed;
        rep["disturbance_seed"] = r.mc->disturbance_counts[k].seed;
        reps.push_back(rep);
      }
      j["repetitions"] = reps;
    }
    out["rows"].push_back(j);
  }
  return out;
}

inline std::string bounds_csv_header() { return "kind,eps,min_eta"; }

inline std::string bounds_csv_row(Relation kind, const BoundRow& r) {
  return std::string(to_string(kind)) + ',' + format_number(r.eps) + ',' + format_optional(r.min_eta);
}

}  // namespace edrsim
