// edrsim command-line front end.
//
// Exit codes: 0 success, 2 bad configuration or usage, 3 numerical failure
// or failed self-check, 1 anything else.

#include "edrsim/edrsim.hpp"
#include "edrsim/validate.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

namespace {

using namespace edrsim;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct SweepFlags {
  std::string config;
  std::string grid;
  double wp_strength = 0;
  std::string signal;
  std::string pbs_wp, pbs_ma, pbs_post;
  std::string mode;
  std::uint64_t total = 0;
  int reps = 0;
  std::uint64_t seed = 0;
  std::string methods;
  std::string norm;
  std::string out;
  std::string format = "csv";
  bool emit_config = false;
};

// Options registered on a subcommand, kept so we can ask which were given.
struct SweepOptions {
  CLI::Option* grid;
  CLI::Option* wp_strength;
  CLI::Option* signal;
  CLI::Option* pbs_wp;
  CLI::Option* pbs_ma;
  CLI::Option* pbs_post;
  CLI::Option* mode;
  CLI::Option* total;
  CLI::Option* reps;
  CLI::Option* seed;
  CLI::Option* methods;
  CLI::Option* norm;
};

SweepOptions add_sweep_options(CLI::App* cmd, SweepFlags& f) {
  cmd->add_option("--config", f.config, "JSON config file; flags override its values");
  SweepOptions o;
  o.grid = cmd->add_option("--grid", f.grid, "MA strengths: comma list or LO:HI:COUNT");
  o.wp_strength = cmd->add_option("--wp-strength", f.wp_strength, "weak-probe strength in (0, 1]");
  o.signal = cmd->add_option("--signal", f.signal, "y+, y-, x+, x-, z+, z- or bloch:POLAR,AZIMUTH");
  o.pbs_wp = cmd->add_option("--pbs-wp", f.pbs_wp, "WP beamsplitter E_R,E_T or ideal");
  o.pbs_ma = cmd->add_option("--pbs-ma", f.pbs_ma, "MA beamsplitter E_R,E_T or ideal");
  o.pbs_post = cmd->add_option("--pbs-post", f.pbs_post, "post beamsplitter E_R,E_T or ideal");
  o.mode = cmd->add_option("--mode", f.mode, "exact or mc");
  o.total = cmd->add_option("--total", f.total, "detection events per Monte Carlo run");
  o.reps = cmd->add_option("--reps", f.reps, "Monte Carlo repetitions");
  o.seed = cmd->add_option("--seed", f.seed, "base seed");
  o.methods = cmd->add_option("--methods", f.methods, "comma list of direct, three_state, weak_probe");
  o.norm = cmd->add_option("--norm", f.norm, "count normalization: grand_total or paper");
  cmd->add_option("--out", f.out, "output file (default stdout)");
  return o;
}

bool given(const CLI::Option* o) { return o->count() > 0; }

SweepConfig resolve_config(const SweepFlags& f, const SweepOptions& o) {
  SweepConfig cfg = f.config.empty() ? SweepConfig{} : parse_config_file(f.config);
  if (given(o.grid)) cfg.grid = parse_grid(f.grid);
  if (given(o.wp_strength)) cfg.wp_strength = f.wp_strength;
  if (given(o.signal)) cfg.signal = f.signal;
  if (given(o.pbs_wp) || given(o.pbs_ma) || given(o.pbs_post)) {
    ApparatusSpec a = cfg.apparatus.value_or(ApparatusSpec::ideal());
    if (given(o.pbs_wp)) a.wp_pbs = parse_pbs(f.pbs_wp, "pbs_wp");
    if (given(o.pbs_ma)) a.ma_pbs = parse_pbs(f.pbs_ma, "pbs_ma");
    if (given(o.pbs_post)) a.post_pbs = parse_pbs(f.pbs_post, "pbs_post");
    cfg.apparatus = a;
  }
  if (given(o.mode)) cfg.mode = parse_mode(f.mode);
  if (given(o.total)) cfg.total = f.total;
  if (given(o.reps)) cfg.reps = f.reps;
  if (given(o.seed)) cfg.seed = f.seed;
  if (given(o.methods)) cfg.methods = parse_methods(f.methods);
  if (given(o.norm)) cfg.norm = parse_norm(f.norm);
  validate(cfg);
  return cfg;
}

// Writes to --out when set, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw ConfigError("out", "cannot open '" + path + "' for writing");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

int run_sweep_command(const SweepFlags& f, const SweepOptions& o) {
  const SweepConfig cfg = resolve_config(f, o);
  if (f.emit_config) {
    Output out(f.out);
    out.stream() << config_to_json(cfg).dump(2) << '\n';
    return 0;
  }
  const std::vector<FigureRow> rows = run_sweep(cfg);
  Output out(f.out);
  if (f.format == "json") {
    out.stream() << figure_report_json(cfg, rows).dump(2) << '\n';
  } else {
    write_figure_csv(out.stream(), rows);
  }
  return 0;
}

int run_counts_command(const SweepFlags& f, const SweepOptions& o) {
  const SweepConfig cfg = resolve_config(f, o);
  const StateVector psi = parse_signal(cfg.signal);
  Output out(f.out);
  std::ostream& os = out.stream();
  os << "strength,chain,rep," << CountsRecord::csv_header() << '\n';
  for (std::size_t gi = 0; gi < cfg.grid.size(); ++gi) {
    const double g = cfg.grid[gi];
    const PointInstruments inst = instruments_for(g, cfg.wp_strength, cfg.apparatus);
    const JointTable3 z_chain = chain_distribution(ChainConfig(psi, inst.wp_z, inst.ma, inst.post));
    const JointTable3 x_chain = chain_distribution(ChainConfig(psi, inst.wp_x, inst.ma, inst.post));
    EdrPoint base;
    base.strength = g;
    const RunStats stats = run_repetitions(z_chain, x_chain, cfg.wp_strength, base,
                                           {cfg.total, cfg.reps, cfg.seed, gi, cfg.norm});
    for (int r = 0; r < cfg.reps; ++r) {
      os << format_number(g) << ",error," << r << ',' << stats.error_counts[r].csv_row() << '\n';
      os << format_number(g) << ",disturbance," << r << ',' << stats.disturbance_counts[r].csv_row()
         << '\n';
    }
  }
  return 0;
}

int run_bounds_command(const std::string& kind, double c, const std::string& grid_text,
                       double sigma_a, double sigma_b, const std::string& out_path) {
  std::vector<Relation> kinds;
  if (kind == "all") {
    kinds.assign(std::begin(kAllRelations), std::end(kAllRelations));
  } else {
    kinds.push_back(parse_relation(kind));
  }
  const std::vector<double> grid = parse_grid(grid_text);
  for (double e : grid) {
    if (!(e >= 0.0)) throw ConfigError("grid", "eps must be non-negative");
  }
  if (!(c >= 0.0)) throw ConfigError("c", "must be non-negative");
  if (!(sigma_a > 0.0) || !(sigma_b > 0.0)) throw ConfigError("sigma", "must be positive");
  Output out(out_path);
  out.stream() << bounds_csv_header() << '\n';
  for (Relation k : kinds) {
    for (const BoundRow& r : emit_bounds_curve(k, c, grid, sigma_a, sigma_b)) {
      out.stream() << bounds_csv_row(k, r) << '\n';
    }
  }
  return 0;
}

int run_validate_command(std::uint64_t seed) {
  bool all = true;
  for (const CheckResult& r : run_validation(seed)) {
    std::printf("%s %s (worst %.3g, tol %.3g)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.worst, r.tolerance);
    all = all && r.passed;
  }
  return all ? 0 : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak-probe simulation of error-disturbance relations for qubit measurements"};
  app.require_subcommand(1);

  SweepFlags sweep_flags;
  CLI::App* sweep = app.add_subcommand("sweep", "ε and η over a strength grid, with relation checks");
  const SweepOptions sweep_opts = add_sweep_options(sweep, sweep_flags);
  sweep->add_option("--format", sweep_flags.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  sweep->add_flag("--emit-config", sweep_flags.emit_config, "print the resolved config as JSON and exit");

  SweepFlags counts_flags;
  CLI::App* counts = app.add_subcommand("counts", "raw Monte Carlo detector counts");
  const SweepOptions counts_opts = add_sweep_options(counts, counts_flags);

  std::string kind = "all";
  double c = 1.0;
  double sigma_a = 1.0;
  double sigma_b = 1.0;
  std::string bounds_grid = "0:2:101";
  std::string bounds_out;
  CLI::App* bounds = app.add_subcommand("bounds", "minimum-disturbance curves η_min(ε)");
  bounds->add_option("--kind", kind, "heisenberg, ozawa, branciard, branciard_tight or all");
  bounds->add_option("--c", c, "commutator bound C");
  bounds->add_option("--sigma-a", sigma_a, "σ(A)");
  bounds->add_option("--sigma-b", sigma_b, "σ(B)");
  bounds->add_option("--grid", bounds_grid, "ε values: comma list or LO:HI:COUNT");
  bounds->add_option("--out", bounds_out, "output file (default stdout)");

  std::uint64_t validate_seed = 2024;
  CLI::App* check = app.add_subcommand("validate", "run the built-in invariant checks");
  check->add_option("--seed", validate_seed, "seed for the random states");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*sweep) return run_sweep_command(sweep_flags, sweep_opts);
    if (*counts) return run_counts_command(counts_flags, counts_opts);
    if (*bounds) return run_bounds_command(kind, c, bounds_grid, sigma_a, sigma_b, bounds_out);
    if (*check) return run_validate_command(validate_seed);
  } catch (const ConfigError& e) {
    std::cerr << "edrsim: invalid " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "edrsim: numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "edrsim: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "edrsim: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
