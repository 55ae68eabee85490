#include "sphereq/cli.hpp"

#include "sphereq/error.hpp"
#include "sphereq/io.hpp"
#include "sphereq/support.hpp"
#include "sphereq/verify.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>

namespace sphereq::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::string figure;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::size_t> n;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> grid;
  std::string solution;
  std::string points;
  bool planar = false;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("-c,--config", o.config, "JSON configuration file, '-' for stdin");
  cmd->add_option("-f,--figure", o.figure, "Built-in preset: 1, 1b, 2, 3, 3b, 4");
  cmd->add_option("-o,--out", o.out_dir, "Output directory");
  cmd->add_option("--seed", o.seed, "Random seed (overrides RE_SEED and the config)");
}

std::string read_all(std::istream& is) { return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()}; }

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "'");
  return read_all(f);
}

// Command-line flags, then RE_SEED, then the config itself.
void apply_overrides(RunConfig& cfg, const Options& o) {
  std::optional<std::uint64_t> seed = o.seed;
  if (!seed) {
    if (const char* env = std::getenv("RE_SEED"); env && *env) {
      try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(env, &used);
        if (used != std::string(env).size() || std::string(env).front() == '-') throw std::invalid_argument(env);
        seed = v;
      } catch (const std::exception&) {
        throw ConfigError(std::string("RE_SEED: not a nonnegative integer: ") + env);
      }
    }
  }
  if (seed) {
    cfg.optimize.settings.seed = *seed;
    cfg.verify.variational.seed = *seed;
  }
  if (o.threads) cfg.optimize.settings.threads = *o.threads;
  if (o.n) cfg.optimize.n = *o.n;
  if (o.samples) cfg.verify.variational.samples = *o.samples;
  if (o.grid) cfg.verify.variational.grid = *o.grid;
  if (o.planar) cfg.planar = true;
  try {
    cfg.optimize.settings.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (cfg.optimize.n < 2) throw ConfigError("--n: need at least two points");
  if (cfg.verify.variational.grid < 2 || cfg.verify.variational.samples < 2)
    throw ConfigError("--grid and --samples must be at least 2");
}

RunConfig load_config(const Options& o, std::istream& in, std::ostream& err) {
  if (!o.config.empty() && !o.figure.empty()) throw ConfigError("give either --config or --figure, not both");
  RunConfig cfg;
  if (!o.figure.empty()) {
    cfg = figure_preset(o.figure);
  } else if (!o.config.empty()) {
    cfg = parse_config_text(o.config == "-" ? read_all(in) : read_file(o.config));
  } else {
    throw ConfigError("no problem given (use --config or --figure)");
  }
  for (const auto& w : cfg.warnings) err << "warning: " << w << '\n';
  apply_overrides(cfg, o);
  return cfg;
}

fs::path prepare_out(const Options& o) {
  fs::path dir(o.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + o.out_dir + "': " + ec.message());
  return dir;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << doc.dump(2) << '\n';
}

json base_record(const std::string& command, const RunConfig& cfg) {
  return {{"format", "sphereq-result/1"}, {"command", command}, {"problem", problem_to_json(cfg.problem)}};
}

json influence_json(const std::vector<Cap>& caps, const ProblemSpec& spec) {
  json arr = json::array();
  const double q = spec.total_charge();
  for (std::size_t i = 0; i < caps.size(); ++i) {
    json c = cap_to_json(caps[i]);
    c["source"] = i + 1;
    c["reduced_charge"] = reduced_charge(q, spec.sources[i].charge);
    arr.push_back(std::move(c));
  }
  const auto report = caps_pairwise_disjoint(caps);
  json overlaps = json::array();
  for (const auto& v : report.violations) overlaps.push_back({{"caps", {v.i + 1, v.j + 1}}, {"margin", v.margin}});
  return {{"caps", arr}, {"disjoint", report.disjoint}, {"overlaps", overlaps}};
}

void print_caps(std::ostream& out, const std::vector<Cap>& caps) {
  for (std::size_t i = 0; i < caps.size(); ++i) {
    out << "  cap " << i + 1 << ": gamma = " << format_double(caps[i].gamma) << ", t = " << format_double(caps[i].t)
        << ", alpha = " << format_double(caps[i].alpha) << '\n';
  }
}

void print_overlaps(std::ostream& err, const DisjointnessReport& report) {
  for (const auto& v : report.violations) {
    err << "overlap: caps " << v.i + 1 << " and " << v.j + 1 << " (margin " << format_double(v.margin) << ")\n";
  }
}

// ---------------------------------------------------------------------------

int cmd_solve(const RunConfig& cfg, const fs::path& dir, std::ostream& out, std::ostream& err) {
  const ProblemSpec& spec = cfg.problem;
  json rec = base_record("solve", cfg);
  if (spec.d == 2 && spec.s == 1) {
    const auto caps = influence_radii(spec);
    rec["influence"] = influence_json(caps, spec);
    write_json(dir / "result.json", rec);
    out << "Coulomb problem on S^2: support not in closed form, influence caps:\n";
    print_caps(out, caps);
    return kOk;
  }
  SupportSolution sol;
  try {
    sol = solve(spec);
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
  rec["solution"] = solution_to_json(sol, spec);
  if (sol.feasible && cfg.planar && spec.d == 2 && spec.s == 0) rec["planar"] = planar_to_json(kelvin_planar(spec));
  write_json(dir / "result.json", rec);
  if (sol.feasible) {
    std::ofstream f(dir / "density_profile.csv");
    write_density_profile_csv(f, spec, sol);
  }
  out << "support of S^" << spec.d << " minus " << sol.region.caps.size() << " caps (s = " << spec.s << ")\n";
  print_caps(out, sol.region.caps);
  out << "  C = " << format_double(sol.normalization) << ", F_Q = " << format_double(sol.equilibrium_constant)
      << ", feasible = " << (sol.feasible ? "yes" : "no") << '\n';
  if (!sol.feasible) {
    print_overlaps(err, sol.disjointness);
    return kInfeasible;
  }
  return kOk;
}

int cmd_optimize(const RunConfig& cfg, const fs::path& dir, std::ostream& out, std::ostream& err) {
  const ProblemSpec& spec = cfg.problem;
  if (spec.d != 2) throw ConfigError("optimize: only d = 2 is supported");
  const PointConfiguration conf = multistart(spec, cfg.optimize.n, cfg.optimize.settings);

  json rec = base_record("optimize", cfg);
  rec["settings"] = {{"n", cfg.optimize.n},
                     {"seed", cfg.optimize.settings.seed},
                     {"restart_count", cfg.optimize.settings.restart_count},
                     {"threads", cfg.optimize.settings.threads}};
  rec["configuration"] = configuration_to_json(conf);
  std::vector<Cap> caps;
  if (spec.s == 0 || spec.s == 1) caps = influence_radii(spec);
  const VerificationReport exclusion = check_cap_exclusion(conf.points, caps);
  rec["cap_exclusion"] = report_to_json(exclusion);
  if (!caps.empty()) rec["influence"] = influence_json(caps, spec);
  write_json(dir / "result.json", rec);
  {
    std::ofstream f(dir / "points.csv");
    write_points_csv(f, conf.points, spec);
  }
  out << "N = " << conf.size() << ", energy = " << format_double(conf.energy)
      << ", |grad|_inf = " << format_double(conf.grad_inf_norm) << ", restarts = " << conf.restarts_used
      << ", cap violations = " << exclusion.statistic << '\n';
  if (conf.line_search_failed) {
    err << "optimizer: line search failed in every restart; best configuration written\n";
    return kOptimizerFailure;
  }
  return kOk;
}

int cmd_verify(const Options& o, std::istream& in, const fs::path& dir, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  SupportSolution sol;
  if (!o.solution.empty()) {
    json doc;
    try {
      doc = json::parse(read_file(o.solution));
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("malformed solution file: ") + e.what());
    }
    if (!doc.contains("problem") || !doc.contains("solution")) throw ConfigError("solution file lacks problem/solution");
    cfg = parse_config(doc["problem"]);
    apply_overrides(cfg, o);
    sol = solution_from_json(doc["solution"], cfg.problem.d);
  } else {
    cfg = load_config(o, in, err);
    try {
      sol = solve(cfg.problem);
    } catch (const std::domain_error& e) {
      throw ConfigError(e.what());
    }
  }

  json rec = base_record("verify", cfg);
  rec["feasible"] = sol.feasible;
  if (!sol.feasible) {
    write_json(dir / "result.json", rec);
    print_overlaps(err, sol.disjointness);
    out << "infeasible: caps overlap, nothing to verify\n";
    return kInfeasible;
  }
  std::vector<VerificationReport> reports;
  reports.push_back(check_variational(sol, cfg.problem, cfg.verify.variational));
  if (!o.points.empty()) {
    std::ifstream f(o.points);
    if (!f) throw ConfigError("cannot open '" + o.points + "'");
    const Eigen::Matrix3Xd pts = read_points_csv(f);
    reports.push_back(check_cap_exclusion(pts, sol.region.caps));
    const auto windows = support_windows(sol.region, cfg.verify.windows, cfg.verify.window_radius,
                                         cfg.verify.variational.seed);
    reports.push_back(check_empirical_density(pts, sol, windows, cfg.verify.density_tol));
  }
  json arr = json::array();
  bool all = true;
  for (const auto& r : reports) {
    arr.push_back(report_to_json(r));
    all = all && r.pass;
    out << (r.pass ? "PASS " : "FAIL ") << r.name << ": statistic " << format_double(r.statistic) << " (tolerance "
        << format_double(r.tolerance) << ")" << (r.message.empty() ? "" : "; " + r.message) << '\n';
  }
  rec["reports"] = arr;
  write_json(dir / "result.json", rec);
  return all ? kOk : kVerificationFailed;
}

int cmd_kelvin(const RunConfig& cfg, const fs::path& dir, std::ostream& out, std::ostream& err) {
  const ProblemSpec& spec = cfg.problem;
  if (spec.d != 2 || spec.s != 0) throw ConfigError("kelvin: needs d = 2 and s = 0");
  json rec = base_record("kelvin", cfg);
  const SupportSolution sol = solve_log(spec);
  if (!sol.feasible) {
    rec["solution"] = solution_to_json(sol, spec);
    write_json(dir / "result.json", rec);
    print_overlaps(err, sol.disjointness);
    return kInfeasible;
  }
  const PlanarEquilibrium planar = kelvin_planar(spec);
  const VerificationReport report = check_planar_density(planar);
  rec["planar"] = planar_to_json(planar);
  rec["report"] = report_to_json(report);
  write_json(dir / "result.json", rec);
  out << "planar support: disk of radius " << format_double(planar.outer_radius) << " minus "
      << planar.excluded_discs.size() << " discs; density mass " << format_double(report.detail("mass")) << '\n';
  return report.pass ? kOk : kVerificationFailed;
}

int cmd_influence(const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
  std::vector<Cap> caps;
  try {
    caps = influence_radii(cfg.problem);
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
  json rec = base_record("influence", cfg);
  rec["influence"] = influence_json(caps, cfg.problem);
  write_json(dir / "result.json", rec);
  out << "influence caps (s = " << cfg.problem.s << "):\n";
  print_caps(out, caps);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app("Equilibrium supports and minimal-energy points on spheres with point-source fields", "sphereq");
  app.require_subcommand(1);
  Options o;
  auto* solve_cmd = app.add_subcommand("solve", "Equilibrium support for the configured field");
  auto* optimize_cmd = app.add_subcommand("optimize", "Minimize the discrete energy (multistart)");
  auto* verify_cmd = app.add_subcommand("verify", "Check a solution against independent oracles");
  auto* kelvin_cmd = app.add_subcommand("kelvin", "Planar equilibrium after stereographic projection");
  auto* influence_cmd = app.add_subcommand("influence", "Caps no optimal point can enter");
  for (auto* cmd : {solve_cmd, optimize_cmd, verify_cmd, kelvin_cmd, influence_cmd}) add_common(cmd, o);
  solve_cmd->add_flag("--planar", o.planar, "Also emit the planar equilibrium");
  optimize_cmd->add_option("-n,--n", o.n, "Number of points");
  optimize_cmd->add_option("--threads", o.threads, "Restarts run per batch");
  verify_cmd->add_option("--solution", o.solution, "result.json written by 'solve'");
  verify_cmd->add_option("--points", o.points, "points.csv written by 'optimize'");
  verify_cmd->add_option("--samples", o.samples, "Monte Carlo samples per evaluation point");
  verify_cmd->add_option("--grid", o.grid, "Evaluation points inside and outside the support");

  std::vector<std::string> rev(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    const fs::path dir = prepare_out(o);
    if (verify_cmd->parsed()) return cmd_verify(o, in, dir, out, err);
    const RunConfig cfg = load_config(o, in, err);
    if (solve_cmd->parsed()) return cmd_solve(cfg, dir, out, err);
    if (optimize_cmd->parsed()) return cmd_optimize(cfg, dir, out, err);
    if (kelvin_cmd->parsed()) return cmd_kelvin(cfg, dir, out, err);
    return cmd_influence(cfg, dir, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace sphereq::cli
