#include "sphereq/io.hpp"

#include "sphereq/error.hpp"
#include "sphereq/potential.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace sphereq {

using json = nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (auto key : allowed) known = known || item.key() == key;
    if (!known) throw ConfigError(where + ": unknown field '" + item.key() + "'");
  }
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double as_double(const json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError(what + ": expected a number");
  return v.get<double>();
}

std::int64_t as_integer(const json& v, const std::string& what) {
  if (!v.is_number_integer()) throw ConfigError(what + ": expected an integer");
  return v.get<std::int64_t>();
}

std::size_t as_count(const json& v, const std::string& what) {
  const auto n = as_integer(v, what);
  if (n < 0) throw ConfigError(what + ": must be nonnegative");
  return static_cast<std::size_t>(n);
}

std::uint64_t as_seed(const json& v, const std::string& what) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw ConfigError(what + ": expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

bool as_bool(const json& v, const std::string& what) {
  if (!v.is_boolean()) throw ConfigError(what + ": expected true or false");
  return v.get<bool>();
}

void parse_optimize(const json& obj, OptimizeBlock& out) {
  reject_unknown(obj,
                 {"n", "max_iterations", "gradient_tolerance", "restart_count", "perturbation_scale", "seed",
                  "history_size", "pole_guard", "threads", "record_history"},
                 "optimize");
  auto& s = out.settings;
  if (auto* v = find(obj, "n")) out.n = as_count(*v, "optimize.n");
  if (auto* v = find(obj, "max_iterations")) s.max_iterations = static_cast<int>(as_integer(*v, "optimize.max_iterations"));
  if (auto* v = find(obj, "gradient_tolerance")) s.gradient_tolerance = as_double(*v, "optimize.gradient_tolerance");
  if (auto* v = find(obj, "restart_count")) s.restart_count = static_cast<int>(as_integer(*v, "optimize.restart_count"));
  if (auto* v = find(obj, "perturbation_scale")) s.perturbation_scale = as_double(*v, "optimize.perturbation_scale");
  if (auto* v = find(obj, "seed")) s.seed = as_seed(*v, "optimize.seed");
  if (auto* v = find(obj, "history_size")) s.history_size = static_cast<int>(as_integer(*v, "optimize.history_size"));
  if (auto* v = find(obj, "pole_guard")) s.pole_guard = as_double(*v, "optimize.pole_guard");
  if (auto* v = find(obj, "threads")) s.threads = static_cast<int>(as_integer(*v, "optimize.threads"));
  if (auto* v = find(obj, "record_history")) s.record_history = as_bool(*v, "optimize.record_history");
  if (out.n < 2) throw ConfigError("optimize.n: need at least two points");
  if (s.gradient_tolerance < 0) throw ConfigError("optimize.gradient_tolerance: must be nonnegative");
  try {
    s.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

void parse_verify(const json& obj, VerifyBlock& out) {
  reject_unknown(obj,
                 {"grid", "samples", "seed", "tol_interior", "tol_exterior", "windows", "window_radius", "density_tol"},
                 "verify");
  auto& v = out.variational;
  if (auto* p = find(obj, "grid")) v.grid = as_count(*p, "verify.grid");
  if (auto* p = find(obj, "samples")) v.samples = as_count(*p, "verify.samples");
  if (auto* p = find(obj, "seed")) v.seed = as_seed(*p, "verify.seed");
  if (auto* p = find(obj, "tol_interior")) v.tol_interior = as_double(*p, "verify.tol_interior");
  if (auto* p = find(obj, "tol_exterior")) v.tol_exterior = as_double(*p, "verify.tol_exterior");
  if (auto* p = find(obj, "windows")) out.windows = as_count(*p, "verify.windows");
  if (auto* p = find(obj, "window_radius")) out.window_radius = as_double(*p, "verify.window_radius");
  if (auto* p = find(obj, "density_tol")) out.density_tol = as_double(*p, "verify.density_tol");
  if (v.grid < 2 || v.samples < 2) throw ConfigError("verify: grid and samples must be at least 2");
  if (!(out.window_radius > 0 && out.window_radius < std::numbers::pi))
    throw ConfigError("verify.window_radius: must lie in (0, pi)");
}

}  // namespace

RunConfig parse_config(const json& doc) {
  reject_unknown(doc, {"d", "s", "sources", "optimize", "verify", "planar"}, "config");
  RunConfig cfg;
  const json* d = find(doc, "d");
  const json* s = find(doc, "s");
  const json* sources = find(doc, "sources");
  if (!d || !s || !sources) throw ConfigError("config: 'd', 's' and 'sources' are required");
  const auto dim = as_integer(*d, "d");
  if (dim < 1 || dim > 64) throw ConfigError("d: must lie in [1, 64]");
  cfg.problem.d = static_cast<int>(dim);
  cfg.problem.s = as_double(*s, "s");
  if (!sources->is_array()) throw ConfigError("sources: expected an array");

  for (std::size_t i = 0; i < sources->size(); ++i) {
    const json& src = (*sources)[i];
    const std::string where = "sources[" + std::to_string(i) + "]";
    reject_unknown(src, {"position", "charge"}, where);
    const json* pos = find(src, "position");
    const json* charge = find(src, "charge");
    if (!pos || !charge) throw ConfigError(where + ": 'position' and 'charge' are required");
    if (!pos->is_array() || pos->size() != static_cast<std::size_t>(dim + 1))
      throw ConfigError(where + ".position: expected " + std::to_string(dim + 1) + " coordinates");
    Eigen::VectorXd p(dim + 1);
    for (Eigen::Index k = 0; k < p.size(); ++k) p[k] = as_double((*pos)[static_cast<std::size_t>(k)], where + ".position");
    const double norm = p.norm();
    if (!(norm > 0) || !std::isfinite(norm)) throw ConfigError(where + ".position: zero or non-finite vector");
    if (std::abs(norm - 1) > 1e-9) {
      cfg.warnings.push_back(where + ".position: norm " + format_double(norm) + " renormalized to 1");
    }
    cfg.problem.sources.push_back({SpherePoint(p), as_double(*charge, where + ".charge")});
  }
  try {
    cfg.problem.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (auto* v = find(doc, "optimize")) parse_optimize(*v, cfg.optimize);
  if (auto* v = find(doc, "verify")) parse_verify(*v, cfg.verify);
  if (auto* v = find(doc, "planar")) cfg.planar = as_bool(*v, "planar");
  return cfg;
}

RunConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

RunConfig figure_preset(const std::string& name) {
  const double r91 = std::sqrt(91.0) / 10;
  RunConfig cfg;
  auto& p = cfg.problem;
  p.d = 2;
  p.s = 0;
  const SpherePoint north{0, 0, 1};
  if (name == "1") {
    p.sources = {{north, 0.25}, {SpherePoint{r91, 0, -0.3}, 0.25}};
  } else if (name == "1b") {
    p.sources = {{north, 0.25}, {SpherePoint{4 * std::sqrt(5.0) / 9, 0, -1.0 / 9}, 0.25}};
  } else if (name == "2") {
    p.sources = {{north, 0.25}, {SpherePoint{r91, 0, -0.3}, 0.125}, {SpherePoint{0, std::sqrt(3.0) / 2, -0.5}, 0.05}};
  } else if (name == "3") {
    p.s = 1;
    p.sources = {{north, 0.25}, {SpherePoint{0, r91, -0.3}, 0.25}};
  } else if (name == "3b") {
    p.s = 1;
    p.sources = {{north, 0.25}, {SpherePoint{0, r91, 0.3}, 0.25}};
  } else if (name == "4") {
    p.sources = {{north, 0.25}, {SpherePoint{r91, 0, 0.3}, 0.25}};
  } else {
    throw ConfigError("unknown figure preset '" + name + "' (expected 1, 1b, 2, 3, 3b or 4)");
  }
  return cfg;
}

// ---------------------------------------------------------------------------

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

json vector_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) arr.push_back(v[k]);
  return arr;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_nan(const json& v) { return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>(); }

}  // namespace

json problem_to_json(const ProblemSpec& spec) {
  json sources = json::array();
  for (const auto& src : spec.sources) sources.push_back({{"position", vector_json(src.position.coords())}, {"charge", src.charge}});
  return {{"d", spec.d}, {"s", spec.s}, {"sources", sources}};
}

json cap_to_json(const Cap& cap) {
  return {{"center", vector_json(cap.center.coords())}, {"gamma", cap.gamma}, {"t", cap.t}, {"alpha", cap.alpha}};
}

json solution_to_json(const SupportSolution& solution, const ProblemSpec& spec) {
  json caps = json::array();
  for (std::size_t i = 0; i < solution.region.caps.size(); ++i) {
    json c = cap_to_json(solution.region.caps[i]);
    c["source"] = i + 1;
    if (i < spec.sources.size()) c["charge"] = spec.sources[i].charge;
    if (i < solution.boundary_coefficients.size()) c["boundary_coefficient"] = solution.boundary_coefficients[i];
    caps.push_back(std::move(c));
  }
  json overlaps = json::array();
  for (const auto& v : solution.disjointness.violations) overlaps.push_back({{"caps", {v.i + 1, v.j + 1}}, {"margin", v.margin}});
  return {{"d", solution.region.d},
          {"s", spec.s},
          {"caps", caps},
          {"normalization", solution.normalization},
          {"equilibrium_constant", finite_or_null(solution.equilibrium_constant)},
          {"feasible", solution.feasible},
          {"min_margin", finite_or_null(solution.disjointness.min_margin)},
          {"overlaps", overlaps},
          {"residual", solution.residual},
          {"iterations", solution.iterations}};
}

SupportSolution solution_from_json(const json& doc, int d) {
  try {
    SupportSolution out;
    out.region.d = d;
    for (const auto& c : doc.at("caps")) {
      const auto& center = c.at("center");
      Eigen::VectorXd p(static_cast<Eigen::Index>(center.size()));
      for (std::size_t k = 0; k < center.size(); ++k) p[static_cast<Eigen::Index>(k)] = center[k].get<double>();
      if (p.size() != d + 1) throw ConfigError("solution: cap center has the wrong dimension");
      out.region.caps.push_back(Cap::from_chordal(SpherePoint(p), c.at("gamma").get<double>()));
      if (auto it = c.find("boundary_coefficient"); it != c.end()) out.boundary_coefficients.push_back(it->get<double>());
    }
    out.normalization = doc.at("normalization").get<double>();
    out.equilibrium_constant = number_or_nan(doc.at("equilibrium_constant"));
    out.residual = doc.value("residual", 0.0);
    out.iterations = doc.value("iterations", 0);
    out.disjointness = caps_pairwise_disjoint(out.region.caps);
    out.feasible = out.disjointness.disjoint;
    return out;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("solution: ") + e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(std::string("solution: ") + e.what());
  }
}

json configuration_to_json(const PointConfiguration& config) {
  json out = {{"n", config.size()},
              {"energy", config.energy},
              {"grad_inf_norm", config.grad_inf_norm},
              {"iterations", config.iterations},
              {"restarts_used", config.restarts_used},
              {"converged", config.converged},
              {"line_search_failed", config.line_search_failed}};
  if (!config.energy_history.empty()) out["energy_history"] = config.energy_history;
  return out;
}

json report_to_json(const VerificationReport& report) {
  json details = json::object();
  for (const auto& [k, v] : report.details) details[k] = finite_or_null(v);
  return {{"name", report.name},       {"pass", report.pass},       {"statistic", finite_or_null(report.statistic)},
          {"tolerance", report.tolerance}, {"samples", report.samples}, {"seed", report.seed},
          {"details", details},        {"message", report.message}};
}

json planar_to_json(const PlanarEquilibrium& planar) {
  json discs = json::array();
  for (const auto& d : planar.excluded_discs) {
    discs.push_back({{"center", {d.center.real(), d.center.imag()}}, {"radius", d.radius}});
  }
  json images = json::array();
  for (std::size_t i = 0; i < planar.source_images.size(); ++i) {
    images.push_back({{"position", {planar.source_images[i].real(), planar.source_images[i].imag()}},
                      {"charge", planar.charges[i]}});
  }
  return {{"pole", vector_json(planar.pole.coords())},
          {"outer_radius", planar.outer_radius},
          {"excluded_discs", discs},
          {"source_images", images},
          {"total_charge", planar.total_charge},
          {"density_scale", planar.density_scale}};
}

// ---------------------------------------------------------------------------

void write_points_csv(std::ostream& os, const Eigen::Matrix3Xd& points, const ProblemSpec& spec) {
  os << "# " << kPointsCsvVersion << "; columns: x,y,z,dist_1..dist_" << spec.sources.size()
     << " (chordal distance to source i)\n";
  os << "x,y,z";
  for (std::size_t i = 0; i < spec.sources.size(); ++i) os << ",dist_" << i + 1;
  os << '\n';
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    const Eigen::Vector3d x = points.col(j);
    os << format_double(x.x()) << ',' << format_double(x.y()) << ',' << format_double(x.z());
    for (const auto& src : spec.sources) {
      os << ',' << format_double((x - Eigen::Vector3d(src.position.coords())).norm());
    }
    os << '\n';
  }
}

Eigen::Matrix3Xd read_points_csv(std::istream& is) {
  std::vector<Eigen::Vector3d> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
    std::istringstream ls(line);
    Eigen::Vector3d v;
    std::string cell;
    for (int k = 0; k < 3; ++k) {
      if (!std::getline(ls, cell, ',')) throw ConfigError("points csv: fewer than three columns");
      try {
        v[k] = std::stod(cell);
      } catch (const std::exception&) {
        throw ConfigError("points csv: bad number '" + cell + "'");
      }
    }
    rows.push_back(v);
  }
  Eigen::Matrix3Xd out(3, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = rows[j];
  return out;
}

void write_density_profile_csv(std::ostream& os, const ProblemSpec& spec, const SupportSolution& solution,
                               std::size_t samples) {
  if (spec.sources.empty()) throw std::invalid_argument("density profile: needs a source");
  const Eigen::VectorXd a = spec.sources.front().position.coords();
  // Meridian from the first source towards the second (or any direction).
  Eigen::VectorXd e = Eigen::VectorXd::Zero(a.size());
  if (spec.sources.size() > 1) e = spec.sources[1].position.coords();
  e -= e.dot(a) * a;
  if (e.norm() < 1e-9) {
    Eigen::Index k = 0;
    a.cwiseAbs().minCoeff(&k);
    e = Eigen::VectorXd::Unit(a.size(), k) - a[k] * a;
  }
  e.normalize();

  os << "# " << kProfileCsvVersion << "; columns: xi,weighted_potential,in_support (meridian from source 1)\n";
  os << "xi,weighted_potential,in_support\n";
  for (std::size_t k = 0; k < samples; ++k) {
    const double theta = std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(samples);
    const SpherePoint x(Eigen::VectorXd(std::cos(theta) * a + std::sin(theta) * e));
    std::string value;
    try {
      value = format_double(support_weighted_potential(spec, solution.region.caps, solution.normalization, x));
    } catch (const SingularityError&) {
      value = "inf";
    }
    os << format_double(std::cos(theta)) << ',' << value << ',' << (solution.region.contains(x) ? 1 : 0) << '\n';
  }
}

}  // namespace sphereq
