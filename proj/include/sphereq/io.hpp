///
/// \file io.hpp
///
/// Run configurations (JSON in), result records (JSON out) and the CSV
/// artifacts consumed by plotting scripts.
///
#pragma once

#include "sphereq/discrete.hpp"
#include "sphereq/problem.hpp"
#include "sphereq/support.hpp"
#include "sphereq/verify.hpp"

#include "json.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sphereq {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OptimizeBlock {
  std::size_t n = 500;
  OptimizerSettings settings;
};

struct VerifyBlock {
  VariationalOptions variational;
  std::size_t windows = 20;
  double window_radius = 0.4;  // geodesic
  double density_tol = 0.02;
};

struct RunConfig {
  ProblemSpec problem;
  OptimizeBlock optimize;
  VerifyBlock verify;
  bool planar = false;
  std::vector<std::string> warnings;
};

/// Validates the document; unknown keys and wrong types raise ConfigError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(std::string_view text);

/// Built-in parameter sets: "1", "1b", "2", "3", "3b", "4".
RunConfig figure_preset(const std::string& name);

nlohmann::json problem_to_json(const ProblemSpec& spec);
nlohmann::json cap_to_json(const Cap& cap);
nlohmann::json solution_to_json(const SupportSolution& solution, const ProblemSpec& spec);
nlohmann::json configuration_to_json(const PointConfiguration& config);
nlohmann::json report_to_json(const VerificationReport& report);
nlohmann::json planar_to_json(const PlanarEquilibrium& planar);

/// Rebuilds a solution from solution_to_json output; disjointness is
/// recomputed from the caps.
SupportSolution solution_from_json(const nlohmann::json& doc, int d);

/// printf("%.17g").
std::string format_double(double v);

constexpr std::string_view kPointsCsvVersion = "sphereq-points v1";
constexpr std::string_view kProfileCsvVersion = "sphereq-density-profile v1";

/// Header comment, then x,y,z,dist_1..dist_m (chordal distance to each source).
void write_points_csv(std::ostream& os, const Eigen::Matrix3Xd& points, const ProblemSpec& spec);
Eigen::Matrix3Xd read_points_csv(std::istream& is);

/// Weighted potential U^{mu_Q} + Q along a meridian from the first source:
/// columns xi, weighted_potential, in_support.
void write_density_profile_csv(std::ostream& os, const ProblemSpec& spec, const SupportSolution& solution,
                               std::size_t samples = 401);

}  // namespace sphereq
