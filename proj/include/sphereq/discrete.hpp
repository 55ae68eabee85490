///
/// \file discrete.hpp
///
/// Minimal discrete energy on S^2 under a point-source field: objective,
/// analytic gradient in spherical angles, a bound-constrained limited-memory
/// BFGS minimizer and perturbation restarts.
///
/// Angle vectors are laid out as (theta_1, phi_1, theta_2, phi_2, ...), with
/// x = (sin t cos p, sin t sin p, cos t).
///
#pragma once

#include "sphereq/problem.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace sphereq {

struct OptimizerSettings {
  int max_iterations = 10000;
  /// Infinity-norm threshold on the projected angle gradient; <= 0 means 1e-8 N.
  double gradient_tolerance = 0;
  int restart_count = 20;
  double perturbation_scale = 0.05;  // radians
  std::uint64_t seed = 1;
  int history_size = 10;
  double pole_guard = 1e-9;  // theta stays in [guard, pi - guard]
  int threads = 1;           // restarts evaluated per batch
  bool record_history = false;

  void validate() const;
};

struct PointConfiguration {
  Eigen::Matrix3Xd points;
  double energy = 0;
  double grad_inf_norm = 0;
  int iterations = 0;
  int restarts_used = 0;
  bool converged = false;
  bool line_search_failed = false;
  std::vector<double> energy_history;  // accepted iterates, when recorded

  std::size_t size() const { return static_cast<std::size_t>(points.cols()); }
};

/// E = sum_{i != j} k_s(x_i, x_j) + 2 (N - 1) sum_i q_i sum_j k_s(a_i, x_j).
double energy(const Eigen::Matrix3Xd& points, const ProblemSpec& spec);

/// Energy and its Cartesian gradient (one column per point). Returns the
/// smallest pairwise or point-to-source chord through `min_chord`.
double energy_and_gradient(const Eigen::Matrix3Xd& points, const ProblemSpec& spec, Eigen::Matrix3Xd* grad,
                           double* min_chord = nullptr);

Eigen::Matrix3Xd points_from_angles(const Eigen::VectorXd& angles);
Eigen::VectorXd angles_from_points(const Eigen::Matrix3Xd& points);

/// Gradient with respect to (theta_j, phi_j). Throws SingularityError when a
/// theta sits on a pole.
Eigen::VectorXd gradient(const Eigen::VectorXd& angles, const ProblemSpec& spec);

/// Local minimization from `initial`. The sources are rotated so that the
/// first one sits at the north pole; the result is rotated back.
PointConfiguration minimize(const Eigen::Matrix3Xd& initial, const ProblemSpec& spec,
                            const OptimizerSettings& settings);

/// Tangent-plane Gaussian kicks of the given angular scale, renormalized.
Eigen::Matrix3Xd perturb(const Eigen::Matrix3Xd& points, double scale, std::uint64_t seed);

/// Uniform start, then restart_count - 1 perturbation restarts from the
/// incumbent; returns the lowest energy found (first found on ties).
PointConfiguration multistart(const ProblemSpec& spec, std::size_t n, const OptimizerSettings& settings);

Eigen::Matrix3Xd uniform_points(std::size_t n, std::uint64_t seed);

}  // namespace sphereq
