///
/// \file verify.hpp
///
/// Independent potential oracles (Monte Carlo and azimuthally reduced
/// quadrature) and the checkers built on them: variational inequalities,
/// cap exclusion, empirical density and the planar density.
///
#pragma once

#include "sphereq/discrete.hpp"
#include "sphereq/problem.hpp"
#include "sphereq/sphere.hpp"
#include "sphereq/support.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace sphereq {

struct VerificationReport {
  std::string name;
  bool pass = false;
  double statistic = 0;
  double tolerance = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> details;
  std::string message;

  double detail(const std::string& key) const;
};

/// normalization * sigma_d restricted to the region.
struct UniformOnSupport {
  SupportRegion region;
  double normalization = 1;
};

/// normalization * sigma_d restricted to the open cap.
struct UniformOnCap {
  Cap cap;
  double normalization = 1;
};

struct PointMass {
  SpherePoint at;
  double mass = 1;
};

/// density(u) d sigma_d(y), u = <y, cap.center>, on {u <= cap.t}. The density
/// may blow up like (t - u)^{-edge_exponent} at the boundary, 0 <= exponent < 1.
struct ZonalDensity {
  Cap cap;
  std::function<double(double)> density;
  double edge_exponent = 0;
};

using MeasureDescriptor = std::variant<UniformOnSupport, UniformOnCap, PointMass, ZonalDensity>;

struct OracleEstimate {
  double value = 0;
  double standard_error = 0;  // Monte Carlo SE, or the quadrature error estimate
  std::size_t samples = 0;
};

/// Monte Carlo estimate of the potential of the measure at x. A point mass is
/// evaluated exactly (SE 0) and throws SingularityError at its atom.
OracleEstimate potential_oracle(const MeasureDescriptor& measure, const KernelSpec& spec, const SpherePoint& x,
                                std::size_t samples, std::uint64_t seed);

/// Potential at height xi of density(u) d sigma_2 on {u <= t}, by 1D
/// quadrature in u of the exact azimuthal mean of the kernel (s = 0 or s = 1).
OracleEstimate zonal_potential_quadrature(const KernelSpec& spec, double t, const std::function<double(double)>& density,
                                          double xi);

/// Rejection samples from sigma_d: n points of the region, or n points of the
/// union of its caps.
std::vector<SpherePoint> sample_support(const SupportRegion& region, std::size_t n, std::uint64_t seed);
std::vector<SpherePoint> sample_excluded(const SupportRegion& region, std::size_t n, std::uint64_t seed);

/// `count` caps of the given geodesic radius with centers drawn from sigma_d,
/// each clear of every excluded cap of the region.
std::vector<Cap> support_windows(const SupportRegion& region, std::size_t count, double geodesic_radius,
                                 std::uint64_t seed);

struct VariationalOptions {
  std::size_t grid = 20;        // evaluation points inside and outside the support
  std::size_t samples = 1000000;  // Monte Carlo samples per evaluation point
  std::uint64_t seed = 1;
  double tol_interior = 0;      // <= 0 selects 3 times the mean standard error
  double tol_exterior = 1e-3;   // added to 3 SE for the one-sided check
};

/// U^{C sigma_d|support} + Q: stddev over support samples against tol_interior,
/// and the exterior minimum against the interior mean.
VerificationReport check_variational(const SupportSolution& solution, const ProblemSpec& spec,
                                     const VariationalOptions& options = {});

/// Points with chord to a cap center below gamma - margin.
VerificationReport check_cap_exclusion(const Eigen::Matrix3Xd& points, std::span<const Cap> caps,
                                       double margin = 1e-6);

/// |count(W)/N - C sigma_2(W)| <= tol + 3 sqrt(C sigma_2(W) / N) for each window.
/// Throws std::domain_error if a window meets an excluded cap.
VerificationReport check_empirical_density(const Eigen::Matrix3Xd& points, const SupportSolution& solution,
                                           std::span<const Cap> windows, double tol);

/// Mass of the planar density over the support (Gauss-Kronrod in the radius,
/// `grid` angular nodes), finite-difference Laplacian of the planar field
/// against 2 pi times the density, and positivity.
VerificationReport check_planar_density(const PlanarEquilibrium& planar, std::size_t grid = 64);

}  // namespace sphereq
