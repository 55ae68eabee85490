#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace sphereq {

/// Unit vector of S^d embedded in R^{d+1}. Normalized on construction.
class SpherePoint {
 public:
  SpherePoint() = default;
  explicit SpherePoint(const Eigen::VectorXd& coords);
  SpherePoint(std::initializer_list<double> coords);

  /// Dimension d of the sphere (ambient dimension minus one).
  int dim() const { return static_cast<int>(coords_.size()) - 1; }
  const Eigen::VectorXd& coords() const { return coords_; }
  double operator[](Eigen::Index i) const { return coords_[i]; }
  double dot(const SpherePoint& other) const;
  /// Euclidean distance |x - y| in the ambient space.
  double chord(const SpherePoint& other) const;

 private:
  Eigen::VectorXd coords_;
};

/// Open spherical cap {x : |x - center| < gamma}. The excluded region around a
/// source; its complement {|x - center| >= gamma} is the closed set on which
/// the equilibrium measure may live.
struct Cap {
  SpherePoint center;
  double gamma = 0;  // chordal radius
  double t = 1;      // height of the boundary circle, 1 - gamma^2/2
  double alpha = 0;  // geodesic radius, 2 asin(gamma/2)

  static Cap from_chordal(const SpherePoint& center, double gamma);
  static Cap from_height(const SpherePoint& center, double t);
  static Cap from_geodesic(const SpherePoint& center, double alpha);

  /// Strict interior test: chord to the center below gamma - margin.
  bool contains(const SpherePoint& x, double margin = 0) const;
  /// Height of x along the cap axis, <x, center>.
  double height(const SpherePoint& x) const { return center.dot(x); }
};

/// S^d minus the union of the open caps.
struct SupportRegion {
  int d = 2;
  std::vector<Cap> caps;

  bool contains(const SpherePoint& x) const;
};

/// Normalized surface measure of {x in S^d : <x, a> >= t}.
double cap_area(int d, double t);

struct CapOverlap {
  std::size_t i = 0;
  std::size_t j = 0;
  double margin = 0;  // geodesic distance of centers minus alpha_i + alpha_j
};

struct DisjointnessReport {
  bool disjoint = true;
  double min_margin = 0;
  std::vector<CapOverlap> violations;
};

/// Closed-cap disjointness: tangency (margin 0) counts as disjoint.
DisjointnessReport caps_pairwise_disjoint(std::span<const Cap> caps, double tol = 1e-12);

double geodesic_distance(const SpherePoint& x, const SpherePoint& y);

/// n points distributed per sigma_d (normalized Gaussian vectors).
std::vector<SpherePoint> sample_uniform(int d, std::size_t n, std::uint64_t seed);

/// Orthogonal matrix (determinant +1) mapping a to the last coordinate axis.
Eigen::MatrixXd rotation_to_pole(const SpherePoint& a);

/// Stereographic projection of S^2 from pole p onto the plane through the
/// origin orthogonal to p. The antipode of p goes to 0, p itself to infinity.
std::complex<double> stereographic(const SpherePoint& x, const SpherePoint& pole);
SpherePoint stereographic_inverse(std::complex<double> z, const SpherePoint& pole);

}  // namespace sphereq
