#include "sphereq/sphere.hpp"

#include "sphereq/error.hpp"
#include "sphereq/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace sphereq {

SpherePoint::SpherePoint(const Eigen::VectorXd& coords) : coords_(coords) {
  if (coords_.size() < 2) throw std::invalid_argument("SpherePoint: need at least 2 coordinates");
  const double n = coords_.norm();
  if (!(n > 0) || !std::isfinite(n)) throw std::invalid_argument("SpherePoint: zero or non-finite vector");
  coords_ /= n;
}

SpherePoint::SpherePoint(std::initializer_list<double> coords)
    : SpherePoint(Eigen::Map<const Eigen::VectorXd>(coords.begin(), static_cast<Eigen::Index>(coords.size()))) {}

double SpherePoint::dot(const SpherePoint& other) const {
  if (other.coords_.size() != coords_.size()) throw std::invalid_argument("SpherePoint: dimension mismatch");
  return coords_.dot(other.coords_);
}

double SpherePoint::chord(const SpherePoint& other) const {
  if (other.coords_.size() != coords_.size()) throw std::invalid_argument("SpherePoint: dimension mismatch");
  return (coords_ - other.coords_).norm();
}

Cap Cap::from_chordal(const SpherePoint& center, double gamma) {
  if (!(gamma > 0 && gamma < 2)) throw std::domain_error("Cap: chordal radius must lie in (0,2)");
  return Cap{center, gamma, 1 - gamma * gamma / 2, 2 * std::asin(gamma / 2)};
}

Cap Cap::from_height(const SpherePoint& center, double t) {
  if (!(t > -1 && t < 1)) throw std::domain_error("Cap: height must lie in (-1,1)");
  const double gamma = std::sqrt(2 * (1 - t));
  return Cap{center, gamma, t, 2 * std::asin(gamma / 2)};
}

Cap Cap::from_geodesic(const SpherePoint& center, double alpha) {
  if (!(alpha > 0 && alpha < std::numbers::pi)) throw std::domain_error("Cap: geodesic radius must lie in (0,pi)");
  return Cap{center, 2 * std::sin(alpha / 2), std::cos(alpha), alpha};
}

bool Cap::contains(const SpherePoint& x, double margin) const { return center.chord(x) < gamma - margin; }

bool SupportRegion::contains(const SpherePoint& x) const {
  return std::none_of(caps.begin(), caps.end(), [&](const Cap& c) { return c.contains(x); });
}

double cap_area(int d, double t) {
  if (d < 1) throw std::domain_error("cap_area: dimension must be positive");
  if (!(t >= -1 && t <= 1)) throw std::domain_error("cap_area: height must lie in [-1,1]");
  const double half = 0.5 * d;
  return specfun::reg_inc_beta((1 - t) / 2, half, half);
}

DisjointnessReport caps_pairwise_disjoint(std::span<const Cap> caps, double tol) {
  DisjointnessReport report;
  report.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < caps.size(); ++i) {
    for (std::size_t j = i + 1; j < caps.size(); ++j) {
      const double margin = geodesic_distance(caps[i].center, caps[j].center) - (caps[i].alpha + caps[j].alpha);
      report.min_margin = std::min(report.min_margin, margin);
      if (margin < -tol) report.violations.push_back({i, j, margin});
    }
  }
  report.disjoint = report.violations.empty();
  return report;
}

double geodesic_distance(const SpherePoint& x, const SpherePoint& y) {
  return std::acos(std::clamp(x.dot(y), -1.0, 1.0));
}

std::vector<SpherePoint> sample_uniform(int d, std::size_t n, std::uint64_t seed) {
  if (d < 1) throw std::domain_error("sample_uniform: dimension must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<SpherePoint> out;
  out.reserve(n);
  Eigen::VectorXd v(d + 1);
  while (out.size() < n) {
    for (int k = 0; k <= d; ++k) v[k] = normal(rng);
    if (v.norm() > 1e-300) out.emplace_back(v);
  }
  return out;
}

Eigen::MatrixXd rotation_to_pole(const SpherePoint& a) {
  const Eigen::Index n = a.coords().size();
  // Gram-Schmidt on (a, e_1, e_2, ...) produces a frame whose first vector is a.
  Eigen::MatrixXd frame(n, n);
  frame.col(0) = a.coords();
  Eigen::Index filled = 1;
  for (Eigen::Index k = 0; k < n && filled < n; ++k) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(n, k);
    for (Eigen::Index j = 0; j < filled; ++j) v -= frame.col(j).dot(v) * frame.col(j);
    if (v.norm() > 1e-6) frame.col(filled++) = v.normalized();
  }
  // Rows: the other frame vectors first, a last, so R a = e_last.
  Eigen::MatrixXd rot(n, n);
  for (Eigen::Index j = 1; j < n; ++j) rot.row(j - 1) = frame.col(j).transpose();
  rot.row(n - 1) = a.coords().transpose();
  if (rot.determinant() < 0) rot.row(0) *= -1;
  return rot;
}

namespace {

struct PlaneFrame {
  Eigen::Vector3d e1, e2, p;
};

PlaneFrame plane_frame(const SpherePoint& pole) {
  if (pole.dim() != 2) throw std::invalid_argument("stereographic: pole must lie on S^2");
  const Eigen::Vector3d p = pole.coords();
  // Pick the coordinate axis least aligned with p; for p = e_z this yields e_x, e_y.
  Eigen::Index k = 0;
  p.cwiseAbs().minCoeff(&k);
  Eigen::Vector3d e1 = Eigen::Vector3d::Unit(k) - p[k] * p;
  e1.normalize();
  const Eigen::Vector3d e2 = p.cross(e1);
  return {e1, e2, p};
}

}  // namespace

std::complex<double> stereographic(const SpherePoint& x, const SpherePoint& pole) {
  const PlaneFrame f = plane_frame(pole);
  if (x.dim() != 2) throw std::invalid_argument("stereographic: point must lie on S^2");
  const Eigen::Vector3d v = x.coords();
  const double h = v.dot(f.p);
  if (1 - h <= 1e-15) throw SingularityError("stereographic: point at the pole maps to infinity");
  return {v.dot(f.e1) / (1 - h), v.dot(f.e2) / (1 - h)};
}

SpherePoint stereographic_inverse(std::complex<double> z, const SpherePoint& pole) {
  const PlaneFrame f = plane_frame(pole);
  const double r2 = std::norm(z);
  const Eigen::Vector3d v = (2 * z.real() * f.e1 + 2 * z.imag() * f.e2 + (r2 - 1) * f.p) / (r2 + 1);
  return SpherePoint(Eigen::VectorXd(v));
}

}  // namespace sphereq
