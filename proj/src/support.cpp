#include "sphereq/support.hpp"

#include "sphereq/error.hpp"
#include "sphereq/potential.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sphereq {

namespace {

// Any point of the support; the weighted potential is constant there.
SpherePoint find_support_point(const SupportRegion& region) {
  const int d = region.d;
  if (!region.caps.empty()) {
    const SpherePoint anti(Eigen::VectorXd(-region.caps.front().center.coords()));
    if (region.contains(anti)) return anti;
  }
  for (const auto& x : sample_uniform(d, 4096, 0x5eedULL)) {
    if (region.contains(x)) return x;
  }
  throw std::runtime_error("support is empty or too small to sample");
}

}  // namespace

SupportSolution solve_log(const ProblemSpec& spec) {
  spec.validate();
  if (spec.d != 2 || spec.s != 0) throw std::domain_error("solve_log: needs d = 2, s = 0");
  const double q = spec.total_charge();
  SupportSolution out;
  out.region.d = 2;
  double removed = 0;
  for (const auto& src : spec.sources) {
    const double eps = 2 * std::sqrt(src.charge / (1 + q));
    out.region.caps.push_back(Cap::from_chordal(src.position, eps));
    removed += eps * eps / 4;
  }
  out.normalization = 1 + q;
  out.residual = std::abs(out.normalization * (1 - removed) - 1);
  out.disjointness = caps_pairwise_disjoint(out.region.caps);
  out.feasible = out.disjointness.disjoint;
  // The critical radii zero every boundary circle component.
  out.boundary_coefficients.assign(spec.sources.size(), 0.0);
  for (std::size_t i = 0; i < spec.sources.size(); ++i) {
    const double g = out.region.caps[i].gamma;
    out.boundary_coefficients[i] = (1 + q) * (g * g / 4 - spec.sources[i].charge / (1 + q));
  }
  out.equilibrium_constant = std::numeric_limits<double>::quiet_NaN();
  if (out.feasible) {
    out.equilibrium_constant =
        support_weighted_potential(spec, out.region.caps, out.normalization, find_support_point(out.region));
  }
  return out;
}

std::vector<double> riesz_dm2_radii(const ProblemSpec& spec, double normalization) {
  const int d = spec.d;
  const double w = sphere_energy({d, static_cast<double>(d - 2)});
  std::vector<double> radii;
  radii.reserve(spec.sources.size());
  for (const auto& src : spec.sources) radii.push_back(std::pow(4 * src.charge / (normalization * w), 1.0 / d));
  return radii;
}

double riesz_dm2_mass(const ProblemSpec& spec, double normalization) {
  double area = 0;
  for (double g : riesz_dm2_radii(spec, normalization)) {
    if (g >= 2) {
      area += 1;
      continue;
    }
    area += cap_area(spec.d, 1 - g * g / 2);
  }
  return normalization * (1 - area);
}

SupportSolution solve_riesz_dm2(const ProblemSpec& spec, double tol) {
  spec.validate();
  if (!spec.kernel().is_exceptional()) throw std::domain_error("solve_riesz_dm2: needs d >= 3, s = d - 2");
  double lo = 1;
  double hi = 2;
  int iterations = 0;
  while (riesz_dm2_mass(spec, hi) < 1) {
    lo = hi;
    hi *= 2;
    if (hi > 1e15) throw NoBracketError("solve_riesz_dm2: g(C) stays below 1");
  }
  double c = hi;
  for (; iterations < 400; ++iterations) {
    c = 0.5 * (lo + hi);
    const double g = riesz_dm2_mass(spec, c);
    if (std::abs(g - 1) <= 0.01 * tol || hi - lo <= 4 * std::numeric_limits<double>::epsilon() * hi) break;
    (g < 1 ? lo : hi) = c;
  }

  SupportSolution out;
  out.region.d = spec.d;
  out.normalization = c;
  out.iterations = iterations;
  const auto radii = riesz_dm2_radii(spec, c);
  const double w = sphere_energy(spec.kernel());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (radii[i] >= 2) throw std::domain_error("solve_riesz_dm2: charge too large, cap covers the sphere");
    out.region.caps.push_back(Cap::from_chordal(spec.sources[i].position, radii[i]));
    const auto eq = signed_cap_equilibrium_dm2(out.region.caps.back(), spec.sources[i].charge, spec.d, c * w);
    out.boundary_coefficients.push_back(eq.boundary_coefficient);
  }
  out.residual = std::abs(riesz_dm2_mass(spec, c) - 1);
  if (out.residual > tol) throw std::runtime_error("solve_riesz_dm2: bisection did not reach the tolerance");
  out.disjointness = caps_pairwise_disjoint(out.region.caps);
  out.feasible = out.disjointness.disjoint;
  out.equilibrium_constant = c * w;
  return out;
}

SupportSolution solve(const ProblemSpec& spec) {
  if (spec.d == 2 && spec.s == 0) return solve_log(spec);
  if (spec.kernel().is_exceptional()) return solve_riesz_dm2(spec);
  throw std::domain_error("solve: supports are available for s = 0 on S^2 and s = d - 2");
}

double reduced_charge(double total_charge, double charge) { return charge / (1 + total_charge - charge); }

double coulomb_alpha_root(double q_bar, double tol) {
  if (!(q_bar > 0)) throw std::domain_error("coulomb_alpha_root: reduced charge must be positive");
  const double pi = std::numbers::pi;
  auto h = [&](double a) { return (q_bar + 1) * pi * std::cos(a) - q_bar * a * std::cos(a) + q_bar * std::sin(a) - pi; };
  double lo = 0;
  double hi = pi;
  if (!(h(lo) > 0 && h(hi) < 0)) throw NoBracketError("coulomb_alpha_root: no sign change on (0, pi)");
  // h is strictly decreasing: h'(a) = sin(a) (q a - (q+1) pi) < 0.
  for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) > 0 ? lo : hi) = mid;
  }
  double a = 0.5 * (lo + hi);
  for (int it = 0; it < 3; ++it) {
    const double dh = std::sin(a) * (q_bar * a - (q_bar + 1) * pi);
    const double next = a - h(a) / dh;
    if (next > 0 && next < pi && std::abs(h(next)) < std::abs(h(a))) a = next;
  }
  if (std::abs(h(a)) > std::max(tol, 1e-12)) throw std::runtime_error("coulomb_alpha_root: residual above tolerance");
  return a;
}

std::vector<Cap> influence_radii(const ProblemSpec& spec) {
  spec.validate();
  if (spec.d != 2 || !(spec.s == 0 || spec.s == 1))
    throw std::domain_error("influence_radii: available for d = 2 and s in {0, 1}");
  const double q = spec.total_charge();
  std::vector<Cap> caps;
  for (const auto& src : spec.sources) {
    const double qb = reduced_charge(q, src.charge);
    if (spec.s == 0) {
      caps.push_back(Cap::from_chordal(src.position, std::sqrt(4 * qb / (1 + qb))));
    } else {
      caps.push_back(Cap::from_geodesic(src.position, coulomb_alpha_root(qb)));
    }
  }
  return caps;
}

// ---------------------------------------------------------------------------

double PlanarEquilibrium::density(std::complex<double> z) const {
  const double r2 = std::norm(z);
  return density_scale / ((1 + r2) * (1 + r2));
}

double PlanarEquilibrium::field(std::complex<double> z) const {
  double v = (1 + total_charge) * 0.5 * std::log1p(std::norm(z));
  for (std::size_t i = 0; i < source_images.size(); ++i) v -= charges[i] * std::log(std::abs(z - source_images[i]));
  return v;
}

bool PlanarEquilibrium::in_support(std::complex<double> z) const {
  if (std::abs(z) > outer_radius) return false;
  for (const auto& disc : excluded_discs) {
    if (disc.contains(z)) return false;
  }
  return true;
}

PlanarEquilibrium kelvin_planar(const ProblemSpec& spec) {
  const SupportSolution sol = solve_log(spec);
  if (!sol.feasible) throw std::domain_error("kelvin_planar: caps overlap, the planar support is not known");
  if (spec.sources.empty()) throw std::domain_error("kelvin_planar: needs at least one source for the pole");

  const std::size_t m = spec.sources.size();
  const double q = spec.total_charge();
  const double qm = spec.sources.back().charge;
  PlanarEquilibrium out;
  out.pole = spec.sources.back().position;
  out.total_charge = q;
  out.outer_radius = std::sqrt((1 + q - qm) / qm);
  out.density_scale = (1 + q) / std::numbers::pi;

  const Eigen::Vector3d p = out.pole.coords();
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const Cap& cap = sol.region.caps[i];
    const Eigen::Vector3d a = cap.center.coords();
    // Direction in the plane of p, a and the origin, orthogonal to a.
    Eigen::Vector3d e = p - p.dot(a) * a;
    if (e.norm() < 1e-12) {
      Eigen::Index k = 0;
      a.cwiseAbs().minCoeff(&k);
      e = Eigen::Vector3d::Unit(k) - a[k] * a;
    }
    e.normalize();
    const double r = std::sqrt(1 - cap.t * cap.t);
    const auto z1 = stereographic(SpherePoint(Eigen::VectorXd(cap.t * a + r * e)), out.pole);
    const auto z2 = stereographic(SpherePoint(Eigen::VectorXd(cap.t * a - r * e)), out.pole);
    out.excluded_discs.push_back({0.5 * (z1 + z2), 0.5 * std::abs(z1 - z2)});
    out.source_images.push_back(stereographic(cap.center, out.pole));
    out.charges.push_back(spec.sources[i].charge);
  }
  return out;
}

}  // namespace sphereq
