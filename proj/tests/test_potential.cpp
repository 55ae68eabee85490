#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sphereq/error.hpp"
#include "sphereq/potential.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/ellint_rf.hpp>

#include <cmath>
#include <numbers>

using namespace sphereq;

namespace {

constexpr double kPi = std::numbers::pi;

// For x at height xi and y at height u, |x-y|^2 = A - B c where c is the
// cosine between the tangential parts.
struct Chord {
  double a, b;
};
Chord chord_terms(double xi, double u) {
  return {2 - 2 * xi * u, 2 * std::sqrt(std::max(0.0, (1 - xi * xi) * (1 - u * u)))};
}

// Mean of the kernel over the circle (or sphere) of points at height u.
// d = 2: c = cos(phi) with phi uniform. d = 3: c uniform on [-1,1].
// d = 4: c has density (2/pi) sqrt(1-c^2).
double kernel_mean(int d, double s, double xi, double u) {
  const auto [a, b] = chord_terms(xi, u);
  const double gap = 2 * std::abs(xi - u);
  if (d == 2 && s == 0) return -0.5 * std::log((a + gap) / 2);
  if (d == 2 && s == 1) {
    // K(k) = R_F(0, 1 - k^2, 1) with 1 - k^2 = (A - B) / (A + B).
    const double kc2 = gap * gap / ((a + b) * (a + b));
    return 2 / kPi * boost::math::ellint_rf(0.0, kc2, 1.0) / std::sqrt(a + b);
  }
  if (b < 1e-12 * a) return std::pow(a, -0.5 * s);
  if (d == 3 && s == 1) return (std::sqrt(a + b) - gap / std::sqrt(a + b)) / b;
  if (d == 4 && s == 2) return 2 * (a - gap) / (b * b);
  throw std::logic_error("kernel_mean: unsupported case");
}

// Density of the height u of a sigma_d-distributed point.
double height_density(int d, double u) {
  if (d == 2) return 0.5;
  if (d == 3) return 2 / kPi * std::sqrt(std::max(0.0, 1 - u * u));
  if (d == 4) return 0.75 * (1 - u * u);
  throw std::logic_error("height_density: unsupported d");
}

// Integral of f(u) over [lo, hi], split where the kernel mean is singular.
template <class F>
double integrate_split(F f, double lo, double hi, double xi) {
  boost::math::quadrature::tanh_sinh<double> q(15, 1e-14);
  if (xi > lo && xi < hi) return q.integrate(f, lo, xi) + q.integrate(f, xi, hi);
  return q.integrate(f, lo, hi);
}

double cap_potential_oracle(int d, double s, double t, double xi) {
  return integrate_split([&](double u) { return height_density(d, u) * kernel_mean(d, s, xi, u); }, t, 1.0, xi);
}

// Integral of f over [-1, t] for f ~ (t-u)^{1/k - 1} at the edge. The map
// t - u = v^k flattens the edge; the last delta, where the height loses its
// relative precision, is integrated from the leading power law.
template <class F>
double integrate_to_edge(F f, double t, double k) {
  const double delta = 1e-8;
  boost::math::quadrature::tanh_sinh<double> q(15, 1e-14);
  auto g = [&](double v) { return f(t - std::pow(v, k)) * k * std::pow(v, k - 1); };
  return q.integrate(g, std::pow(delta, 1 / k), std::pow(1 + t, 1 / k)) + f(t - delta) * delta * k;
}

double sphere_energy_oracle(int d, double s) { return cap_potential_oracle(d, s, -1.0, 0.3); }

}  // namespace

TEST_CASE("sphere energies against radial quadrature") {
  CHECK(sphere_energy({2, 0}) == doctest::Approx(0.5 - std::numbers::ln2).epsilon(1e-15));
  CHECK(sphere_energy({2, 1}) == doctest::Approx(1.0).epsilon(1e-15));
  for (auto [d, s] : {std::pair{2, 0.0}, {2, 1.0}, {3, 1.0}, {4, 2.0}}) {
    CAPTURE(d);
    CAPTURE(s);
    CHECK(sphere_energy({d, s}) == doctest::Approx(sphere_energy_oracle(d, s)).epsilon(1e-10));
  }
  // Independent of the evaluation point.
  CHECK(cap_potential_oracle(3, 1, -1.0, -0.8) == doctest::Approx(sphere_energy({3, 1})).epsilon(1e-10));
  CHECK_THROWS_AS(sphere_energy({2, 2.0}), std::domain_error);
}

TEST_CASE("area ratio integrates the height density to one") {
  boost::math::quadrature::tanh_sinh<double> q;
  for (int d : {2, 3, 4, 5, 7}) {
    const double mass = q.integrate([d](double u) { return std::pow(1 - u * u, 0.5 * (d - 2)); }, -1.0, 1.0);
    CHECK(area_ratio(d) * mass == doctest::Approx(1).epsilon(1e-13));
  }
}

TEST_CASE("uniform cap and boundary circle potentials") {
  for (auto [d, s] : {std::pair{2, 0.0}, {3, 1.0}, {4, 2.0}}) {
    for (double t : {-0.6, 0.1, 2.0 / 3}) {
      for (double xi : {-1.0, -0.7, 0.0, 0.4, 0.9, 0.999}) {
        CAPTURE(d);
        CAPTURE(t);
        CAPTURE(xi);
        const KernelSpec k{d, s};
        CHECK(uniform_cap_potential(k, t, xi) ==
              doctest::Approx(cap_potential_oracle(d, s, t, xi)).epsilon(1e-9));
        if (std::abs(xi - t) > 1e-3)
          CHECK(boundary_circle_potential(k, t, xi) == doctest::Approx(kernel_mean(d, s, xi, t)).epsilon(1e-10));
      }
    }
  }
  CHECK_THROWS_AS(uniform_cap_potential({2, 1.0}, 0.1, 0.2), std::domain_error);
  CHECK_THROWS_AS(boundary_circle_potential({2, 0.0}, 1.0, 0.2), std::domain_error);
}

TEST_CASE("logarithmic balayage potentials") {
  const double w0 = sphere_energy({2, 0});
  for (double t : {-0.5, 0.0, 1.0 / 3, 0.8}) {
    const Cap cap = Cap::from_height(SpherePoint{0, 0, 1}, t);
    for (double xi : {-0.95, -0.2, 0.5, 0.99}) {
      CAPTURE(t);
      CAPTURE(xi);
      // bal(sigma) = sigma on the complement plus the cap mass spread on the circle.
      const double on_complement = w0 - cap_potential_oracle(2, 0, t, xi);
      const double circle = kernel_mean(2, 0, xi, t);
      const auto p = log_balayage_potentials(cap, xi);
      CHECK(p.u_sigma == doctest::Approx(on_complement + 0.5 * (1 - t) * circle).epsilon(1e-10));
      if (std::abs(xi - t) > 1e-6) CHECK(p.u_delta == doctest::Approx(circle).epsilon(1e-12));
    }
    // On the complement bal(sigma) has constant potential W_0(Sigma).
    CHECK(log_balayage_potentials(cap, -0.9).u_sigma == doctest::Approx(log_cap_complement_energy(t)).epsilon(1e-14));
    // bal(delta) differs from the point potential by a constant on the complement.
    const double c1 = log_balayage_potentials(cap, -0.9).u_delta + 0.5 * std::log(2 * 1.9);
    const double c2 = log_balayage_potentials(cap, t - 0.1).u_delta + 0.5 * std::log(2 * (1.1 - t));
    CHECK(c1 == doctest::Approx(c2).epsilon(1e-13));
  }
  CHECK(log_cap_complement_energy(1.0) == doctest::Approx(sphere_energy({2, 0})).epsilon(1e-14));
}

TEST_CASE("log profile maximizer") {
  for (auto [q, qi] : {std::pair{0.25, 0.25}, {0.425, 0.125}, {1.0, 0.3}}) {
    const double u = log_profile_argmax(q, qi);
    CHECK(log_profile(u, q, qi) >= log_profile(u - 1e-4, q, qi));
    CHECK(log_profile(u, q, qi) >= log_profile(u + 1e-4, q, qi));
    const double h = 1e-6;
    CHECK(std::abs(log_profile(u + h, q, qi) - log_profile(u - h, q, qi)) / (2 * h) < 1e-8);
  }
}

TEST_CASE("signed (d-2)-equilibrium has unit mass and constant weighted potential") {
  for (int d : {3, 4}) {
    const double s = d - 2;
    const double w = sphere_energy({d, s});
    for (auto [t, q] : {std::pair{0.2, 0.1}, {-0.3, 0.5}, {0.7, 0.05}}) {
      CAPTURE(d);
      CAPTURE(t);
      const Cap cap = Cap::from_height(SpherePoint(Eigen::VectorXd::Unit(d + 1, d)), t);
      const auto eq = signed_cap_equilibrium_dm2(cap, q, d);
      CHECK(eq.total_mass() == doctest::Approx(1).epsilon(1e-13));
      auto total = [&](double xi) {
        const double sigma_part = eq.uniform_coefficient * (w - cap_potential_oracle(d, s, t, xi));
        const double circle = eq.boundary_coefficient * kernel_mean(d, s, xi, t);
        return sigma_part + circle + q * std::pow(2 * (1 - xi), -0.5 * s);
      };
      for (double xi : {-0.9, t - 0.2}) CHECK(total(xi) == doctest::Approx(eq.phi_value).epsilon(1e-9));
      for (double xi : {t + 0.1, 0.5 * (1 + t), 0.95})
        CHECK(weighted_potential_dm2(cap, q, eq.phi_value, d, xi) == doctest::Approx(total(xi)).epsilon(1e-9));
      // A prescribed constant keeps the family and moves the boundary coefficient.
      const auto fixed = signed_cap_equilibrium_dm2(cap, q, d, 2.0);
      CHECK(fixed.phi_value == 2.0);
      CHECK(fixed.uniform_coefficient == doctest::Approx(2.0 / w));
    }
  }
  CHECK_THROWS_AS(signed_cap_equilibrium_dm2(Cap::from_height(SpherePoint{0, 0, 1}, 0.1), 0.1, 2), std::domain_error);
}

TEST_CASE("signed s-equilibrium on S^2 for s = 1") {
  const int d = 2;
  const double s = 1;
  for (auto [t, q] : {std::pair{0.3, 0.25}, {-0.2, 0.6}}) {
    CAPTURE(t);
    const Cap cap = Cap::from_height(SpherePoint{0, 0, 1}, t);
    const double phi = mhaskar_saff_by_normalization(cap, q, d, s);
    CHECK(phi == doctest::Approx(mhaskar_saff_coulomb(t, q)).epsilon(1e-9));
    CHECK(mhaskar_saff_phi(cap, q, d, s) == doctest::Approx(mhaskar_saff_coulomb(t, q)).epsilon(1e-15));

    auto rho = [&](double u) { return u >= t ? 0.0 : signed_density_general_s(cap, q, d, s, phi, u); };
    CHECK(integrate_to_edge([&](double u) { return 0.5 * rho(u); }, t, 2.0) == doctest::Approx(1).epsilon(1e-9));

    auto potential = [&](double xi) {
      const double field = q / std::sqrt(2 * (1 - xi));
      return integrate_split([&](double u) { return 0.5 * rho(u) * kernel_mean(d, s, xi, u); }, -1.0, t, xi) + field;
    };
    for (double xi : {-0.8, t - 0.3}) CHECK(potential(xi) == doctest::Approx(phi).epsilon(1e-7));
    for (double xi : {t + 0.05, 0.9})
      CHECK(weighted_potential_general_s(cap, q, phi, d, s, xi) == doctest::Approx(potential(xi)).epsilon(1e-7));
  }
}

TEST_CASE("signed s-equilibrium on S^3 for s = 1.5") {
  const int d = 3;
  const double s = 1.5;
  const double t = 0.25, q = 0.2;
  const Cap cap = Cap::from_height(SpherePoint{0, 0, 0, 1}, t);
  const double phi = mhaskar_saff_by_normalization(cap, q, d, s);
  const double mass = integrate_to_edge(
      [&](double u) { return u >= t ? 0.0 : height_density(d, u) * signed_density_general_s(cap, q, d, s, phi, u); },
      t, 4.0);
  CHECK(mass == doctest::Approx(1).epsilon(1e-9));
  CHECK(weighted_potential_general_s(cap, q, phi, d, s, 0.0) == phi);
  CHECK_THROWS_AS(mhaskar_saff_phi(cap, q, d, s), std::domain_error);
  CHECK_THROWS_AS(signed_density_general_s(cap, q, d, s, phi, t), SingularityError);
  CHECK_THROWS_AS(weighted_potential_general_s(cap, q, phi, d, s, 1.0), SingularityError);
}

TEST_CASE("closed-form constants") {
  const Cap cap = Cap::from_height(SpherePoint{0, 0, 1}, 0.4);
  CHECK(mhaskar_saff_phi(cap, 0.3, 2, 0) == doctest::Approx(1.3));
  const Cap c3 = Cap::from_height(SpherePoint{0, 0, 0, 1}, 0.4);
  CHECK(mhaskar_saff_phi(c3, 0.3, 3, 1) == doctest::Approx(signed_cap_equilibrium_dm2(c3, 0.3, 3).phi_value));
  // A vanishing cap sweeps nothing and Phi -> 1 + q.
  CHECK(mhaskar_saff_coulomb(1 - 1e-12, 0.2) == doctest::Approx(1.2).epsilon(1e-5));
}
