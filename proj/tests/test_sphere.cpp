#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sphereq/error.hpp"
#include "sphereq/sphere.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>

using namespace sphereq;

namespace {

// sigma_d({<x,a> >= t}) from the height marginal (1-u^2)^{(d-2)/2}.
double cap_area_oracle(int d, double t) {
  if (d == 1) return std::acos(t) / std::numbers::pi;
  boost::math::quadrature::tanh_sinh<double> q;
  auto w = [d](double u) { return std::pow(1 - u * u, 0.5 * (d - 2)); };
  return q.integrate(w, t, 1.0, 1e-15) / q.integrate(w, -1.0, 1.0, 1e-15);
}

}  // namespace

TEST_CASE("SpherePoint normalizes and measures chords") {
  const SpherePoint x{3, 0, 4};
  CHECK(x.dim() == 2);
  CHECK(x.coords().norm() == doctest::Approx(1).epsilon(1e-15));
  const SpherePoint n{0, 0, 1}, s{0, 0, -1};
  CHECK(n.chord(s) == doctest::Approx(2));
  CHECK(n.dot(s) == doctest::Approx(-1));
  CHECK_THROWS(SpherePoint{0, 0, 0});
  CHECK_THROWS(n.dot(SpherePoint{1, 0, 0, 0}));
}

TEST_CASE("cap parametrizations agree") {
  const SpherePoint a{0, 1, 0};
  for (double gamma : {0.1, 0.8164965809277260, 1.2, 1.9}) {
    const Cap c = Cap::from_chordal(a, gamma);
    CHECK(c.t == doctest::Approx(1 - gamma * gamma / 2).epsilon(1e-15));
    CHECK(c.alpha == doctest::Approx(2 * std::asin(gamma / 2)).epsilon(1e-15));
    const Cap h = Cap::from_height(a, c.t);
    const Cap g = Cap::from_geodesic(a, c.alpha);
    CHECK(h.gamma == doctest::Approx(gamma).epsilon(1e-14));
    CHECK(g.gamma == doctest::Approx(gamma).epsilon(1e-14));
    CHECK(g.t == doctest::Approx(c.t).epsilon(1e-14));
  }
  CHECK_THROWS_AS(Cap::from_chordal(a, 2.0), std::domain_error);
  CHECK_THROWS_AS(Cap::from_height(a, 1.0), std::domain_error);
}

TEST_CASE("cap containment is strict") {
  const Cap c = Cap::from_height(SpherePoint{0, 0, 1}, 0.5);
  CHECK(c.contains(SpherePoint{0, 0, 1}));
  CHECK_FALSE(c.contains(SpherePoint{std::sqrt(0.75), 0, 0.5 - 1e-9}));
  SupportRegion r{2, {c}};
  CHECK(r.contains(SpherePoint{0, 0, -1}));
  CHECK_FALSE(r.contains(SpherePoint{0, 0.1, 1}));
}

TEST_CASE("cap area: Archimedes on S^2 and quadrature in higher dimensions") {
  for (double t : {-1.0, -0.3, 0.0, 0.5, 2.0 / 3, 1.0}) CHECK(cap_area(2, t) == doctest::Approx((1 - t) / 2).epsilon(1e-15));
  for (int d : {1, 3, 4, 5, 8}) {
    for (double t : {-0.9, -0.2, 0.3, 0.75, 0.99}) {
      CAPTURE(d);
      CAPTURE(t);
      CHECK(cap_area(d, t) == doctest::Approx(cap_area_oracle(d, t)).epsilon(1e-12));
    }
    CHECK(cap_area(d, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
  }
}

TEST_CASE("pairwise disjointness at the figure parameters") {
  const double eps = 2 / std::sqrt(6.0);
  const SpherePoint a1{0, 0, 1};
  const double r91 = std::sqrt(91.0) / 10;

  const std::vector<Cap> left{Cap::from_chordal(a1, eps), Cap::from_chordal(SpherePoint{r91, 0, -0.3}, eps)};
  CHECK(caps_pairwise_disjoint(left).disjoint);

  const std::vector<Cap> right{Cap::from_chordal(a1, eps),
                               Cap::from_chordal(SpherePoint{4 * std::sqrt(5.0) / 9, 0, -1.0 / 9}, eps)};
  const auto tangent = caps_pairwise_disjoint(right);
  CHECK(tangent.disjoint);
  CHECK(std::abs(tangent.min_margin) <= 1e-10);

  const std::vector<Cap> overlap{Cap::from_chordal(a1, eps), Cap::from_chordal(SpherePoint{r91, 0, 0.3}, eps)};
  const auto bad = caps_pairwise_disjoint(overlap);
  CHECK_FALSE(bad.disjoint);
  REQUIRE(bad.violations.size() == 1);
  CHECK(bad.violations[0].i == 0);
  CHECK(bad.violations[0].j == 1);
  CHECK(bad.violations[0].margin < 0);

  CHECK(caps_pairwise_disjoint(std::vector<Cap>{}).disjoint);
}

TEST_CASE("uniform sampling is deterministic and centred") {
  const auto a = sample_uniform(2, 20000, 5);
  const auto b = sample_uniform(2, 20000, 5);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].coords() == b[i].coords());
    mean += a[i].coords();
  }
  mean /= static_cast<double>(a.size());
  // Each coordinate has variance 1/3; 5 standard errors.
  CHECK(mean.norm() < 5 * std::sqrt(1.0 / 3 / 20000) * std::sqrt(3.0));
}

TEST_CASE("rotation_to_pole is a proper rotation onto the last axis") {
  for (const SpherePoint& a : {SpherePoint{1, 2, 3}, SpherePoint{0, 0, -1}, SpherePoint{0, 0, 1}, SpherePoint{1, 0, 0, 1}}) {
    const Eigen::MatrixXd r = rotation_to_pole(a);
    const auto n = r.rows();
    CHECK((r * r.transpose() - Eigen::MatrixXd::Identity(n, n)).norm() < 1e-14);
    CHECK(r.determinant() == doctest::Approx(1).epsilon(1e-14));
    const Eigen::VectorXd image = r * a.coords();
    CHECK(image[n - 1] == doctest::Approx(1).epsilon(1e-15));
    CHECK(image.head(n - 1).norm() < 1e-14);
  }
}

TEST_CASE("stereographic projection round trip and special points") {
  const SpherePoint pole{0.2, -0.5, 0.7};
  for (const auto& x : sample_uniform(2, 500, 3)) {
    const auto z = stereographic(x, pole);
    CHECK((stereographic_inverse(z, pole).coords() - x.coords()).norm() < 1e-12);
  }
  const SpherePoint anti(Eigen::VectorXd(-pole.coords()));
  CHECK(std::abs(stereographic(anti, pole)) < 1e-15);
  CHECK_THROWS_AS(stereographic(pole, pole), SingularityError);
  // Points at height h along the pole axis map to |z|^2 = (1+h)/(1-h).
  const SpherePoint eq = stereographic_inverse({1.0, 0.0}, pole);
  CHECK(eq.dot(pole) == doctest::Approx(0).scale(1));
}

TEST_CASE("geodesic distance") {
  CHECK(geodesic_distance(SpherePoint{1, 0, 0}, SpherePoint{0, 1, 0}) == doctest::Approx(std::numbers::pi / 2));
  CHECK(geodesic_distance(SpherePoint{1, 0, 0}, SpherePoint{1, 0, 0}) == 0.0);
}
