#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sphereq/discrete.hpp"
#include "sphereq/error.hpp"
#include "sphereq/random.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace sphereq;

namespace {

constexpr double kPi = std::numbers::pi;

double k_s(double s, const Eigen::Vector3d& x, const Eigen::Vector3d& y) {
  const double r = (x - y).norm();
  return s == 0 ? -std::log(r) : std::pow(r, -s);
}

// Pair sum plus the field counted once per ordered pair through both ends.
double naive_energy(const Eigen::Matrix3Xd& x, const ProblemSpec& spec) {
  const auto n = x.cols();
  double e = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      e += k_s(spec.s, x.col(i), x.col(j));
      for (const auto& src : spec.sources) {
        const Eigen::Vector3d a = src.position.coords();
        e += src.charge * (k_s(spec.s, a, x.col(i)) + k_s(spec.s, a, x.col(j)));
      }
    }
  }
  return e;
}

Eigen::VectorXd random_angles(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> th(0.05, kPi - 0.05), ph(0, 2 * kPi);
  Eigen::VectorXd a(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    a[2 * j] = th(rng);
    a[2 * j + 1] = ph(rng);
  }
  return a;
}

Eigen::Matrix3Xd tetrahedron() {
  Eigen::Matrix3Xd x(3, 4);
  x << 1, 1, -1, -1, 1, -1, 1, -1, 1, -1, -1, 1;
  return x / std::sqrt(3.0);
}

Eigen::Matrix3Xd icosahedron() {
  const double p = 0.5 * (1 + std::sqrt(5.0));
  Eigen::Matrix3Xd x(3, 12);
  int k = 0;
  for (double a : {-1.0, 1.0}) {
    for (double b : {-p, p}) {
      x.col(k++) = Eigen::Vector3d(0, a, b);
      x.col(k++) = Eigen::Vector3d(a, b, 0);
      x.col(k++) = Eigen::Vector3d(b, 0, a);
    }
  }
  return x.colwise().normalized();
}

const ProblemSpec kFig1{2, 0, {{SpherePoint{0, 0, 1}, 0.25}, {SpherePoint{std::sqrt(91.0) / 10, 0, -0.3}, 0.25}}};

}  // namespace

TEST_CASE("energy of simple configurations") {
  Eigen::Matrix3Xd pair(3, 2);
  pair << 0, 0, 0, 0, 1, -1;
  CHECK(energy(pair, ProblemSpec{2, 0, {}}) == doctest::Approx(-2 * std::numbers::ln2).epsilon(1e-15));
  CHECK(energy(pair, ProblemSpec{2, 1, {}}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(energy(tetrahedron(), ProblemSpec{2, 1, {}}) == doctest::Approx(6 * std::sqrt(1.5)).epsilon(1e-14));

  Eigen::Matrix3Xd same(3, 2);
  same << 1, 1, 0, 0, 0, 0;
  CHECK_THROWS_AS(energy(same, ProblemSpec{2, 0, {}}), SingularityError);
  Eigen::Matrix3Xd on_source(3, 2);
  on_source << 0, 1, 0, 0, 1, 0;
  CHECK_THROWS_AS(energy(on_source, kFig1), SingularityError);
}

TEST_CASE("energy matches the naive double sum in both objective forms") {
  for (double s : {0.0, 1.0, 1.5}) {
    ProblemSpec spec = kFig1;
    spec.s = s;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const Eigen::Matrix3Xd x = points_from_angles(random_angles(40, seed));
      const double e = energy(x, spec);
      CHECK(e == doctest::Approx(naive_energy(x, spec)).epsilon(1e-12));
      Eigen::Matrix3Xd g;
      CHECK(energy_and_gradient(x, spec, &g) == doctest::Approx(e).epsilon(1e-14));
    }
  }
}

TEST_CASE("angle gradient against central differences") {
  const double h = 1e-6;
  int checked = 0;
  for (double s : {0.0, 1.0}) {
    ProblemSpec spec = kFig1;
    spec.s = s;
    for (std::uint64_t seed = 10; seed < 60; ++seed) {
      const Eigen::VectorXd a = random_angles(10, seed);
      const Eigen::VectorXd g = gradient(a, spec);
      Eigen::VectorXd fd(a.size());
      for (Eigen::Index k = 0; k < a.size(); ++k) {
        Eigen::VectorXd p = a, m = a;
        p[k] += h;
        m[k] -= h;
        fd[k] = (energy(points_from_angles(p), spec) - energy(points_from_angles(m), spec)) / (2 * h);
      }
      CHECK((g - fd).norm() / g.norm() <= 1e-5);
      ++checked;
    }
  }
  CHECK(checked == 100);
}

TEST_CASE("gradient symmetries and poles") {
  const Eigen::VectorXd tet = angles_from_points(tetrahedron());
  CHECK(gradient(tet, ProblemSpec{2, 1, {}}).lpNorm<Eigen::Infinity>() <= 1e-8);

  const ProblemSpec polar{2, 1, {{SpherePoint{0, 0, 1}, 0.3}}};
  const Eigen::VectorXd g = gradient(random_angles(15, 4), polar);
  double phi_sum = 0;
  for (Eigen::Index k = 1; k < g.size(); k += 2) phi_sum += g[k];
  CHECK(std::abs(phi_sum) <= 1e-10);

  Eigen::VectorXd at_pole = random_angles(3, 5);
  at_pole[2] = 0;
  CHECK_THROWS_AS(gradient(at_pole, polar), SingularityError);
  at_pole[2] = kPi;
  CHECK_THROWS_AS(gradient(at_pole, polar), SingularityError);
}

TEST_CASE("angle round trip") {
  const Eigen::VectorXd a = random_angles(20, 8);
  const Eigen::Matrix3Xd x = points_from_angles(a);
  CHECK((x.colwise().norm().array() - 1).abs().maxCoeff() <= 1e-15);
  CHECK((points_from_angles(angles_from_points(x)) - x).norm() <= 1e-13);
}

TEST_CASE("energy is invariant under a joint rotation") {
  const Eigen::Matrix3d r = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, -0.5).normalized()).toRotationMatrix();
  ProblemSpec rotated = kFig1;
  for (auto& src : rotated.sources) src.position = SpherePoint(Eigen::VectorXd(r * src.position.coords()));
  const Eigen::Matrix3Xd x = points_from_angles(random_angles(50, 9));
  CHECK(std::abs(energy(r * x, rotated) - energy(x, kFig1)) <= 1e-9);
}

TEST_CASE("minimize: antipodal pair, tetrahedron and icosahedron") {
  OptimizerSettings settings;
  settings.gradient_tolerance = 1e-10;

  const auto pair = minimize(uniform_points(2, 3), ProblemSpec{2, 0, {}}, settings);
  CHECK(pair.converged);
  CHECK((pair.points.col(0) + pair.points.col(1)).norm() <= 1e-6);
  CHECK(pair.energy == doctest::Approx(-2 * std::numbers::ln2).epsilon(1e-10));

  const auto tet = minimize(uniform_points(4, 5), ProblemSpec{2, 1, {}}, settings);
  CHECK(tet.energy == doctest::Approx(6 * std::sqrt(1.5)).epsilon(1e-8));

  const double ico_exact = energy(icosahedron(), ProblemSpec{2, 1, {}});
  // The classical Thomson value counts each unordered pair once.
  CHECK(ico_exact / 2 == doctest::Approx(49.165253).epsilon(1e-8));
  settings.record_history = true;
  const auto ico = minimize(uniform_points(12, 1), ProblemSpec{2, 1, {}}, settings);
  CHECK(ico.energy == doctest::Approx(ico_exact).epsilon(1e-10));
  CHECK(ico.size() == 12);
  REQUIRE(ico.energy_history.size() >= 2);
  for (std::size_t k = 1; k < ico.energy_history.size(); ++k)
    CHECK(ico.energy_history[k] <= ico.energy_history[k - 1] * (1 + 1e-13));
}

TEST_CASE("minimize keeps the sources fixed and stays on the sphere") {
  OptimizerSettings settings;
  settings.record_history = true;
  const auto res = minimize(uniform_points(60, 2), kFig1, settings);
  CHECK(res.converged);
  CHECK(res.grad_inf_norm <= 1e-8 * 60);
  CHECK((res.points.colwise().norm().array() - 1).abs().maxCoeff() <= 1e-12);
  CHECK(res.energy == doctest::Approx(energy(res.points, kFig1)).epsilon(1e-13));
  CHECK(res.energy < energy(uniform_points(60, 2), kFig1));
  for (std::size_t k = 1; k < res.energy_history.size(); ++k)
    CHECK(res.energy_history[k] <= res.energy_history[k - 1] + 1e-13 * std::abs(res.energy_history[k - 1]));
}

TEST_CASE("multistart") {
  OptimizerSettings one;
  one.restart_count = 1;
  one.seed = 21;
  const auto single = multistart(kFig1, 30, one);
  const auto direct = minimize(uniform_points(30, stream_seed(21, 0)), kFig1, one);
  CHECK(single.energy == direct.energy);
  CHECK(single.points == direct.points);

  double prev = single.energy;
  for (int r : {2, 4}) {
    OptimizerSettings more = one;
    more.restart_count = r;
    const auto res = multistart(kFig1, 30, more);
    CHECK(res.energy <= prev);
    CHECK(res.restarts_used == r);
    prev = res.energy;
  }

  OptimizerSettings again = one;
  again.restart_count = 3;
  const auto a = multistart(kFig1, 30, again);
  const auto b = multistart(kFig1, 30, again);
  CHECK(a.points == b.points);
  CHECK(a.energy == b.energy);

  OptimizerSettings threaded = again;
  threaded.threads = 2;
  const auto c = multistart(kFig1, 30, threaded);
  CHECK(c.points == multistart(kFig1, 30, threaded).points);
  CHECK(c.energy <= single.energy);
}

TEST_CASE("N = 100 energies agree across seeds") {
  OptimizerSettings settings;
  settings.restart_count = 2;
  std::vector<double> energies;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    settings.seed = seed;
    energies.push_back(multistart(kFig1, 100, settings).energy);
  }
  const auto [lo, hi] = std::minmax_element(energies.begin(), energies.end());
  CHECK((*hi - *lo) / std::abs(*lo) <= 1e-3);
}

TEST_CASE("perturbation and settings validation") {
  const Eigen::Matrix3Xd x = uniform_points(50, 4);
  const Eigen::Matrix3Xd y = perturb(x, 0.05, 9);
  CHECK((y.colwise().norm().array() - 1).abs().maxCoeff() <= 1e-15);
  const double mean_shift = (y - x).colwise().norm().mean();
  // Mean length of a 2D Gaussian kick of scale sigma is sigma sqrt(pi/2).
  CHECK(mean_shift == doctest::Approx(0.05 * std::sqrt(kPi / 2)).epsilon(0.2));
  CHECK(perturb(x, 0.05, 9) == y);

  OptimizerSettings bad;
  bad.perturbation_scale = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {};
  bad.restart_count = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {};
  bad.history_size = -1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(minimize(uniform_points(1, 1), kFig1, {}), std::invalid_argument);
  CHECK_THROWS_AS(minimize(uniform_points(5, 1), ProblemSpec{3, 1, {}}, {}), std::domain_error);
}
