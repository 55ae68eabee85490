#include "sphereq/verify.hpp"

#include "sphereq/error.hpp"
#include "sphereq/potential.hpp"
#include "sphereq/random.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace sphereq {

double VerificationReport::detail(const std::string& key) const {
  for (const auto& [k, v] : details) {
    if (k == key) return v;
  }
  throw std::out_of_range("VerificationReport: no detail named " + key);
}

namespace {

// k_s from the squared chord.
inline double kernel_r2(double s, double r2) { return s == 0 ? -0.5 * std::log(r2) : std::pow(r2, -0.5 * s); }

// Streaming mean and variance (Welford).
class RunningStats {
 public:
  void add(double v) {
    ++n_;
    const double delta = v - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (v - mean_);
  }
  double mean() const { return mean_; }
  double standard_error() const {
    return n_ > 1 ? std::sqrt(m2_ / static_cast<double>(n_ - 1) / static_cast<double>(n_)) : 0.0;
  }
  std::size_t count() const { return n_; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0;
  double m2_ = 0;
};

class UniformSphereSampler {
 public:
  UniformSphereSampler(int d, std::uint64_t seed) : rng_(seed), y_(d + 1) {}

  const Eigen::VectorXd& next() {
    double n2 = 0;
    do {
      for (Eigen::Index k = 0; k < y_.size(); ++k) y_[k] = normal_(rng_);
      n2 = y_.squaredNorm();
    } while (!(n2 > 0));
    y_ /= std::sqrt(n2);
    return y_;
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
  Eigen::VectorXd y_;
};

inline bool in_open_cap(const Cap& cap, const Eigen::VectorXd& y) { return cap.center.coords().dot(y) > cap.t; }

bool in_region(const SupportRegion& region, const Eigen::VectorXd& y) {
  return std::none_of(region.caps.begin(), region.caps.end(), [&](const Cap& c) { return in_open_cap(c, y); });
}

void require_same_dim(int d, const SpherePoint& x) {
  if (x.dim() != d) throw std::invalid_argument("potential_oracle: evaluation point has the wrong dimension");
}

OracleEstimate mc_indicator(int d, double s, const SpherePoint& x, std::size_t samples, std::uint64_t seed,
                            double weight, const std::function<bool(const Eigen::VectorXd&)>& inside) {
  UniformSphereSampler sampler(d, seed);
  RunningStats stats;
  const Eigen::VectorXd& xc = x.coords();
  for (std::size_t i = 0; i < samples; ++i) {
    const Eigen::VectorXd& y = sampler.next();
    stats.add(inside(y) ? weight * kernel_r2(s, (xc - y).squaredNorm()) : 0.0);
  }
  return {stats.mean(), stats.standard_error(), samples};
}

// Importance sampling u = t - (1 + t) v^k, k = 1/(1 - edge exponent), which
// cancels the boundary blow-up of the density.
OracleEstimate mc_zonal(const ZonalDensity& m, const KernelSpec& spec, const SpherePoint& x, std::size_t samples,
                        std::uint64_t seed) {
  if (!(m.edge_exponent >= 0 && m.edge_exponent < 1))
    throw std::domain_error("potential_oracle: edge exponent must lie in [0, 1)");
  const int d = spec.d;
  const double t = m.cap.t;
  const double k = 1 / (1 - m.edge_exponent);
  const double ratio = area_ratio(d);
  const Eigen::VectorXd& a = m.cap.center.coords();
  const Eigen::VectorXd& xc = x.coords();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;
  Eigen::VectorXd w(d + 1);
  RunningStats stats;
  for (std::size_t i = 0; i < samples; ++i) {
    const double v = 1 - unit(rng);  // (0, 1]
    const double u = t - (1 + t) * std::pow(v, k);
    double n2 = 0;
    do {
      for (Eigen::Index j = 0; j < w.size(); ++j) w[j] = normal(rng);
      w -= w.dot(a) * a;
      n2 = w.squaredNorm();
    } while (!(n2 > 1e-300));
    w /= std::sqrt(n2);
    const double r = std::sqrt(std::max(0.0, 1 - u * u));
    const Eigen::VectorXd y = u * a + r * w;
    const double jac = ratio * std::pow(r, d - 2) * (1 + t) * k * std::pow(v, k - 1);
    stats.add(jac * m.density(u) * kernel_r2(spec.s, (xc - y).squaredNorm()));
  }
  return {stats.mean(), stats.standard_error(), samples};
}

}  // namespace

OracleEstimate potential_oracle(const MeasureDescriptor& measure, const KernelSpec& spec, const SpherePoint& x,
                                std::size_t samples, std::uint64_t seed) {
  spec.validate();
  require_same_dim(spec.d, x);
  if (samples < 2 && !std::holds_alternative<PointMass>(measure))
    throw std::invalid_argument("potential_oracle: need at least two samples");
  return std::visit(
      [&](const auto& m) -> OracleEstimate {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, PointMass>) {
          return {m.mass * kernel_of_chord(spec.s, x.chord(m.at)), 0.0, 1};
        } else if constexpr (std::is_same_v<M, UniformOnSupport>) {
          const SupportRegion& region = m.region;
          return mc_indicator(spec.d, spec.s, x, samples, seed, m.normalization,
                              [&](const Eigen::VectorXd& y) { return in_region(region, y); });
        } else if constexpr (std::is_same_v<M, UniformOnCap>) {
          const Cap& cap = m.cap;
          return mc_indicator(spec.d, spec.s, x, samples, seed, m.normalization,
                              [&](const Eigen::VectorXd& y) { return in_open_cap(cap, y); });
        } else {
          return mc_zonal(m, spec, x, samples, seed);
        }
      },
      measure);
}

OracleEstimate zonal_potential_quadrature(const KernelSpec& spec, double t, const std::function<double(double)>& density,
                                          double xi) {
  if (spec.d != 2 || !(spec.s == 0 || spec.s == 1))
    throw std::domain_error("zonal_potential_quadrature: needs d = 2 and s in {0, 1}");
  if (!(t > -1 && t <= 1) || !(xi >= -1 && xi <= 1)) throw std::domain_error("zonal_potential_quadrature: bad heights");

  // Azimuthal mean of the kernel for |x - y|^2 = A - B cos(phi), with
  // A^2 - B^2 = 4 (xi - u)^2 supplied exactly through `gap` = |xi - u|.
  auto azimuthal_mean = [&](double u, double gap) {
    const double a = 2 - 2 * xi * u;
    if (spec.s == 0) return -0.5 * std::log(0.5 * (a + 2 * gap));
    const double b = 2 * std::sqrt(std::max(0.0, (1 - xi * xi) * (1 - u * u)));
    double p = std::sqrt(a + b);
    double q = 2 * gap / p;  // sqrt(A - B)
    for (int it = 0; it < 64 && std::abs(p - q) > 1e-16 * p; ++it) {
      const double mid = 0.5 * (p + q);
      q = std::sqrt(p * q);
      p = mid;
    }
    return 1 / p;
  };
  auto integrand = [&](double u, double gap) {
    if (u >= t) return 0.0;
    return 0.5 * density(u) * azimuthal_mean(u, gap);
  };

  boost::math::quadrature::tanh_sinh<double> integrator;
  const double tol = 1e-13;
  double value = 0;
  double error = 0;
  auto piece = [&](double lo, double hi, bool xi_at_lo, bool xi_at_hi) {
    double err = 0;
    const double v = integrator.integrate(
        [&](double u, double xc) {
          double gap = std::abs(xi - u);
          const bool near_lo = u - lo < hi - u;
          if ((near_lo && xi_at_lo) || (!near_lo && xi_at_hi)) gap = std::abs(xc);
          return integrand(u, gap);
        },
        lo, hi, tol, &err);
    value += v;
    error += err * std::abs(v);
  };
  if (xi > -1 && xi < t) {
    piece(-1, xi, false, true);
    piece(xi, t, true, false);
  } else {
    piece(-1, t, xi == -1, xi == t);
  }
  return {value, error, 0};
}

std::vector<SpherePoint> sample_support(const SupportRegion& region, std::size_t n, std::uint64_t seed) {
  UniformSphereSampler sampler(region.d, seed);
  std::vector<SpherePoint> out;
  out.reserve(n);
  std::size_t tries = 0;
  while (out.size() < n) {
    const Eigen::VectorXd& y = sampler.next();
    if (in_region(region, y)) out.emplace_back(y);
    if (++tries > 1000000 && out.empty()) throw std::runtime_error("sample_support: region too small to sample");
  }
  return out;
}

std::vector<SpherePoint> sample_excluded(const SupportRegion& region, std::size_t n, std::uint64_t seed) {
  if (region.caps.empty() && n > 0) throw std::invalid_argument("sample_excluded: no caps");
  UniformSphereSampler sampler(region.d, seed);
  std::vector<SpherePoint> out;
  out.reserve(n);
  std::size_t tries = 0;
  while (out.size() < n) {
    const Eigen::VectorXd& y = sampler.next();
    if (!in_region(region, y)) out.emplace_back(y);
    if (++tries > 1000000 && out.empty()) throw std::runtime_error("sample_excluded: caps too small to sample");
  }
  return out;
}

std::vector<Cap> support_windows(const SupportRegion& region, std::size_t count, double geodesic_radius,
                                 std::uint64_t seed) {
  UniformSphereSampler sampler(region.d, seed);
  std::vector<Cap> out;
  std::size_t tries = 0;
  while (out.size() < count) {
    if (++tries > 1000000) throw std::runtime_error("support_windows: no room for windows of this radius");
    const SpherePoint c(sampler.next());
    const bool clear = std::all_of(region.caps.begin(), region.caps.end(), [&](const Cap& cap) {
      return geodesic_distance(c, cap.center) >= geodesic_radius + cap.alpha + 1e-9;
    });
    if (clear) out.push_back(Cap::from_geodesic(c, geodesic_radius));
  }
  return out;
}

VerificationReport check_variational(const SupportSolution& solution, const ProblemSpec& spec,
                                     const VariationalOptions& options) {
  VerificationReport rep;
  rep.name = "variational";
  rep.seed = options.seed;
  rep.tolerance = 1;
  if (!solution.feasible) {
    rep.statistic = std::numeric_limits<double>::infinity();
    rep.message = "solution is infeasible (overlapping caps)";
    return rep;
  }
  if (options.grid < 2 || options.samples < 2) throw std::invalid_argument("check_variational: grid and samples >= 2");

  const MeasureDescriptor measure = UniformOnSupport{solution.region, solution.normalization};
  const KernelSpec kernel = spec.kernel();
  const auto interior = sample_support(solution.region, options.grid, stream_seed(options.seed, 0));
  const auto exterior = sample_excluded(solution.region, options.grid, stream_seed(options.seed, 1));

  std::uint64_t stream = 2;
  auto weighted = [&](const SpherePoint& x, double& se) {
    const OracleEstimate est = potential_oracle(measure, kernel, x, options.samples, stream_seed(options.seed, stream++));
    se = est.standard_error;
    return est.value + external_field(spec, x);
  };

  RunningStats inner;
  double se_sum = 0;
  std::vector<double> values;
  for (const auto& x : interior) {
    double se = 0;
    values.push_back(weighted(x, se));
    inner.add(values.back());
    se_sum += se;
  }
  const double mean = inner.mean();
  double var = 0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double stddev = std::sqrt(var / static_cast<double>(values.size() - 1));
  const double mean_se = se_sum / static_cast<double>(values.size());

  double ext_min = std::numeric_limits<double>::infinity();
  double ext_se = 0;
  for (const auto& x : exterior) {
    double se = 0;
    ext_min = std::min(ext_min, weighted(x, se));
    ext_se = std::max(ext_se, se);
  }

  const double tol_int = options.tol_interior > 0 ? options.tol_interior : 3 * mean_se;
  const double tol_ext = 3 * ext_se + options.tol_exterior;
  const double drop = mean - ext_min;
  rep.statistic = std::max(stddev / tol_int, drop / tol_ext);
  rep.pass = rep.statistic <= rep.tolerance;
  rep.samples = options.samples * 2 * options.grid;
  rep.details = {{"interior_mean", mean},
                 {"interior_stddev", stddev},
                 {"interior_tolerance", tol_int},
                 {"mean_standard_error", mean_se},
                 {"exterior_min", ext_min},
                 {"exterior_tolerance", tol_ext},
                 {"exterior_margin", ext_min - (mean - tol_ext)},
                 {"equilibrium_constant", solution.equilibrium_constant}};
  const bool int_ok = stddev <= tol_int;
  const bool ext_ok = drop <= tol_ext;
  rep.message = std::string(int_ok ? "constant on support" : "not constant on support") + ", " +
                (ext_ok ? "exterior inequality holds" : "exterior inequality violated");
  return rep;
}

VerificationReport check_cap_exclusion(const Eigen::Matrix3Xd& points, std::span<const Cap> caps, double margin) {
  VerificationReport rep;
  rep.name = "cap_exclusion";
  rep.samples = static_cast<std::size_t>(points.cols());
  std::size_t violations = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    bool hit = false;
    for (const auto& cap : caps) {
      if (cap.center.dim() != 2) throw std::invalid_argument("check_cap_exclusion: caps must live on S^2");
      const double gap = (points.col(j) - Eigen::Vector3d(cap.center.coords())).norm() - cap.gamma;
      min_margin = std::min(min_margin, gap);
      hit = hit || gap < -margin;
    }
    if (hit) ++violations;
  }
  rep.statistic = static_cast<double>(violations);
  rep.tolerance = 0;
  rep.pass = violations == 0;
  const double n = std::max<double>(1, static_cast<double>(points.cols()));
  rep.details = {{"violations", static_cast<double>(violations)},
                 {"violation_fraction", static_cast<double>(violations) / n},
                 {"min_margin", min_margin}};
  rep.message = std::to_string(violations) + " points inside an excluded cap";
  return rep;
}

VerificationReport check_empirical_density(const Eigen::Matrix3Xd& points, const SupportSolution& solution,
                                           std::span<const Cap> windows, double tol) {
  for (const auto& w : windows) {
    for (const auto& cap : solution.region.caps) {
      if (geodesic_distance(w.center, cap.center) < w.alpha + cap.alpha - 1e-12)
        throw std::domain_error("check_empirical_density: window meets an excluded cap");
    }
  }
  VerificationReport rep;
  rep.name = "empirical_density";
  rep.tolerance = tol;
  rep.samples = static_cast<std::size_t>(points.cols());
  const double n = static_cast<double>(points.cols());
  double worst = -std::numeric_limits<double>::infinity();
  double worst_dev = 0;
  double worst_index = -1;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const Eigen::Vector3d c = windows[i].center.coords();
    std::size_t count = 0;
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      if (c.dot(points.col(j)) > windows[i].t) ++count;
    }
    const double expected = solution.normalization * cap_area(2, windows[i].t);
    const double dev = std::abs(static_cast<double>(count) / n - expected);
    const double excess = dev - 3 * std::sqrt(expected / n);
    if (excess > worst) {
      worst = excess;
      worst_dev = dev;
      worst_index = static_cast<double>(i);
    }
  }
  rep.statistic = windows.empty() ? 0.0 : worst;
  rep.pass = rep.statistic <= tol;
  rep.details = {{"windows", static_cast<double>(windows.size())},
                 {"worst_window", worst_index},
                 {"worst_deviation", worst_dev}};
  return rep;
}

VerificationReport check_planar_density(const PlanarEquilibrium& planar, std::size_t grid) {
  if (grid < 8) throw std::invalid_argument("check_planar_density: grid must be at least 8");
  VerificationReport rep;
  rep.name = "planar_density";
  rep.tolerance = 1;
  const double two_pi = 2 * std::numbers::pi;
  const auto m = static_cast<double>(grid);

  // Periodic trapezoid in the angle, adaptive Gauss-Kronrod in the radius.
  auto disc_mass = [&](std::complex<double> center, double radius) {
    auto ring = [&](double r) {
      double sum = 0;
      for (std::size_t k = 0; k < grid; ++k) {
        sum += planar.density(center + std::polar(r, two_pi * (static_cast<double>(k) + 0.5) / m));
      }
      return r * two_pi * sum / m;
    };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(ring, 0.0, radius, 15, 1e-13);
  };
  double mass = disc_mass(0.0, planar.outer_radius);
  for (const auto& disc : planar.excluded_discs) mass -= disc_mass(disc.center, disc.radius);

  // Five-point Laplacian with Richardson extrapolation at spiral nodes.
  auto laplacian = [&](std::complex<double> z, double h) {
    const std::complex<double> i(0, 1);
    return (planar.field(z + h) + planar.field(z - h) + planar.field(z + i * h) + planar.field(z - i * h) -
            4 * planar.field(z)) /
           (h * h);
  };
  const double golden = std::numbers::pi * (3 - std::sqrt(5.0));
  double lap_err = 0;
  double min_density = std::numeric_limits<double>::infinity();
  std::size_t tested = 0;
  for (std::size_t k = 0; k < grid * grid / 4; ++k) {
    const double kk = static_cast<double>(k);
    const std::complex<double> z =
        std::polar(planar.outer_radius * std::sqrt((kk + 0.5) / (m * m / 4)), golden * kk);
    const double h = 1e-3;
    bool clear = std::abs(z) < planar.outer_radius - 4 * h;
    for (const auto& disc : planar.excluded_discs) clear = clear && std::abs(z - disc.center) > disc.radius + 4 * h;
    if (!clear) continue;
    const double lap = (4 * laplacian(z, h / 2) - laplacian(z, h)) / 3;
    const double rho = planar.density(z);
    min_density = std::min(min_density, rho);
    lap_err = std::max(lap_err, std::abs(lap / two_pi - rho) / rho);
    ++tested;
  }
  const double mass_err = std::abs(mass - 1);
  const bool positive = min_density > 0;
  rep.statistic = positive ? std::max(mass_err / 1e-3, lap_err / 1e-5) : std::numeric_limits<double>::infinity();
  rep.pass = rep.statistic <= rep.tolerance;
  rep.samples = tested;
  rep.details = {{"mass", mass},
                 {"mass_error", mass_err},
                 {"laplacian_relative_error", lap_err},
                 {"min_density", min_density},
                 {"density_at_origin", planar.density(0.0)}};
  return rep;
}

}  // namespace sphereq
