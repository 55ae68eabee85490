#include "sphereq/discrete.hpp"

#include "sphereq/error.hpp"
#include "sphereq/random.hpp"
#include "sphereq/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

namespace sphereq {

void OptimizerSettings::validate() const {
  if (max_iterations <= 0 || restart_count <= 0 || history_size <= 0 || threads <= 0)
    throw std::invalid_argument("optimizer: iteration, restart, history and thread counts must be positive");
  if (!(perturbation_scale > 0 && perturbation_scale < std::numbers::pi / 4))
    throw std::invalid_argument("optimizer: perturbation scale must lie in (0, pi/4)");
  if (!(pole_guard > 0 && pole_guard < 0.1)) throw std::invalid_argument("optimizer: pole guard must lie in (0, 0.1)");
}

namespace {

// k_s(r) and the factor f with grad_x k_s(|x-y|) = f (x - y), both from r^2.
struct KernelTerm {
  double value;
  double factor;
};

inline KernelTerm kernel_term(double s, double r2) {
  if (s == 0) return {-0.5 * std::log(r2), -1 / r2};
  if (s == 1) {
    const double inv = 1 / std::sqrt(r2);
    return {inv, -inv / r2};
  }
  const double v = std::pow(r2, -0.5 * s);
  return {v, -s * v / r2};
}

// Neumaier compensated sum; the energy of a few hundred points is a sum of
// ~1e5 terms whose rounding would otherwise swamp late descent steps.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    comp_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0;
  double comp_ = 0;
};

void require_s2(const ProblemSpec& spec) {
  if (spec.d != 2) throw std::domain_error("discrete energy: only S^2 configurations are supported");
}

}  // namespace

double energy_and_gradient(const Eigen::Matrix3Xd& x, const ProblemSpec& spec, Eigen::Matrix3Xd* grad,
                           double* min_chord) {
  const Eigen::Index n = x.cols();
  const double s = spec.s;
  if (grad) grad->setZero(3, n);

  // Row-major copies so the inner loops over j vectorize.
  const Eigen::Matrix<double, Eigen::Dynamic, 3> pts = x.transpose();
  Eigen::Matrix<double, Eigen::Dynamic, 3> g = Eigen::Matrix<double, Eigen::Dynamic, 3>::Zero(n, 3);
  Eigen::ArrayXd r2(n);
  Eigen::ArrayXd factor(n);
  CompensatedSum pair_sum;
  double min_r2 = std::numeric_limits<double>::infinity();
  constexpr Eigen::Index kBlock = 8;

  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const Eigen::Index m = n - i - 1;
    const auto dx = pts.col(0).tail(m).array() - pts(i, 0);
    const auto dy = pts.col(1).tail(m).array() - pts(i, 1);
    const auto dz = pts.col(2).tail(m).array() - pts(i, 2);
    auto rr = r2.head(m);
    rr = dx * dx + dy * dy + dz * dz;
    const double row_min = rr.minCoeff();
    min_r2 = std::min(min_r2, row_min);
    auto f = factor.head(m);
    if (s == 0 && row_min < 1e-24) {
      for (Eigen::Index j = 0; j < m; ++j) pair_sum.add(-0.5 * std::log(rr[j]));
      f = -rr.inverse();
    } else if (s == 0) {
      // One log per block: sum log r^2 = log prod r^2, and a block of eight
      // squared chords in [1e-24, 4] cannot leave the double range.
      for (Eigen::Index b = 0; b < m; b += kBlock) {
        pair_sum.add(-0.5 * std::log(rr.segment(b, std::min(kBlock, m - b)).prod()));
      }
      f = -rr.inverse();
    } else if (s == 1) {
      const Eigen::ArrayXd inv = rr.rsqrt();
      for (Eigen::Index b = 0; b < m; b += kBlock) pair_sum.add(inv.segment(b, std::min(kBlock, m - b)).sum());
      f = -inv * inv * inv;
    } else {
      const Eigen::ArrayXd v = rr.pow(-0.5 * s);
      for (Eigen::Index b = 0; b < m; b += kBlock) pair_sum.add(v.segment(b, std::min(kBlock, m - b)).sum());
      f = -s * v / rr;
    }
    if (grad) {
      // d/dx_i of k(|x_i - x_j|) is f (x_i - x_j) = -f d.
      g(i, 0) -= 2 * (f * dx).sum();
      g(i, 1) -= 2 * (f * dy).sum();
      g(i, 2) -= 2 * (f * dz).sum();
      g.col(0).tail(m).array() += 2 * f * dx;
      g.col(1).tail(m).array() += 2 * f * dy;
      g.col(2).tail(m).array() += 2 * f * dz;
    }
  }
  if (grad) *grad = g.transpose();
  CompensatedSum e;
  e.add(2 * pair_sum.value());

  const double w = 2.0 * static_cast<double>(n - 1);
  for (const auto& src : spec.sources) {
    const Eigen::Vector3d a = src.position.coords();
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Vector3d diff = x.col(j) - a;
      const double r2 = diff.squaredNorm();
      min_r2 = std::min(min_r2, r2);
      const KernelTerm k = kernel_term(s, r2);
      e.add(w * src.charge * k.value);
      if (grad) grad->col(j) += w * src.charge * k.factor * diff;
    }
  }
  if (min_chord) *min_chord = std::sqrt(min_r2);
  return e.value();
}

double energy(const Eigen::Matrix3Xd& points, const ProblemSpec& spec) {
  require_s2(spec);
  double min_chord = 0;
  const double e = energy_and_gradient(points, spec, nullptr, &min_chord);
  if (!(min_chord > 0)) throw SingularityError("energy: coincident points or a point on a source");
  return e;
}

Eigen::Matrix3Xd points_from_angles(const Eigen::VectorXd& angles) {
  const Eigen::Index n = angles.size() / 2;
  Eigen::Matrix3Xd x(3, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double th = angles[2 * j];
    const double ph = angles[2 * j + 1];
    x.col(j) << std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th);
  }
  return x;
}

Eigen::VectorXd angles_from_points(const Eigen::Matrix3Xd& points) {
  Eigen::VectorXd a(2 * points.cols());
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    const Eigen::Vector3d v = points.col(j).normalized();
    a[2 * j] = std::acos(std::clamp(v.z(), -1.0, 1.0));
    double ph = std::atan2(v.y(), v.x());
    if (ph < 0) ph += 2 * std::numbers::pi;
    a[2 * j + 1] = ph;
  }
  return a;
}

namespace {

Eigen::VectorXd chain_rule(const Eigen::VectorXd& angles, const Eigen::Matrix3Xd& cart) {
  Eigen::VectorXd g(angles.size());
  for (Eigen::Index j = 0; j < cart.cols(); ++j) {
    const double th = angles[2 * j];
    const double ph = angles[2 * j + 1];
    const double ct = std::cos(th), st = std::sin(th), cp = std::cos(ph), sp = std::sin(ph);
    const Eigen::Vector3d c = cart.col(j);
    g[2 * j] = c.x() * ct * cp + c.y() * ct * sp - c.z() * st;
    g[2 * j + 1] = -c.x() * st * sp + c.y() * st * cp;
  }
  return g;
}

}  // namespace

Eigen::VectorXd gradient(const Eigen::VectorXd& angles, const ProblemSpec& spec) {
  require_s2(spec);
  for (Eigen::Index j = 0; j < angles.size(); j += 2) {
    if (angles[j] <= 0 || angles[j] >= std::numbers::pi)
      throw SingularityError("gradient: polar angle on a pole of the parametrization");
  }
  Eigen::Matrix3Xd cart;
  energy_and_gradient(points_from_angles(angles), spec, &cart);
  return chain_rule(angles, cart);
}

// ---------------------------------------------------------------------------
// Limited-memory BFGS with box constraints on the polar angles.

namespace {

constexpr double kMinChord = 1e-12;

class AngleObjective {
 public:
  explicit AngleObjective(const ProblemSpec& spec) : spec_(spec) {}

  // +inf when two points (or a point and a source) come closer than kMinChord.
  double operator()(const Eigen::VectorXd& angles, Eigen::VectorXd& grad) const {
    double min_chord = 0;
    Eigen::Matrix3Xd cart;
    const double e = energy_and_gradient(points_from_angles(angles), spec_, &cart, &min_chord);
    if (!(min_chord >= kMinChord) || !std::isfinite(e)) return std::numeric_limits<double>::infinity();
    grad = chain_rule(angles, cart);
    return e;
  }

 private:
  const ProblemSpec& spec_;
};

struct Bounds {
  double lo;
  double hi;

  bool is_theta(Eigen::Index k) const { return k % 2 == 0; }
};

Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const Bounds& b) {
  Eigen::VectorXd pg = g;
  for (Eigen::Index k = 0; k < x.size(); k += 2) {
    if ((x[k] <= b.lo && g[k] > 0) || (x[k] >= b.hi && g[k] < 0)) pg[k] = 0;
  }
  return pg;
}

double wrap_angle(double phi) {
  phi = std::fmod(phi, 2 * std::numbers::pi);
  return phi < 0 ? phi + 2 * std::numbers::pi : phi;
}

Eigen::VectorXd clip(Eigen::VectorXd x, const Bounds& b) {
  for (Eigen::Index k = 0; k < x.size(); k += 2) x[k] = std::clamp(x[k], b.lo, b.hi);
  return x;
}

struct LineSearchOutcome {
  bool ok = false;
  double alpha = 0;
  double f = 0;
  Eigen::VectorXd x;
  Eigen::VectorXd g;
};

// Relative size of the rounding noise in the summed energy.
constexpr double kEnergyNoise = 1e-13;

// Strong Wolfe conditions (c1 = 1e-4, c2 = 0.9), bracketing then zoom with
// safeguarded cubic interpolation. Steps stop at alpha_max (a bound). Once
// the decrease drops below the noise level, sufficient decrease is replaced
// by the approximate (slope-based) Wolfe test.
LineSearchOutcome strong_wolfe(const AngleObjective& obj, const Bounds& bounds, const Eigen::VectorXd& x0, double f0,
                               const Eigen::VectorXd& g0, const Eigen::VectorXd& dir, double alpha_init,
                               double alpha_max) {
  constexpr double c1 = 1e-4;
  constexpr double c2 = 0.9;
  const double dphi0 = g0.dot(dir);
  const double noise = kEnergyNoise * std::abs(f0);

  struct Sample {
    double alpha, f, dphi;
    Eigen::VectorXd x, g;
  };
  auto eval = [&](double alpha) {
    Sample smp{alpha, 0, 0, clip(x0 + alpha * dir, bounds), Eigen::VectorXd()};
    smp.f = obj(smp.x, smp.g);
    smp.dphi = std::isfinite(smp.f) ? smp.g.dot(dir) : std::numeric_limits<double>::quiet_NaN();
    return smp;
  };
  auto accept = [](Sample&& smp) {
    return LineSearchOutcome{true, smp.alpha, smp.f, std::move(smp.x), std::move(smp.g)};
  };
  auto armijo_fails = [&](const Sample& smp) {
    if (!std::isfinite(smp.f)) return true;
    if (smp.f <= f0 + c1 * smp.alpha * dphi0) return false;
    return !(smp.f <= f0 + noise && smp.dphi <= -0.8 * dphi0);
  };

  auto zoom = [&](Sample lo, Sample hi) -> LineSearchOutcome {
    for (int it = 0; it < 40; ++it) {
      const double width = hi.alpha - lo.alpha;
      double alpha = 0.5 * (lo.alpha + hi.alpha);
      if (std::isfinite(hi.f) && std::isfinite(hi.dphi)) {
        // Minimizer of the cubic through (lo, hi) with matching slopes.
        const double d1 = lo.dphi + hi.dphi - 3 * (lo.f - hi.f) / (lo.alpha - hi.alpha);
        const double disc = d1 * d1 - lo.dphi * hi.dphi;
        if (disc >= 0) {
          const double d2 = std::copysign(std::sqrt(disc), hi.alpha - lo.alpha);
          const double cand =
              hi.alpha - (hi.alpha - lo.alpha) * (hi.dphi + d2 - d1) / (hi.dphi - lo.dphi + 2 * d2);
          if (std::isfinite(cand)) alpha = cand;
        }
      }
      const double a_min = std::min(lo.alpha, hi.alpha);
      const double a_max = std::max(lo.alpha, hi.alpha);
      alpha = std::clamp(alpha, a_min + 0.1 * (a_max - a_min), a_max - 0.1 * (a_max - a_min));
      Sample cur = eval(alpha);
      if (armijo_fails(cur) || cur.f >= lo.f + noise) {
        hi = std::move(cur);
      } else {
        if (std::abs(cur.dphi) <= -c2 * dphi0) return accept(std::move(cur));
        if (cur.dphi * (hi.alpha - lo.alpha) >= 0) hi = lo;
        lo = std::move(cur);
      }
      if (std::abs(width) <= 1e-16 * std::max(1.0, std::abs(lo.alpha))) break;
    }
    // Sufficient decrease without the curvature condition is still progress.
    if (lo.alpha > 0) return accept(std::move(lo));
    return {};
  };

  Sample prev{0, f0, dphi0, x0, g0};
  double alpha = std::min(alpha_init, alpha_max);
  for (int it = 0; it < 40; ++it) {
    Sample cur = eval(alpha);
    if (armijo_fails(cur) || (it > 0 && cur.f >= prev.f + noise)) return zoom(std::move(prev), std::move(cur));
    if (std::abs(cur.dphi) <= -c2 * dphi0) return accept(std::move(cur));
    if (cur.dphi >= 0) return zoom(std::move(cur), std::move(prev));
    if (alpha >= alpha_max) return accept(std::move(cur));
    prev = std::move(cur);
    alpha = std::min(2 * alpha, alpha_max);
  }
  return {};
}

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = 0;
  double grad_inf = 0;
  int iterations = 0;
  bool converged = false;
  bool line_search_failed = false;
  std::vector<double> history;
};

LbfgsResult lbfgs_box(const AngleObjective& obj, Eigen::VectorXd x, const Bounds& bounds, double tol,
                      const OptimizerSettings& settings) {
  LbfgsResult res;
  x = clip(std::move(x), bounds);
  Eigen::VectorXd g;
  double f = obj(x, g);
  if (!std::isfinite(f)) throw SingularityError("minimize: initial configuration has coincident points");
  if (settings.record_history) res.history.push_back(f);

  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> memory;
  const int m = settings.history_size;
  int it = 0;
  for (; it < settings.max_iterations; ++it) {
    // A point held at a pole whose descent direction runs past it is moved to
    // the opposite meridian (a displacement of order the pole guard), where
    // the same motion is feasible.
    Eigen::VectorXd flipped = x;
    bool any_flip = false;
    for (Eigen::Index k = 0; k < x.size(); k += 2) {
      if ((x[k] <= bounds.lo && g[k] > 0) || (x[k] >= bounds.hi && g[k] < 0)) {
        flipped[k + 1] = wrap_angle(x[k + 1] + std::numbers::pi);
        any_flip = true;
      }
    }
    if (any_flip) {
      Eigen::VectorXd gf;
      const double ff = obj(flipped, gf);
      if (ff <= f) {
        x = std::move(flipped);
        g = std::move(gf);
        f = ff;
        memory.clear();
      }
    }

    Eigen::VectorXd pg = projected_gradient(x, g, bounds);
    res.grad_inf = pg.lpNorm<Eigen::Infinity>();
    if (res.grad_inf <= tol) {
      res.converged = true;
      break;
    }
    // Variables held at a bound are excluded from the quasi-Newton step.
    Eigen::VectorXd free_mask = Eigen::VectorXd::Ones(x.size());
    for (Eigen::Index k = 0; k < x.size(); k += 2) {
      if (pg[k] == 0 && g[k] != 0) free_mask[k] = 0;
    }

    Eigen::VectorXd q = pg;
    std::vector<double> alphas(memory.size());
    for (std::size_t k = memory.size(); k-- > 0;) {
      const auto& [s, y] = memory[k];
      alphas[k] = s.dot(q) / y.dot(s);
      q -= alphas[k] * y;
    }
    if (!memory.empty()) {
      const auto& [s, y] = memory.back();
      q *= s.dot(y) / y.squaredNorm();
    }
    for (std::size_t k = 0; k < memory.size(); ++k) {
      const auto& [s, y] = memory[k];
      const double beta = y.dot(q) / y.dot(s);
      q += (alphas[k] - beta) * s;
    }
    Eigen::VectorXd dir = -q.cwiseProduct(free_mask);
    for (Eigen::Index k = 0; k < x.size(); k += 2) {
      if ((x[k] <= bounds.lo && dir[k] < 0) || (x[k] >= bounds.hi && dir[k] > 0)) dir[k] = 0;
    }
    if (!(dir.dot(pg) < 0)) {
      memory.clear();
      dir = -pg;
    }

    double alpha_max = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < x.size(); k += 2) {
      if (dir[k] < 0) alpha_max = std::min(alpha_max, (bounds.lo - x[k]) / dir[k]);
      if (dir[k] > 0) alpha_max = std::min(alpha_max, (bounds.hi - x[k]) / dir[k]);
    }
    alpha_max = std::max(alpha_max, 0.0);
    // Without curvature information, keep the first angular step at 0.1 rad.
    const double alpha_init = memory.empty() ? std::min(1.0, 0.1 / dir.lpNorm<Eigen::Infinity>()) : 1.0;

    LineSearchOutcome ls = strong_wolfe(obj, bounds, x, f, g, dir, alpha_init, alpha_max);
    if (!ls.ok || !(ls.f <= f + kEnergyNoise * std::abs(f))) {
      if (!memory.empty()) {
        memory.clear();
        continue;
      }
      res.line_search_failed = true;
      break;
    }
    Eigen::VectorXd s = ls.x - x;
    Eigen::VectorXd y = ls.g - g;
    if (s.dot(y) > 1e-12 * y.squaredNorm() && s.dot(y) > 0) {
      memory.emplace_back(std::move(s), std::move(y));
      if (static_cast<int>(memory.size()) > m) memory.pop_front();
    }
    x = std::move(ls.x);
    g = std::move(ls.g);
    f = ls.f;
    for (Eigen::Index k = 1; k < x.size(); k += 2) x[k] = wrap_angle(x[k]);
    if (settings.record_history) res.history.push_back(f);
  }
  res.iterations = it;
  res.x = std::move(x);
  res.f = f;
  if (!res.converged) res.grad_inf = projected_gradient(res.x, g, bounds).lpNorm<Eigen::Infinity>();
  return res;
}

}  // namespace

PointConfiguration minimize(const Eigen::Matrix3Xd& initial, const ProblemSpec& spec,
                            const OptimizerSettings& settings) {
  require_s2(spec);
  settings.validate();
  if (initial.cols() < 2) throw std::invalid_argument("minimize: need at least two points");

  // Put the first source on the north pole, where theta = 0 is never approached.
  Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
  if (!spec.sources.empty()) rot = rotation_to_pole(spec.sources.front().position);
  ProblemSpec rotated = spec;
  for (auto& src : rotated.sources) src.position = SpherePoint(Eigen::VectorXd(rot * src.position.coords()));

  const Bounds bounds{settings.pole_guard, std::numbers::pi - settings.pole_guard};
  const double n = static_cast<double>(initial.cols());
  const double tol = settings.gradient_tolerance > 0 ? settings.gradient_tolerance : 1e-8 * n;
  const AngleObjective obj(rotated);
  LbfgsResult res = lbfgs_box(obj, angles_from_points(rot * initial), bounds, tol, settings);

  PointConfiguration out;
  out.points = rot.transpose() * points_from_angles(res.x);
  out.energy = res.f;
  out.grad_inf_norm = res.grad_inf;
  out.iterations = res.iterations;
  out.restarts_used = 1;
  out.converged = res.converged;
  out.line_search_failed = res.line_search_failed;
  out.energy_history = std::move(res.history);
  return out;
}

Eigen::Matrix3Xd perturb(const Eigen::Matrix3Xd& points, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::Matrix3Xd out(3, points.cols());
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    const Eigen::Vector3d x = points.col(j);
    Eigen::Vector3d kick(normal(rng), normal(rng), normal(rng));
    kick -= kick.dot(x) * x;
    out.col(j) = (x + kick).normalized();
  }
  return out;
}

Eigen::Matrix3Xd uniform_points(std::size_t n, std::uint64_t seed) {
  const auto pts = sample_uniform(2, n, seed);
  Eigen::Matrix3Xd x(3, static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) x.col(static_cast<Eigen::Index>(j)) = pts[j].coords();
  return x;
}

PointConfiguration multistart(const ProblemSpec& spec, std::size_t n, const OptimizerSettings& settings) {
  settings.validate();
  if (n < 2) throw std::invalid_argument("multistart: need at least two points");
  PointConfiguration best = minimize(uniform_points(n, stream_seed(settings.seed, 0)), spec, settings);
  int total_iterations = best.iterations;
  bool all_failed = best.line_search_failed;

  // Restarts are launched in batches that share the incumbent; results are
  // reduced in restart order so a fixed thread count is reproducible.
  int next = 1;
  while (next < settings.restart_count) {
    const int batch = std::min(settings.threads, settings.restart_count - next);
    std::vector<PointConfiguration> results(static_cast<std::size_t>(batch));
    const Eigen::Matrix3Xd incumbent = best.points;
    auto run = [&](int k) {
      const auto seed = stream_seed(settings.seed, static_cast<std::uint64_t>(next + k));
      results[static_cast<std::size_t>(k)] = minimize(perturb(incumbent, settings.perturbation_scale, seed), spec, settings);
    };
    if (batch == 1) {
      run(0);
    } else {
      std::vector<std::jthread> workers;
      for (int k = 0; k < batch; ++k) workers.emplace_back(run, k);
    }
    for (auto& r : results) {
      total_iterations += r.iterations;
      all_failed = all_failed && r.line_search_failed;
      if (r.energy < best.energy) best = std::move(r);
    }
    next += batch;
  }
  best.restarts_used = settings.restart_count;
  best.iterations = total_iterations;
  best.line_search_failed = all_failed;
  return best;
}

}  // namespace sphereq
