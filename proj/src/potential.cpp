#include "sphereq/potential.hpp"

#include "sphereq/error.hpp"
#include "sphereq/specfun.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sphereq {

namespace sf = specfun;

double kernel(const KernelSpec& spec, const SpherePoint& x, const SpherePoint& y) {
  return kernel_of_chord(spec.s, x.chord(y));
}

double sphere_energy(const KernelSpec& spec) {
  const int d = spec.d;
  const double s = spec.s;
  if (!(s >= 0 && s < d)) throw std::domain_error("sphere_energy: need 0 <= s < d");
  if (s == 0) return -std::numbers::ln2 + 0.5 * (sf::digamma<double>(d) - sf::digamma(0.5 * d));
  const double log_w = sf::ln_gamma<double>(d) + sf::ln_gamma((d - s) / 2) - s * std::numbers::ln2 -
                       sf::ln_gamma(0.5 * d) - sf::ln_gamma(d - s / 2);
  return std::exp(log_w);
}

double area_ratio(int d) {
  return std::exp(sf::ln_gamma(0.5 * (d + 1)) - sf::ln_gamma(0.5 * d)) / std::sqrt(std::numbers::pi);
}

// ---------------------------------------------------------------------------

double log_cap_complement_energy(double t) {
  if (!(t > -1 && t <= 1)) throw std::domain_error("log_cap_complement_energy: need -1 < t <= 1");
  // Potential of sigma_2|Sigma at the cap center, integrated in closed form.
  const double w = 2 * (1 - t);
  const double wlogw = w > 0 ? w * std::log(w) : 0.0;
  const double integral = 0.5 * ((4 * std::log(4.0) - 4) - (wlogw - w));
  const double at_center = -0.25 * integral;
  // bal(sigma) = sigma|Sigma + ((1-t)/2) beta; beta has potential log(1/gamma) at the center.
  const double circle_at_center = w > 0 ? -0.5 * std::log(w) : 0.0;
  return at_center + 0.5 * (1 - t) * circle_at_center - 0.5 * std::log((1 + t) / 2);
}

LogBalayagePotentials log_balayage_potentials(const Cap& cap, double xi) {
  const double t = cap.t;
  LogBalayagePotentials out;
  out.u_sigma = log_cap_complement_energy(t);
  if (xi > t) {
    out.u_sigma += 0.5 * std::log((1 + t) / (1 + xi));
    out.u_delta = -0.5 * std::log((1 + xi) * (1 - t));
  } else {
    out.u_delta = -0.5 * std::log((1 - xi) * (1 + t));
  }
  return out;
}

LogBalayagePotentials log_balayage_potentials(const Cap& cap, const SpherePoint& x) {
  return log_balayage_potentials(cap, cap.height(x));
}

double log_profile(double u, double total_charge, double charge) {
  return 0.5 * (1 + total_charge - charge) * std::log1p(u) + 0.5 * charge * std::log1p(-u);
}

double log_profile_argmax(double total_charge, double charge) { return 1 - 2 * charge / (1 + total_charge); }

// ---------------------------------------------------------------------------

namespace {

void require_zonal_kernel(const KernelSpec& spec) {
  if (!(spec.is_log() && spec.d == 2) && !spec.is_exceptional())
    throw std::domain_error("closed-form cap potentials need s = 0 on S^2 or s = d - 2");
}

// Mass of bal_{d-2}(sigma_d|cap) is W * c(t), c(t) = ((1-t)/2)(1-t^2)^{d/2-1}.
double boundary_factor(int d, double t) { return 0.5 * (1 - t) * std::pow(1 - t * t, 0.5 * d - 1); }

// Potential of bal(sigma_d, Sigma) where Sigma = {<y,a> <= t}.
double balayage_sigma_potential(const KernelSpec& spec, double t, double xi) {
  if (spec.is_log()) return log_cap_complement_energy(t) + (xi > t ? 0.5 * std::log((1 + t) / (1 + xi)) : 0.0);
  const double w = sphere_energy(spec);
  return xi > t ? w * std::pow((1 + t) / (1 + xi), 0.5 * spec.d - 1) : w;
}

// Mass carried by the boundary circle after sweeping sigma_d|cap onto Sigma.
double swept_cap_mass(const KernelSpec& spec, double t) {
  return spec.is_log() ? 0.5 * (1 - t) : sphere_energy(spec) * boundary_factor(spec.d, t);
}

}  // namespace

double boundary_circle_potential(const KernelSpec& spec, double t, double xi) {
  require_zonal_kernel(spec);
  if (!(t > -1 && t < 1)) throw std::domain_error("boundary_circle_potential: need -1 < t < 1");
  if (spec.is_log()) return xi > t ? -0.5 * std::log((1 + xi) * (1 - t)) : -0.5 * std::log((1 - xi) * (1 + t));
  const int d = spec.d;
  const double gamma = std::sqrt(2 * (1 - t));
  const double p = 0.5 * d - 1;
  // beta = bal(delta_a) / ||bal(delta_a)||, ||bal(delta_a)|| = 4 c(t) / gamma^d.
  const double swept_delta = xi > t ? std::pow(gamma, -(d - 2)) * std::pow((1 + t) / (1 + xi), p)
                                    : std::pow(2 * (1 - xi), -p);
  return std::pow(gamma, d) / (4 * boundary_factor(d, t)) * swept_delta;
}

double uniform_cap_potential(const KernelSpec& spec, double t, double xi) {
  require_zonal_kernel(spec);
  const double on_complement =
      balayage_sigma_potential(spec, t, xi) - swept_cap_mass(spec, t) * boundary_circle_potential(spec, t, xi);
  return sphere_energy(spec) - on_complement;
}

double support_weighted_potential(const ProblemSpec& spec, std::span<const Cap> caps, double normalization,
                                  const SpherePoint& x) {
  const KernelSpec k = spec.kernel();
  require_zonal_kernel(k);
  if (caps.size() != spec.sources.size()) throw std::invalid_argument("support_weighted_potential: one cap per source");
  double u = sphere_energy(k);
  for (const auto& cap : caps) u -= uniform_cap_potential(k, cap.t, cap.height(x));
  return normalization * u + external_field(spec, x);
}

// ---------------------------------------------------------------------------

double SignedCapEquilibrium::total_mass() const {
  return uniform_coefficient * (1 - cap_area(d, cap.t)) + boundary_coefficient;
}

SignedCapEquilibrium signed_cap_equilibrium_dm2(const Cap& cap, double charge, int d, std::optional<double> phi) {
  if (d < 3) throw std::domain_error("signed_cap_equilibrium_dm2: need d >= 3");
  const double s = d - 2;
  const double w = sphere_energy({d, s});
  const double c = boundary_factor(d, cap.t);
  const double delta_weight = 4 * charge / std::pow(cap.gamma, d);
  const double support_area = 1 - cap_area(d, cap.t);
  const double value = phi ? *phi : (1 + delta_weight * c) / (support_area / w + c);

  SignedCapEquilibrium out;
  out.cap = cap;
  out.charge = charge;
  out.s = s;
  out.d = d;
  out.phi_value = value;
  out.uniform_coefficient = value / w;
  out.boundary_coefficient = c * (value - delta_weight);
  return out;
}

double signed_density_general_s(const Cap& cap, double charge, int d, double s, double phi, double u) {
  if (!(s > d - 2 && s < d)) throw std::domain_error("signed_density_general_s: need d-2 < s < d");
  const double t = cap.t;
  if (!(u >= -1 && u <= t)) throw std::domain_error("signed_density_general_s: height must lie in [-1, t)");
  if (u == t) throw SingularityError("signed_density_general_s: edge singularity at u = t");
  const double w = sphere_energy({d, s});
  const double front = std::exp(sf::ln_gamma(0.5 * d) - sf::ln_gamma(d - 0.5 * s)) / w;
  const double shape = std::pow((1 - t) / (1 - u), 0.5 * d) * std::pow((t - u) / (1 - t), 0.5 * (s - d));
  const double hyp = sf::reg_hyp2f1(1.0, 0.5 * d, 1 - 0.5 * (d - s), (t - u) / (1 - u));
  // The point-charge term carries the same 1/Gamma(c) as the regularized 2F1.
  const double swept = charge * std::pow(2.0, d - s) / std::pow(cap.gamma, d) * sf::rgamma(1 - 0.5 * (d - s));
  return front * shape * (phi * hyp - swept);
}

double weighted_potential_dm2(const Cap& cap, double charge, double phi, int d, double xi) {
  if (d < 3) throw std::domain_error("weighted_potential_dm2: need d >= 3");
  if (xi <= cap.t) return phi;
  if (xi >= 1) throw SingularityError("weighted_potential_dm2: evaluation at the source");
  const double p = 0.5 * d - 1;
  const double ratio = std::pow((1 + cap.t) / (1 + xi), p);
  return phi * ratio + charge / std::pow(2 * (1 - xi), p) - charge / std::pow(cap.gamma, d - 2) * ratio;
}

double weighted_potential_general_s(const Cap& cap, double charge, double phi, int d, double s, double xi) {
  if (!(s > d - 2 && s < d)) throw std::domain_error("weighted_potential_general_s: need d-2 < s < d");
  const double t = cap.t;
  if (xi <= t) return phi;
  if (xi >= 1) throw SingularityError("weighted_potential_general_s: evaluation at the source");
  const double a = 0.5 * (d - s);
  const double b = 0.5 * s;
  const double x1 = std::min(1.0, 2 / (1 - t) * (xi - t) / (1 + xi));
  const double x2 = (xi - t) / (1 + xi);
  return phi + charge / std::pow(2 * (1 - xi), b) * sf::reg_inc_beta(x1, a, b) - phi * sf::reg_inc_beta(x2, a, b);
}

double mhaskar_saff_coulomb(double t, double q_bar) {
  if (!(t > -1 && t < 1)) throw std::domain_error("mhaskar_saff_coulomb: need -1 < t < 1");
  const double pi = std::numbers::pi;
  const double swept_delta = std::asin(t) / pi + 0.5;
  const double swept_sigma = (std::sqrt(1 - t * t) + std::asin(t)) / pi + 0.5;
  return (1 + q_bar * swept_delta) / swept_sigma;
}

double mhaskar_saff_phi(const Cap& cap, double charge, int d, double s) {
  if (d == 2 && s == 0) return 1 + charge;
  if (d == 2 && s == 1) return mhaskar_saff_coulomb(cap.t, charge);
  if (d >= 3 && s == d - 2) return signed_cap_equilibrium_dm2(cap, charge, d).phi_value;
  throw std::domain_error("mhaskar_saff_phi: no closed form for this (d, s); supply Phi or normalize numerically");
}

double mhaskar_saff_by_normalization(const Cap& cap, double charge, int d, double s) {
  if (!(s > d - 2 && s < d)) throw std::domain_error("mhaskar_saff_by_normalization: need d-2 < s < d");
  const double t = cap.t;
  const double beta = 0.5 * (d - s);
  const double k = 1 / (1 - beta);
  const double w = sphere_energy({d, s});
  const double front = area_ratio(d) * std::exp(sf::ln_gamma(0.5 * d) - sf::ln_gamma(d - 0.5 * s)) / w;
  const double edge = std::pow((1 + t) / (1 - t), -beta);

  // t - u = (1+t) v^k cancels the (t-u)^{-beta} edge singularity exactly.
  auto integrand = [&](double v, bool with_hyp) {
    const double u = t - (1 + t) * std::pow(v, k);
    const double weight = std::pow(std::max(0.0, 1 - u * u), 0.5 * d - 1);
    const double shape = std::pow((1 - t) / (1 - u), 0.5 * d) * edge;
    const double jac = (1 + t) * k;
    const double hyp = with_hyp ? sf::reg_hyp2f1(1.0, 0.5 * d, 1 - beta, (t - u) / (1 - u)) : 1.0;
    return front * shape * hyp * weight * jac;
  };
  boost::math::quadrature::tanh_sinh<double> quad(15, 1e-14);
  const double mass_sigma = quad.integrate([&](double v) { return integrand(v, true); }, 0.0, 1.0, 1e-14);
  const double mass_delta = quad.integrate([&](double v) { return integrand(v, false); }, 0.0, 1.0, 1e-14);
  const double delta_weight = charge * std::pow(2.0, d - s) / std::pow(cap.gamma, d) * sf::rgamma(1 - beta);
  return (1 + delta_weight * mass_delta) / mass_sigma;
}

}  // namespace sphereq
