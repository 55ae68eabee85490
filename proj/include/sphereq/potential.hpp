///
/// \file potential.hpp
///
/// Closed-form kernel energies, balayage potentials and signed equilibria
/// for a single cap around a point source. Every single-cap quantity is
/// zonal, so it is written in the height xi = <x, a> of the evaluation
/// point along the cap axis; the cap holds the boundary height t.
///
#pragma once

#include "sphereq/problem.hpp"
#include "sphereq/sphere.hpp"

#include <optional>
#include <span>

namespace sphereq {

double kernel(const KernelSpec& spec, const SpherePoint& x, const SpherePoint& y);

/// W_s(S^d), the s-energy of the normalized surface measure; s == 0 gives
/// the logarithmic energy.
double sphere_energy(const KernelSpec& spec);

/// omega_{d-1} / omega_d.
double area_ratio(int d);

// ---------------------------------------------------------------------------
// Logarithmic kernel on S^2
// ---------------------------------------------------------------------------

struct LogBalayagePotentials {
  double u_sigma = 0;  // potential of bal_0(sigma_2, Sigma_gamma)
  double u_delta = 0;  // potential of bal_0(delta_a, Sigma_gamma)
};

/// Log energy W_0(Sigma_gamma) of the closed set {<x,a> <= t}.
double log_cap_complement_energy(double t);

LogBalayagePotentials log_balayage_potentials(const Cap& cap, double xi);
LogBalayagePotentials log_balayage_potentials(const Cap& cap, const SpherePoint& x);

/// f(u) = ((1+q-q_i)/2) log(1+u) + (q_i/2) log(1-u).
double log_profile(double u, double total_charge, double charge);
/// Unique maximizer of log_profile on (-1,1).
double log_profile_argmax(double total_charge, double charge);

// ---------------------------------------------------------------------------
// Zonal building blocks for s = 0 (d = 2) and s = d - 2 (d >= 3)
// ---------------------------------------------------------------------------

/// Potential of beta, the normalized measure on the boundary circle {<y,a> = t}.
double boundary_circle_potential(const KernelSpec& spec, double t, double xi);

/// Potential of sigma_d restricted to the cap {<y,a> >= t}.
double uniform_cap_potential(const KernelSpec& spec, double t, double xi);

/// U^{C sigma_d|Sigma} + Q at x, where Sigma is the sphere minus the given
/// pairwise disjoint caps centred at the sources (caps[i] belongs to
/// spec.sources[i]).
double support_weighted_potential(const ProblemSpec& spec, std::span<const Cap> caps, double normalization,
                                  const SpherePoint& x);

// ---------------------------------------------------------------------------
// Signed equilibria on a single cap complement
// ---------------------------------------------------------------------------

struct SignedCapEquilibrium {
  Cap cap;
  double charge = 0;
  double s = 0;
  int d = 3;
  double uniform_coefficient = 0;   // density w.r.t. sigma_d on Sigma
  double boundary_coefficient = 0;  // mass of the boundary circle component
  double phi_value = 0;             // weighted potential constant on Sigma

  double total_mass() const;
};

/// Signed (d-2)-equilibrium on {<x,a> <= t} for the field q k_{d-2}(a, .).
/// Without `phi` the constant is fixed by unit total mass; passing `phi`
/// evaluates the same family at a prescribed constant (e.g. C W_{d-2}(S^d)
/// for a multi-cap normalization).
SignedCapEquilibrium signed_cap_equilibrium_dm2(const Cap& cap, double charge, int d,
                                                std::optional<double> phi = std::nullopt);

/// Density (w.r.t. sigma_d) of the signed s-equilibrium for d-2 < s < d at
/// height u in [-1, t).
double signed_density_general_s(const Cap& cap, double charge, int d, double s, double phi, double u);

/// Weighted potential of the signed (d-2)-equilibrium at height xi.
double weighted_potential_dm2(const Cap& cap, double charge, double phi, int d, double xi);

/// Weighted potential of the signed s-equilibrium, d-2 < s < d, at height xi.
double weighted_potential_general_s(const Cap& cap, double charge, double phi, int d, double s, double xi);

/// Phi_1(t) on S^2 for the field q_bar |x-a|^{-1}, from the balayage norms
/// ||bal(delta)|| = asin(t)/pi + 1/2 and ||bal(sigma)|| = (sqrt(1-t^2) + asin t)/pi + 1/2.
double mhaskar_saff_coulomb(double t, double q_bar);

/// Phi_s(t) of the single-cap problem where a closed form is available:
/// (2,0) -> 1 + q, (2,1) -> Coulomb, s = d - 2 -> unit-mass normalization.
/// Other (d, s) throw std::domain_error; see mhaskar_saff_by_normalization.
double mhaskar_saff_phi(const Cap& cap, double charge, int d, double s);

/// Phi_s(t) obtained by integrating the signed density to unit mass
/// (numerical quadrature), valid for any d-2 < s < d.
double mhaskar_saff_by_normalization(const Cap& cap, double charge, int d, double s);

}  // namespace sphereq
