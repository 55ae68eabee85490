///
/// \file support.hpp
///
/// Equilibrium supports for point-source external fields: the logarithmic
/// closed form on S^2, the (d-2)-Riesz normalization equation on S^d, the
/// guaranteed exclusion radii for overlapping caps, and the planar problem
/// obtained by stereographic projection from one of the sources.
///
#pragma once

#include "sphereq/problem.hpp"
#include "sphereq/sphere.hpp"

#include <complex>
#include <vector>

namespace sphereq {

struct SupportSolution {
  SupportRegion region;              // caps[i] is centred at sources[i]
  double normalization = 1;          // C: mu_Q = C sigma_d on the support
  double equilibrium_constant = 0;   // F_Q (NaN when infeasible for the log solver)
  bool feasible = false;             // caps pairwise disjoint
  DisjointnessReport disjointness;
  std::vector<double> boundary_coefficients;  // signed-equilibrium circle masses, 0 at the critical radii
  double residual = 0;               // |C sigma_d(support) - 1|
  int iterations = 0;
};

/// d = 2, s = 0: caps of chordal radius 2 sqrt(q_i/(1+q)) and C = 1 + q.
/// Overlapping caps are reported through `feasible`, not thrown.
SupportSolution solve_log(const ProblemSpec& spec);

/// g(C) = C sigma_d(Sigma_gamma(C)), gamma_i(C) = (4 q_i / (C W_{d-2}))^{1/d};
/// the support measure is 1 - sum of cap areas (no overlap correction).
double riesz_dm2_mass(const ProblemSpec& spec, double normalization);
std::vector<double> riesz_dm2_radii(const ProblemSpec& spec, double normalization);

/// d >= 3, s = d - 2: bisection for g(C) = 1 on [1, C_max], C_max grown
/// geometrically from 2 until bracketed.
SupportSolution solve_riesz_dm2(const ProblemSpec& spec, double tol = 1e-12);

/// Dispatch on (d, s): solve_log or solve_riesz_dm2.
SupportSolution solve(const ProblemSpec& spec);

/// q_i / (1 + q - q_i).
double reduced_charge(double total_charge, double charge);

/// Root in (0, pi) of (q+1) pi cos(a) - q a cos(a) + q sin(a) - pi, the
/// geodesic radius maximizing the Coulomb functional for reduced charge q.
double coulomb_alpha_root(double q_bar, double tol = 1e-14);

/// Caps no optimal point can enter (d = 2, s in {0, 1}), one per source.
std::vector<Cap> influence_radii(const ProblemSpec& spec);

struct PlanarDisc {
  std::complex<double> center;
  double radius = 0;

  bool contains(std::complex<double> z) const { return std::abs(z - center) < radius; }
};

/// Equilibrium of the projected field
/// Q~(z) = sum_{i<m} q_i log(1/|z - w_i|) + (1+q) log sqrt(1+|z|^2).
struct PlanarEquilibrium {
  SpherePoint pole;                               // a_m
  double outer_radius = 0;                        // sqrt((1+q-q_m)/q_m)
  std::vector<PlanarDisc> excluded_discs;         // images of the caps of a_1..a_{m-1}
  std::vector<std::complex<double>> source_images;  // w_i
  std::vector<double> charges;                    // q_1..q_{m-1}
  double total_charge = 0;
  double density_scale = 0;                       // (1+q)/pi

  double density(std::complex<double> z) const;
  double field(std::complex<double> z) const;
  bool in_support(std::complex<double> z) const;
};

/// Requires the logarithmic solution to be feasible; throws std::domain_error otherwise.
PlanarEquilibrium kelvin_planar(const ProblemSpec& spec);

}  // namespace sphereq
