#pragma once

#include "sphereq/sphere.hpp"

#include <vector>

namespace sphereq {

/// Riesz kernel |x-y|^{-s} on S^d; s == 0 selects log(1/|x-y|).
struct KernelSpec {
  int d = 2;
  double s = 0;

  bool is_log() const { return s == 0; }
  /// s == d - 2 with d >= 3 (the Newtonian-type exceptional case).
  bool is_exceptional() const { return d >= 3 && s == d - 2; }
  /// Throws std::domain_error outside 0 <= s < d (s == 0 only for d == 2).
  void validate() const;
};

struct Source {
  SpherePoint position;
  double charge = 0;
};

/// Sphere dimension, kernel exponent and the point charges generating
/// Q(x) = sum_i q_i k_s(a_i, x).
struct ProblemSpec {
  int d = 2;
  double s = 0;
  std::vector<Source> sources;

  KernelSpec kernel() const { return {d, s}; }
  double total_charge() const;
  /// Kernel range, positive charges, source dimension and pairwise distinct centers.
  void validate() const;
};

/// k_s as a function of the chord r = |x - y|.
double kernel_of_chord(double s, double r);

/// Q(x) = sum_i q_i k_s(a_i, x).
double external_field(const ProblemSpec& spec, const SpherePoint& x);

}  // namespace sphereq
