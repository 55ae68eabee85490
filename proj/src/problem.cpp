#include "sphereq/problem.hpp"

#include "sphereq/error.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sphereq {

void KernelSpec::validate() const {
  if (d < 2) throw std::domain_error("kernel: sphere dimension must be at least 2");
  if (s == 0 && d != 2) throw std::domain_error("kernel: the logarithmic kernel is supported on S^2 only");
  if (!(s >= 0 && s < d)) throw std::domain_error("kernel: Riesz exponent must satisfy 0 <= s < d");
}

double ProblemSpec::total_charge() const {
  double q = 0;
  for (const auto& src : sources) q += src.charge;
  return q;
}

void ProblemSpec::validate() const {
  kernel().validate();
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const auto& src = sources[i];
    if (src.position.dim() != d)
      throw std::invalid_argument("problem: source " + std::to_string(i + 1) + " has the wrong dimension");
    if (!(src.charge > 0) || !std::isfinite(src.charge))
      throw std::invalid_argument("problem: source " + std::to_string(i + 1) + " must carry a positive charge");
    for (std::size_t j = 0; j < i; ++j) {
      if (sources[j].position.chord(src.position) < 1e-12)
        throw std::invalid_argument("problem: sources " + std::to_string(j + 1) + " and " + std::to_string(i + 1) +
                                    " coincide");
    }
  }
}

double kernel_of_chord(double s, double r) {
  if (!(r > 0)) throw SingularityError("kernel: coincident points");
  return s == 0 ? -std::log(r) : std::pow(r, -s);
}

double external_field(const ProblemSpec& spec, const SpherePoint& x) {
  double q = 0;
  for (const auto& src : spec.sources) q += src.charge * kernel_of_chord(spec.s, src.position.chord(x));
  return q;
}

}  // namespace sphereq
