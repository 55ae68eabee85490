#pragma once

#include <stdexcept>
#include <string>

namespace sphereq {

/// Raised when a kernel or potential is evaluated at one of its poles
/// (coincident points, a point on a source, the projection pole).
class SingularityError : public std::domain_error {
 public:
  explicit SingularityError(const std::string& what) : std::domain_error(what) {}
};

/// Raised by bracketing root finders when the endpoints do not change sign.
class NoBracketError : public std::runtime_error {
 public:
  explicit NoBracketError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sphereq
