#pragma once

#include <stdexcept>
#include <string>

namespace nkflow {

/// Base class for all errors raised by the engine.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A wedge, contraction or assembly asked for an impossible grade.
struct grade_error : error {
  using error::error;
};

/// A Gram matrix or coefficient matrix is singular where an inverse is needed.
struct singular_error : error {
  using error::error;
};

/// Input left the domain of validity: s = 0, h^2 = s^2 poles, f <= 4, etc.
struct domain_error : error {
  using error::error;
};

}  // namespace nkflow
