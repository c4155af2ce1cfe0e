#pragma once

#include <stdexcept>

namespace gilbert {

/// Thrown when a numerical procedure cannot meet its stated tolerance:
/// series non-convergence, quadrature subdivision cap, fixed-point cap,
/// evaluation outside a series' radius of convergence.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gilbert
