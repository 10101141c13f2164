#ifndef OBSOLIB_CONVERGENCE_HPP
#define OBSOLIB_CONVERGENCE_HPP

#include <cmath>
#include <cstddef>

#include "obsolib/errors.hpp"

namespace obsolib {

// Iteration budget and tolerances shared by every iterative routine in the
// library.  A default-constructed spec is the tuning used throughout.
struct ConvergenceSpec {
  std::size_t max_iterations;
  double abs_tolerance;
  double rel_tolerance;

  ConvergenceSpec(std::size_t max_iters = 10000, double abs_tol = 1e-14,
                  double rel_tol = 1e-12)
      : max_iterations(max_iters), abs_tolerance(abs_tol),
        rel_tolerance(rel_tol) {
    if (max_iterations == 0)
      throw DomainError("ConvergenceSpec: max_iterations must be positive");
    if (!(abs_tolerance > 0.0) || !std::isfinite(abs_tolerance))
      throw DomainError("ConvergenceSpec: abs_tolerance must be positive");
    if (!(rel_tolerance > 0.0) || !std::isfinite(rel_tolerance))
      throw DomainError("ConvergenceSpec: rel_tolerance must be positive");
  }
};

}  // namespace obsolib

#endif
