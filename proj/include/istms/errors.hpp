#pragma once

#include <stdexcept>

namespace istms {

// invalid inputs / parameter domain violations -> CLI exit code 1
struct domain_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// lambda at or above the parametric instability threshold
struct instability_error : domain_error {
  using domain_error::domain_error;
};

// iterative solver / root finder failed to converge -> CLI exit code 2
struct convergence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct nonunique_nullspace_error : convergence_error {
  using convergence_error::convergence_error;
};

}  // namespace istms
