#pragma once

#include "retc/invariant_sets.hpp"
#include "retc/polytope.hpp"
#include "retc/system_model.hpp"

namespace retc {

// Constraint sets shrunk by the invariant-set blocks; used by every
// prediction. Xhat bounds the observer state, Xbar/Ubar the nominal
// trajectory.
struct TightenedSets {
  Polytope Xhat_p;  // X - Psi
  Polytope Xbar_p;  // X - Omega - Psi
  Polytope Ubar_p;  // U - K*Omega
};

// Pontryagin differences of the plant constraints by the error tubes.
// An empty result means the design is infeasible and throws.
TightenedSets tighten(const PlantModel& plant, const Polytope& psi_p,
                      const Polytope& omega_p, const Polytope& k_omega_p);

}  // namespace retc
