#include "retc/tightening.hpp"

#include <stdexcept>

namespace retc {

TightenedSets tighten(const PlantModel& plant, const Polytope& psi_p,
                      const Polytope& omega_p, const Polytope& k_omega_p) {
  TightenedSets sets;
  sets.Xhat_p = pontryagin_diff(plant.X, psi_p);
  sets.Xbar_p = pontryagin_diff(sets.Xhat_p, omega_p);
  sets.Ubar_p = pontryagin_diff(plant.U, k_omega_p);
  if (sets.Xhat_p.is_empty() || sets.Xbar_p.is_empty() ||
      sets.Ubar_p.is_empty())
    throw std::runtime_error(
        "tighten: a constraint set vanished; the invariant sets are too "
        "large for the plant constraints");
  if (!sets.Xbar_p.contains_origin() || !sets.Ubar_p.contains_origin())
    throw std::runtime_error(
        "tighten: tightened sets must contain the origin");
  return sets;
}

}  // namespace retc
