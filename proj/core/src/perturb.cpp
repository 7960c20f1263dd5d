#include "lyapvec/perturb.hpp"

#include <cmath>

#include "lyapvec/error.hpp"
#include "lyapvec/random.hpp"

namespace lyapvec::perturb {

models::Trajectory perturb_trajectory(const models::Trajectory& truth, const PerturbationSpec& spec) {
  if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma)) {
    throw Error(ErrorCode::kInvalidArgument, "perturbation sigma must be finite and >= 0");
  }
  Matrix states = truth.states();
  if (spec.sigma > 0.0) {
    Rng rng(spec.seed);
    states += spec.sigma * standard_normal(states.rows(), states.cols(), rng);
  }
  return models::Trajectory(truth.model(), truth.t0(), truth.solver_step(), truth.save_interval(),
                            std::move(states), spec.sigma == 0.0 && truth.dynamical());
}

}  // namespace lyapvec::perturb
