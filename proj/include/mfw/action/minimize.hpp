#pragma once

#include "mfw/action/gradient.hpp"

namespace mfw::action {

struct OptimizerParams {
    int max_iterations = 300;
    double gtol = 1e-8;        // gradient norm target
    double xtol = 1e-4;        // terminal gap target
    int lbfgs_memory = 10;
    double ls_shrink = 0.5;
    double armijo_c = 1e-4;
    int ls_max_trials = 40;
    int ls_batch = 3;          // candidate steps probed per parallel round
};

// Quasi-Newton descent on the penalised action. Starts from `init`
// (zero-control feasible start when default-constructed) and returns the
// best iterate found.
ActionResult minimize(const ActionProblem& p, const skeleton::Control& init,
                      const models::ModelSpec& m, const averaging::FbarBackend& fbar,
                      const OptimizerParams& params = {});

} // namespace mfw::action
