#pragma once

#include <variant>

#include "mfw/field/field.hpp"
#include "mfw/paths/timegrid.hpp"
#include "mfw/skeleton/solve.hpp"

namespace mfw::action {

// Hit a target state at the horizon, penalised in the model's H norm.
struct TerminalHit {
    field::Field target;
    double penalty_weight = 1e4;
};

// Drive a linear functional of the terminal state across a threshold
// (the mode-k L2 coefficient; `exceed` picks the side).
struct TerminalFunctional {
    int mode = 1;
    double threshold = 0.0;
    bool exceed = true;
    double penalty_weight = 1e4;
};

enum class ControlBlocks { SlowOnly, Both };

struct ActionProblem {
    field::Field x0;
    paths::TimeGrid tg;
    std::variant<TerminalHit, TerminalFunctional> objective;
    // The averaged dynamics depend on the control only through its slow
    // block; the fast block contributes pure cost and stays at zero.
    ControlBlocks blocks = ControlBlocks::SlowOnly;
};

struct ActionResult {
    skeleton::Control control;
    double action_value = 0.0;
    skeleton::SkeletonTrajectory trajectory;
    double terminal_gap = 0.0;
    int iterations = 0;
    double gradient_norm = 0.0;
    bool converged = false;
};

// 1/2 sum_k ||phi_k||_U^2 dt
inline double action_value(const skeleton::Control& c, const paths::TimeGrid& tg) {
    return 0.5 * c.energy(tg.dt);
}

} // namespace mfw::action
