#pragma once

#include <span>

#include "mfw/action/problem.hpp"
#include "mfw/averaging/fbar.hpp"

namespace mfw::action {

struct Objective {
    double total = 0.0;
    double action = 0.0;
    double penalty = 0.0;
    double terminal_gap = 0.0;
    bool blew_up = false;
};

Objective evaluate(const ActionProblem& p, const skeleton::Control& control,
                   const models::ModelSpec& m, const averaging::FbarBackend& fbar,
                   skeleton::SkeletonTrajectory* traj_out = nullptr);

// Gradient of the penalised objective via the discrete adjoint of the
// skeleton map. Layout matches Control::raw().
Objective gradient(const ActionProblem& p, const skeleton::Control& control,
                   const models::ModelSpec& m, const averaging::FbarBackend& fbar,
                   std::span<double> grad);

// Central finite differences, the reference oracle for `gradient`.
Objective gradient_fd(const ActionProblem& p, const skeleton::Control& control,
                      const models::ModelSpec& m, const averaging::FbarBackend& fbar,
                      std::span<double> grad, double fd_step = 1e-5);

} // namespace mfw::action
