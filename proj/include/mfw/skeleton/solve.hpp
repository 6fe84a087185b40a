#pragma once

#include <vector>

#include "mfw/averaging/fbar.hpp"
#include "mfw/field/field.hpp"
#include "mfw/paths/stepper.hpp"
#include "mfw/skeleton/control.hpp"

namespace mfw::skeleton {

// Dense trajectory of the controlled averaged equation on the dt mesh,
// with running energy diagnostics.
struct SkeletonTrajectory {
    std::vector<field::Field> states; // n_steps + 1 entries
    double dt = 0.0;
    double sup_h_norm_sq = 0.0;       // sup over the mesh of ||X||_H^2
    double v_action_integral = 0.0;   // integral of ||X||_V^alpha1 dt
    bool blew_up = false;
    long blow_step = -1;

    const field::Field& terminal() const { return states.back(); }
};

// Deterministic IMEX solve of dX/dt = A1(X) + fbar(X) + B1(X) P1 phi.
SkeletonTrajectory solve_skeleton(const field::Field& x0, const Control& control,
                                  const models::ModelSpec& m,
                                  const averaging::FbarBackend& fbar,
                                  const paths::TimeGrid& tg);

struct EnergyReport {
    double sup_h_norm_sq = 0.0;
    double v_action_integral = 0.0;
    double control_energy = 0.0;
    double envelope = 0.0; // C (1 + ||x0||_H^2) exp(control energy)
    bool finite = false;
    bool within_envelope = false;
};

EnergyReport energy_report(const SkeletonTrajectory& traj, const Control& control,
                           const models::ModelSpec& m, const field::Field& x0,
                           double envelope_constant = 10.0);

} // namespace mfw::skeleton
