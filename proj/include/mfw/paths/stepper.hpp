#pragma once

#include <functional>
#include <vector>

#include "mfw/field/field.hpp"
#include "mfw/field/ops.hpp"
#include "mfw/models/ops.hpp"
#include "mfw/paths/driver.hpp"
#include "mfw/paths/timegrid.hpp"
#include "mfw/skeleton/control.hpp"

namespace mfw::paths {

struct SimOptions {
    // mirrors the stopping-time localisation; exceeding it is a recoverable
    // BlowUp outcome, not a crash
    double blow_radius = 1e6;
};

struct SlowFastState {
    field::Field x;
    field::Field y;
    double t = 0.0;
};

struct RunStatus {
    bool blew_up = false;
    long blow_step = -1;
};

// Semi-implicit Euler-Maruyama engine for the coupled and controlled
// systems. Holds prefactored solvers and scratch buffers; construct one
// instance per thread.
class CoupledSystem {
public:
    CoupledSystem(const models::ModelSpec& m, ScaleParams scales, const TimeGrid& tg,
                  const WienerDriver& driver, SimOptions opts = {});

    // One step from time index k. Returns false on blow-up; the state is
    // left at its last finite value.
    bool step(field::Field& x, field::Field& y, long k, std::uint32_t path,
              const skeleton::Control* phi);

    using Observer = std::function<void(long, const field::Field&, const field::Field&)>;
    RunStatus run(field::Field& x, field::Field& y, std::uint32_t path,
                  const skeleton::Control* phi, const Observer* observer = nullptr);

    const TimeGrid& timegrid() const { return tg_; }
    const models::ModelSpec& model() const { return model_; }
    const ScaleParams& scales() const { return scales_; }

    // fast line advanced with a frozen slow input and no control; used by
    // the Khasminskii auxiliary process under synchronous coupling
    bool step_fast_frozen(const field::Field& x_input, field::Field& y, long k,
                          std::uint32_t path) {
        return fast_line_step(x_input, y, k, path, nullptr);
    }

    // drift of the slow line minus its implicit part (shared with the
    // skeleton solver)
    void explicit_slow_drift(const field::Field& x, field::Field& out) const;
    const field::Field& slow_mode(int k) const { return slow_modes_[static_cast<std::size_t>(k)]; }
    field::Field solve_slow_implicit(const field::Field& rhs) const;

private:
    models::ModelSpec model_;
    ScaleParams scales_;
    TimeGrid tg_;
    WienerDriver driver_;
    SimOptions opts_;
    models::SlowImplicit slow_implicit_;
    field::ShiftedLaplaceSolver fast_solver_;
    std::vector<field::Field> slow_modes_;
    std::vector<field::Field> fast_modes_;
    std::vector<double> z1_, z2_;
    field::Field fast_rhs_, slow_rhs_;
    mutable field::Field slow_tmp_;

    friend class AuxiliarySystem;
    bool fast_line_step(const field::Field& x_input, field::Field& y, long k,
                        std::uint32_t path, const skeleton::Control* phi);
};

// Frozen (parameterised) fast equation at time scale one, driven by an
// independent Wiener line.
class FrozenSystem {
public:
    FrozenSystem(const models::ModelSpec& m, field::Field x_frozen, double dt,
                 const WienerDriver& driver, SimOptions opts = {});

    bool step(field::Field& y, long k, std::uint32_t path);

    using Observer = std::function<void(long, const field::Field&)>;
    RunStatus run(field::Field& y, long n_steps, std::uint32_t path,
                  const Observer* observer = nullptr);

    double dt() const { return dt_; }
    const field::Field& frozen_x() const { return x_; }

private:
    models::ModelSpec model_;
    field::Field x_;
    double dt_;
    WienerDriver driver_;
    SimOptions opts_;
    field::ShiftedLaplaceSolver solver_;
    std::vector<field::Field> modes_;
    std::vector<double> z_;
    field::Field scratch_;
};

// Khasminskii auxiliary process: the fast line with the slow input frozen
// on blocks of length zeta, no control term, sharing the coupled fast
// Wiener line (synchronous coupling).
class AuxiliarySystem {
public:
    AuxiliarySystem(const models::ModelSpec& m, ScaleParams scales, const TimeGrid& tg,
                    const WienerDriver& driver, std::vector<field::Field> slow_snapshots,
                    SimOptions opts = {});

    bool step(field::Field& y, long k, std::uint32_t path);

private:
    CoupledSystem inner_;
    std::vector<field::Field> snapshots_;
};

// Trajectory container for CLI dumps and oracle tests.
struct Trajectory {
    std::vector<double> t;
    std::vector<field::Field> x;
    std::vector<field::Field> y;
    RunStatus status;
};

Trajectory simulate_coupled(const models::ModelSpec& m, ScaleParams scales,
                            const TimeGrid& tg, const WienerDriver& driver,
                            const field::Field& x0, const field::Field& y0,
                            std::uint32_t path, long record_stride,
                            const skeleton::Control* phi = nullptr);

Trajectory simulate_frozen(const models::ModelSpec& m, const field::Field& x,
                           const field::Field& y0, double horizon, double dt,
                           const WienerDriver& driver, std::uint32_t path,
                           long record_stride);

Trajectory simulate_auxiliary(const models::ModelSpec& m, ScaleParams scales,
                              const TimeGrid& tg, const WienerDriver& driver,
                              const std::vector<field::Field>& slow_snapshots,
                              const field::Field& y0, std::uint32_t path,
                              long record_stride);

} // namespace mfw::paths
