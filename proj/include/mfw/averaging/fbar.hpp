#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <vector>

#include "mfw/field/field.hpp"
#include "mfw/models/ops.hpp"
#include "mfw/paths/driver.hpp"

namespace mfw::averaging {

// Frozen fast dynamics are not dissipative enough for a unique invariant
// measure (gap <= 0).
class DissipativityViolated : public DomainError {
public:
    using DomainError::DomainError;
};

// Ergodic-average replicas disagree beyond tolerance.
class NonConvergence : public DomainError {
public:
    using DomainError::DomainError;
};

enum class FbarMode { ErgodicAverage, LinearOracle };

struct ErgodicAverageParams {
    double burn_in = 1.0;
    double horizon = 5.0;
    int n_replicas = 4;
    double dt = 1e-3;
    double spread_tol = 0.25;
};

// Averaged coupling fbar(x) = integral of f(x, z) over the invariant
// measure of the frozen fast process, with a quantised evaluation cache.
class FbarBackend {
public:
    FbarBackend(const models::ModelSpec& m, FbarMode mode, paths::WienerDriver driver,
                ErgodicAverageParams params = {}, double cache_q = 1e-3);

    FbarMode mode() const { return mode_; }
    const ErgodicAverageParams& params() const { return params_; }

    // cached evaluation
    field::Field fbar(const field::Field& x) const;
    // uncached evaluation (finite-difference Jacobians must bypass the
    // quantisation, whose step exceeds the FD step)
    field::Field fbar_raw(const field::Field& x) const;

    // stationary mean of the linear frozen dynamics (LinearOracle only)
    field::Field stationary_mean(const field::Field& x) const;
    // action of -(lap + (c1 + g_gain_y))^{-1} on a field; the x-derivative
    // of the stationary mean is g_gain_x times this map
    field::Field mean_inverse_apply(const field::Field& b) const;

    bool linear_oracle_applicable() const;
    bool f_y_independent() const { return !model_.f.depends_on_y(); }

    std::size_t cache_size() const;

private:
    models::ModelSpec model_;
    FbarMode mode_;
    paths::WienerDriver driver_;
    ErgodicAverageParams params_;
    double cache_q_;
    mutable std::mutex cache_mutex_;
    mutable std::map<std::vector<std::int64_t>, field::Field> cache_;

    field::Field ergodic_average(const field::Field& x) const;
};

// n_samples approximately stationary draws of the frozen process, spaced
// by `thinning` steps after the burn-in.
std::vector<field::Field> sample_invariant(const models::ModelSpec& m,
                                           const field::Field& x, const field::Field& y0,
                                           double burn_in, int n_samples, int thinning,
                                           double dt, const paths::WienerDriver& driver,
                                           std::uint32_t path = 0);

} // namespace mfw::averaging
