#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mfw/averaging/fbar.hpp"
#include "mfw/models/specs.hpp"
#include "mfw/paths/driver.hpp"
#include "mfw/paths/reduced.hpp"
#include "mfw/paths/timegrid.hpp"
#include "mfw/skeleton/control.hpp"

namespace mfw::ldp {

class InfeasibleEvent : public DomainError {
public:
    using DomainError::DomainError;
};

struct EnsembleStats {
    long n_paths = 0;
    double mean = 0.0;
    double variance = 0.0;
    double ci95 = 0.0;
    long hit_count = 0;
    long blowups = 0;
};

// Named-column result table; scaling experiments attach a fitted log-log
// slope with a confidence band.
struct ScalingTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    double slope = 0.0;
    double slope_se = 0.0;
    bool has_slope = false;

    double value(std::size_t row, const std::string& col) const;
};

// Deterministic blocked ensemble average: per-path values are accumulated
// in fixed 4096-path blocks and combined in block order, so the result is
// independent of the thread count. Workers returning NaN mark blow-ups.
struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
    long n = 0;
    long blowups = 0;
};
MeanSE ensemble_mean(
    long n_paths, std::size_t threads,
    const std::function<std::function<double(std::uint32_t)>()>& make_worker);

// ordinary least squares of log(estimate) on log(parameter)
void fit_loglog_slope(ScalingTable& table, const std::string& param_col,
                      const std::string& est_col);

struct IncrementsParams {
    models::ModelSpec model;
    paths::ScaleParams scales;
    double horizon = 1.0;
    double dt = 0.0; // 0: derived from delta/20, rounded to divide T
    std::vector<double> zeta_schedule;
    long n_paths = 1000;
    std::size_t threads = 0;
    std::uint64_t seed = 1;
    field::Field x0, y0;
};
// E integral ||X_t - X_{t(zeta)}||_H^2 dt per zeta (slow-increment law)
ScalingTable validate_increments(const IncrementsParams& p);

struct FastAuxCell {
    double zeta;
    double ratio; // delta / epsilon
};
struct FastAuxParams {
    models::ModelSpec model;
    double epsilon = 0.5;
    double horizon = 1.0;
    std::vector<FastAuxCell> cells;
    double phi_fast = 0.0; // constant fast-block control amplitude
    long n_paths = 1000;
    std::size_t threads = 0;
    std::uint64_t seed = 1;
    field::Field x0, y0;
};
// E integral ||Y - Yhat||^2 dt per (zeta, delta/eps) cell under a shared
// Wiener line (synchronous coupling)
ScalingTable validate_fast_auxiliary(const FastAuxParams& p);

struct AveragingParams {
    models::ModelSpec model;
    std::vector<double> epsilon_schedule;
    std::function<double(double)> delta_rule; // epsilon -> delta
    double horizon = 1.0;
    double phi_slow = 0.0; // constant slow-block control amplitude
    long n_paths = 1000;
    std::size_t threads = 0;
    std::uint64_t seed = 1;
    field::Field x0, y0;
    averaging::FbarMode fbar_mode = averaging::FbarMode::LinearOracle;
};
// E sup_t ||X^{phi,eps} - Xbar^phi||_H^2 per epsilon
ScalingTable validate_averaging(const AveragingParams& p);

struct MomentsParams {
    models::ModelSpec model;
    std::vector<double> epsilon_schedule;
    std::function<double(double)> delta_rule;
    double horizon = 1.0;
    long n_paths = 1000;
    std::size_t threads = 0;
    std::uint64_t seed = 1;
    field::Field x0, y0;
};
// E sup_t ||X||_H^2 per epsilon plus a linear trend fit across the schedule
ScalingTable validate_moments(const MomentsParams& p);

struct TailParams {
    models::ModelSpec model;
    std::vector<double> epsilon_schedule;
    std::function<double(double)> delta_rule;
    double horizon = 0.5;
    double threshold = 1.0;
    double x0 = 0.0, y0 = 0.0; // mode-1 coefficients
    long n_paths = 1000000;
    std::size_t threads = 0;
    std::uint64_t seed = 1;
    long reference_steps = 4000; // skeleton mesh of the minimisation
};
// eps log P(X_T > r) per epsilon next to -I from the action minimiser,
// with moment diagnostics. Throws InfeasibleEvent when the event is too
// rare at the largest epsilon.
ScalingTable estimate_tail(const TailParams& p);

// closed-form rate of the scalar exceedance event (controllability
// Gramian of the reduced slow line)
double scalar_gramian_rate(const paths::Mode1Reduction& red, double horizon, double x0,
                           double threshold);

// ---- pass/fail gates shared by `mfw validate` and the acceptance suite --

struct CriterionResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// fitted log-log slope inside [lo, hi]
CriterionResult criterion_slope_band(const ScalingTable& t, double lo, double hi,
                                     const std::string& name);
// estimate drop factor between consecutive rows inside [lo, hi]
CriterionResult criterion_halving_factor(const ScalingTable& t, double lo, double hi);
// estimates strictly decreasing along rows beyond two combined SEs
CriterionResult criterion_strictly_decreasing(const ScalingTable& t);
// |eps log p + I| decreasing along the schedule, final relative gap bounded
CriterionResult criterion_tail_closure(const ScalingTable& t, double max_final_rel_gap);
// no trend across the schedule beyond two slope SEs
CriterionResult criterion_flat_trend(const ScalingTable& t);

} // namespace mfw::ldp
