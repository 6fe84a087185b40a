#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mfw/field/field.hpp"
#include "mfw/models/ops.hpp"

namespace mfw::hypotheses {

// Structural constants of the slow-component conditions. A negative C
// requests fitting: the check reports the smallest passing constant
// instead of verifying a given one.
struct SlowHypothesisConstants {
    double alpha1 = 2.0;
    double beta1 = 0.0;
    double eta1 = 1.0;
    double C = -1.0;
    double fit_cap = 1e4; // fitted constants beyond this fail the check
};

struct FastHypothesisConstants {
    double alpha2 = 2.0;
    double beta2 = 0.0;
    double eta2 = 1.0;
    double kappa = 0.0;
    double lambda = 0.0; // in (0, kappa)
    double C = -1.0;
    double fit_cap = 1e4;
};

SlowHypothesisConstants default_slow_constants(const models::ModelSpec& m);
FastHypothesisConstants default_fast_constants(const models::ModelSpec& m);

struct CheckReport {
    std::string condition_id;
    int n_samples = 0;
    double worst_margin = 0.0; // min over samples of the normalised slack
    bool pass = false;
    std::optional<double> fitted_constant;
    std::vector<double> witness_u; // sample pair at the worst margin
    std::vector<double> witness_v;
    std::string note;
};

// Deterministic sampler: the first n_interior draws are pure eigenmodes
// (worst-case candidates for quadratic forms), then Gaussian fields with
// k^{-1} mode decay and amplitudes swept over {0.1, 1, 10}.
class FieldSampler {
public:
    FieldSampler(const field::Grid& g, std::uint64_t seed, std::uint32_t stream);
    field::Field sample(std::uint32_t idx) const;

private:
    field::Grid grid_;
    std::uint64_t seed_;
    std::uint32_t stream_;
};

struct CheckContext {
    const models::ModelSpec& model;
    SlowHypothesisConstants slow;
    FastHypothesisConstants fast;
    std::uint64_t seed = 1;
    int n_samples = 200;
    double tol = 1e-8; // relative to the per-sample scale
};

CheckReport check_hemicontinuity_slow(const CheckContext& ctx);
CheckReport check_local_monotonicity(const CheckContext& ctx);
CheckReport check_coercivity(const CheckContext& ctx);
CheckReport check_growth_slow(const CheckContext& ctx);
CheckReport check_lipschitz_f(const CheckContext& ctx);
CheckReport check_lipschitz_b1(const CheckContext& ctx);
CheckReport check_hemicontinuity_fast(const CheckContext& ctx);
CheckReport check_fast_strict_monotonicity(const CheckContext& ctx);
CheckReport check_fast_coercivity(const CheckContext& ctx);
CheckReport check_growth_fast(const CheckContext& ctx);
CheckReport check_lipschitz_g(const CheckContext& ctx);
CheckReport check_lipschitz_b2(const CheckContext& ctx);
CheckReport check_dissipativity_gap(const CheckContext& ctx);

std::vector<CheckReport> run_all_checks(const CheckContext& ctx);

} // namespace mfw::hypotheses
