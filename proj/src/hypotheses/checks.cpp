#include "mfw/hypotheses/checks.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "mfw/field/norms.hpp"
#include "mfw/field/ops.hpp"
#include "mfw/kern/ziggurat.hpp"

namespace mfw::hypotheses {

using field::Field;
using field::NormKind;
using models::ModelSpec;
using models::SlowVariant;

SlowHypothesisConstants default_slow_constants(const ModelSpec& m) {
    SlowHypothesisConstants c;
    switch (m.slow.variant) {
    case SlowVariant::PorousMedium:
        c.alpha1 = m.slow.r + 1.0;
        c.eta1 = 2.0;
        c.beta1 = 0.0;
        break;
    case SlowVariant::CahnHilliard:
        c.alpha1 = 2.0;
        c.eta1 = 0.5;
        c.beta1 = 6.0;
        break;
    case SlowVariant::LinearDiagnostic:
        c.alpha1 = 2.0;
        c.eta1 = 2.0 * m.slow.a;
        c.beta1 = 0.0;
        break;
    }
    return c;
}

FastHypothesisConstants default_fast_constants(const ModelSpec& m) {
    FastHypothesisConstants c;
    const double lam1 = field::laplace_eigenvalue(m.fast_grid, 1);
    const double lb2 = models::fast_noise_lipschitz_y(m);
    c.kappa = 2.0 * (lam1 - m.fast.c1) - 2.0 * m.fast.lg() - lb2 * lb2;
    c.lambda = 0.5 * c.kappa;
    c.eta2 = 1.0;
    return c;
}

FieldSampler::FieldSampler(const field::Grid& g, std::uint64_t seed, std::uint32_t stream)
    : grid_(g), seed_(seed), stream_(stream) {}

Field FieldSampler::sample(std::uint32_t idx) const {
    const int n = grid_.n_interior;
    if (idx < static_cast<std::uint32_t>(n)) return field::eigenmode(grid_, static_cast<int>(idx) + 1);
    static constexpr double amps[3] = {0.1, 1.0, 10.0};
    const double amp = amps[idx % 3];
    Field u(grid_);
    const kern::PhiloxKey key = kern::key_from_seed(seed_);
    for (int k = 1; k <= n; ++k) {
        const double z =
            kern::normal_scalar(key, stream_, idx, static_cast<std::uint32_t>(k));
        const Field e = field::eigenmode(grid_, k);
        const double coef = amp * z / static_cast<double>(k);
        kern::active().axpy(u.data(), coef, e.data(), u.size());
    }
    return u;
}

namespace {

struct Worst {
    double margin = std::numeric_limits<double>::infinity();
    Field u, v;

    void consider(double m, const Field& uu, const Field& vv) {
        if (m < margin) {
            margin = m;
            u = uu;
            v = vv;
        }
    }
};

CheckReport finish(std::string id, const CheckContext& ctx, const Worst& w, bool pass,
                   std::optional<double> fitted = std::nullopt, std::string note = {}) {
    CheckReport rep;
    rep.condition_id = std::move(id);
    rep.n_samples = ctx.n_samples;
    rep.worst_margin = w.margin;
    rep.pass = pass;
    rep.fitted_constant = fitted;
    rep.witness_u.assign(w.u.data(), w.u.data() + w.u.size());
    rep.witness_v.assign(w.v.data(), w.v.data() + w.v.size());
    rep.note = std::move(note);
    return rep;
}

// jump-refinement continuity test of a scalar function on [-1, 1]
CheckReport hemicontinuity(const CheckContext& ctx, std::string id,
                           const std::function<double(double, std::uint32_t)>& pairing,
                           const FieldSampler& sampler) {
    double worst_ratio = 0.0;
    double worst_rel_jump = 0.0;
    const int n_dirs = std::min(ctx.n_samples, 16);
    for (int d = 0; d < n_dirs; ++d) {
        const auto idx = static_cast<std::uint32_t>(d);
        auto max_jump_and_range = [&](int n_pts, double& range) {
            double prev = pairing(-1.0, idx);
            double lo = prev, hi = prev, jump = 0.0;
            for (int i = 1; i < n_pts; ++i) {
                const double lam = -1.0 + 2.0 * i / (n_pts - 1);
                const double cur = pairing(lam, idx);
                jump = std::max(jump, std::fabs(cur - prev));
                lo = std::min(lo, cur);
                hi = std::max(hi, cur);
                prev = cur;
            }
            range = hi - lo;
            return jump;
        };
        double range_c = 0.0, range_f = 0.0;
        const double jump_c = max_jump_and_range(41, range_c);
        const double jump_f = max_jump_and_range(81, range_f);
        const double scale = range_f + 1e-12;
        worst_rel_jump = std::max(worst_rel_jump, jump_f / scale);
        if (jump_c > 1e-12 * scale)
            worst_ratio = std::max(worst_ratio, jump_f / jump_c);
    }
    Worst w;
    w.margin = 0.1 - worst_rel_jump; // continuous curves sit well below
    w.u = sampler.sample(0);
    w.v = sampler.sample(1);
    const bool pass = worst_rel_jump <= 0.1 && worst_ratio <= 0.75;
    return finish(std::move(id), ctx, w, pass, std::nullopt,
                  "refined-grid jump test; ratio " + std::to_string(worst_ratio));
}

double rho_weight(const ModelSpec& m, const Field& u) {
    if (m.slow.variant != SlowVariant::CahnHilliard) return 0.0;
    // d = 1, p = 3 weights of the CH local-monotonicity bound
    const double vn = models::slow_v_norm(m, u);
    const double hn = field::norm(u, m.h_kind());
    return vn * hn * hn * hn;
}

} // namespace

CheckReport check_hemicontinuity_slow(const CheckContext& ctx) {
    const ModelSpec& m = ctx.model;
    FieldSampler s(m.slow_grid, ctx.seed, 101);
    auto pairing = [&](double lam, std::uint32_t d) {
        const Field u = s.sample(3 * d + static_cast<std::uint32_t>(m.slow_grid.n_interior));
        const Field v = s.sample(3 * d + 1 + static_cast<std::uint32_t>(m.slow_grid.n_interior));
        const Field w = s.sample(3 * d + 2 + static_cast<std::uint32_t>(m.slow_grid.n_interior));
        return models::slow_pair(m, field::axpby(1.0, u, lam, v), w);
    };
    return hemicontinuity(ctx, "A1.hemicontinuity", pairing, s);
}

CheckReport check_local_monotonicity(const CheckContext& ctx) {
    const ModelSpec& m = ctx.model;
    FieldSampler s(m.slow_grid, ctx.seed, 102);
    Worst w;
    double fit = 0.0;
    const bool fitting = ctx.slow.C < 0.0;
    for (int i = 0; i < ctx.n_samples; ++i) {
        const Field u = s.sample(static_cast<std::uint32_t>(2 * i));
        const Field v = s.sample(static_cast<std::uint32_t>(2 * i + 1));
        const Field d = u - v;
        const double dh = field::norm(d, m.h_kind());
        if (dh == 0.0) continue;
        const double pair_diff = models::slow_pair(m, u, d) - models::slow_pair(m, v, d);
        const double weights = rho_weight(m, u) + rho_weight(m, v);
        if (fitting) {
            fit = std::max(fit, (pair_diff - weights * dh * dh) / (dh * dh));
            const double scale = 1.0 + std::fabs(pair_diff) + weights * dh * dh;
            w.consider((ctx.slow.fit_cap * dh * dh + weights * dh * dh - pair_diff) / scale,
                       u, v);
        } else {
            const double lhs = (ctx.slow.C + weights) * dh * dh;
            const double scale = 1.0 + std::fabs(lhs) + std::fabs(pair_diff);
            w.consider((lhs - pair_diff) / scale, u, v);
        }
    }
    const bool pass = fitting ? fit <= ctx.slow.fit_cap : w.margin >= -ctx.tol;
    return finish("A2.local_monotonicity", ctx, w, pass,
                  fitting ? std::optional<double>(fit) : std::nullopt);
}

CheckReport check_coercivity(const CheckContext& ctx) {
    const ModelSpec& m = ctx.model;
    FieldSampler s(m.slow_grid, ctx.seed, 103);
    Worst w;
    double fit = 0.0;
    const bool fitting = ctx.slow.C < 0.0;
    for (int i = 0; i < ctx.n_samples; ++i) {
        const Field u = s.sample(static_cast<std::uint32_t>(i));
        const double hn = field::norm(u, m.h_kind());
        const double vn = models::slow_v_norm(m, u);
        const double twice_pair = 2.0 * models::slow_pair(m, u, u);
        const double hs = models::noise_hs_norm_sq(m.noise_slow, u, m.h_kind());
        const double dissip = ctx.slow.eta1 * std::pow(vn, ctx.slow.alpha1);
        if (fitting) {
            fit = std::max(fit, (twice_pair + hs + dissip) / (1.0 + hn * hn));
            const double scale = 1.0 + std::fabs(twice_pair) + dissip + hs;
            w.consider((ctx.slow.fit_cap * (1.0 + hn * hn) - dissip + 0.0 -
                        (twice_pair + hs) ) / scale, u, u);
        } else {
            const double slack =
                -dissip + ctx.slow.C * (1.0 + hn * hn) - twice_pair - hs;
            const double scale = 1.0 + dissip + std::fabs(twice_pair) + hs;
            w.consider(slack / scale, u, u);
        }
    }
    const bool pass = fitting ? fit <= ctx.slow.fit_cap : w.margin >= -ctx.tol;
    return finish("A3.coercivity", ctx, w, pass,
                  fitting ? std::optional<double>(fit) : std::nullopt);
}

CheckReport check_growth_slow(const CheckContext& ctx) {
    const ModelSpec& m = ctx.model;
    FieldSampler s(m.slow_grid, ctx.seed, 104);
    Worst w;
    double fit = 0.0;
    const bool fitting = ctx.slow.C < 0.0;
    const double expo = ctx.slow.alpha1 / (ctx.slow.alpha1 - 1.0);
    for (int i = 0; i < ctx.n_samples; ++i) {
        const Field u = s.sample(static_cast<std::uint32_t>(i));
        const double dual = std::pow(models::slow_drift_dual_norm(m, u), expo);
        const double bound = (1.0 + std::pow(models::slow_v_norm(m, u), ctx.slow.alpha1)) *
                             (1.0 + std::pow(field::norm(u, m.h_kind()), ctx.slow.beta1));
        if (fitting) {
            fit = std::max(fit, dual / bound);
            w.consider((ctx.slow.fit_cap * bound - dual) / (1.0 + dual + bound), u, u);
        } else {
            w.consider((ctx.slow.C * bound - dual) / (1.0 + dual + bound), u, u);
        }
    }
    const bool pass = fitting ? fit <= ctx.slow.fit_cap : w.margin >= -ctx.tol;
    return finish("A4.growth", ctx, w, pass,
                  fitting ? std::optional<double>(fit) : std::nullopt);
}

namespace {

// empirical Lipschitz certification against a declared constant
CheckReport lipschitz_generic(
    const CheckContext& ctx, std::string id, const field::Grid& grid_a,
    const field::Grid& grid_b, double declared,
    const std::function<double(const Field&, const Field&, const Field&, const Field&)>&
        ratio_fn,
    std::string note = {}) {
    FieldSampler sa(grid_a, ctx.seed, 105);
    FieldSampler sb(grid_b, ctx.seed, 106);
    Worst w;
    double worst_ratio = 0.0;
    for (int i = 0; i < ctx.n_samples; ++i) {
        const Field u1 = sa.sample(static_cast<std::uint32_t>(2 * i));
        const Field u2 = sa.sample(static_cast<std::uint32_t>(2 * i + 1));
        const Field v1 = sb.sample(static_cast<std::uint32_t>(2 * i));
        const Field v2 = sb.sample(static_cast<std::uint32_t>(2 * i + 1));
        const double r = ratio_fn(u1, u2, v1, v2);
        worst_ratio = std::max(worst_ratio, r);
        w.consider(declared * (1.0 + 1e-8) - r, u1, v1);
    }
    const bool pass = worst_ratio <= declared * (1.0 + 1e-8) + 1e-14;
    CheckReport rep = finish(std::move(id), ctx, w, pass, worst_ratio, std::move(note));
    return rep;
}

} // namespace

CheckReport check_lipschitz_f(const CheckContext& ctx) {
    const ModelSpec& m = ctx.model;
    const NormKind hk = m.h_kind();
    const double lam1s = field::laplace_eigenvalue(m.slow_grid, 1);
    const double bridge =
        hk.tag == NormKind::Tag::Hm1Dual ? 1.0 / std::sqrt(lam1s) : 1.0;
    const double declared = std::max(m.f.lipschitz_x(), m.f.lipschitz_y() * bridge);
    auto ratio = [&](const Field& u1, const Field& u2, const Field& v1, const Field& v2) {
        const Field d = models::coupling_apply(m.f, u1, v1, m.slow_grid) -
                        models::coupling_apply(m.f, u2, v2, m.slow_grid);
        const double den =
            field::norm(u1 - u2, hk) + field::norm(v1 - v2, NormKind::l2());
        return den == 0.0 ? 0.0 : field::norm(d, hk) / den;
    };
    return lipschitz_generic(ctx, "A5.lipschitz_f", m.slow_grid, m.fast_grid, declared,
                             ratio);
}

CheckReport check_lipschitz_b1(const CheckContext& ctx) {
    const ModelSpec& m = ctx.model;
    const NormKind hk = m.h_kind();
    // HS norm in the H1 geometry weights mode k by ||e_k||_H
    double hs_h = 0.0;
    for (int k = 1; k <= m.noise_slow.n_modes; ++k) {
        const double b = m.noise_slow.mode_coeffs[static_cast<std::size_t>(k - 1)];
        const double wk = hk.tag == NormKind::Tag::Hm1Dual
                              ? 1.0 / field::laplace_eigenvalue(m.slow_grid, k)
                              : 1.0;
        hs_h += b * b * wk;
    }
    const double declared =
        m.noise_slow.dependence == models::NoiseDependence::Additive
            ? 0.0
            : m.noise_slow.slope * std::sqrt(hs_h);
    auto ratio = [&](const Field& u1, const Field& u2, const Field&, const Field&) {
        const double m1 = models::noise_multiplier(m.noise_slow, u1, hk);
        const double m2 = models::noise_multiplier(m.noise_slow, u2, hk);
        const double den = field::norm(u1 - u2, hk);
        return den == 0.0 ? 0.0 : std::fabs(m1 - m2) * std::sqrt(hs_h) / den;
    };
    return lipschitz_generic(ctx, "A5.lipschitz_B1", m.slow_grid, m.fast_grid, declared,
                             ratio, "HS norm weighted by the H1 geometry");
}

CheckReport check_hemicontinuity_fast(const CheckContext& ctx) {
    const ModelSpec& m = ctx.model;
    FieldSampler su(m.slow_grid, ctx.seed, 107);
    FieldSampler sv(m.fast_grid, ctx.seed, 108);
    auto pairing = [&](double lam, std::uint32_t d) {
        const auto off = static_cast<std::uint32_t>(m.fast_grid.n_interior);
        const Field u1 = su.sample(3 * d + off);
        const Field u2 = su.sample(3 * d + 1 + off);
        const Field v1 = sv.sample(3 * d + off);
        const Field v2 = sv.sample(3 * d + 1 + off);
        const Field w = sv.sample(3 * d + 2 + off);
        return models::fast_pair(m, field::axpby(1.0, u1, lam, u2),
                                 field::axpby(1.0, v1, lam, v2), w);
    };
    return hemicontinuity(ctx, "H1.hemicontinuity", pairing, sv);
}

CheckReport check_fast_strict_monotonicity(const CheckContext& ctx) {
    const ModelSpec& m = ctx.model;
    FieldSampler su(m.slow_grid, ctx.seed, 109);
    FieldSampler sv(m.fast_grid, ctx.seed, 110);
    Worst w;
    double kappa_hat = std::numeric_limits<double>::infinity();
    for (int i = 0; i < ctx.n_samples; ++i) {
        const Field u = su.sample(static_cast<std::uint32_t>(i) +
                                  static_cast<std::uint32_t>(m.slow_grid.n_interior));
        const Field v1 = sv.sample(static_cast<std::uint32_t>(2 * i));
        const Field v2 = i % 7 == 0 ? Field(m.fast_grid)
                                    : sv.sample(static_cast<std::uint32_t>(2 * i + 1));
        const Field d = v1 - v2;
        const double dn2 = std::pow(field::norm(d, NormKind::l2()), 2);
        if (dn2 == 0.0) continue;
        const double pair_diff =
            models::fast_pair(m, u, v1, d) - models::fast_pair(m, u, v2, d);
        const double m1 = models::noise_multiplier(m.noise_fast, v1, NormKind::l2());
        const double m2 = models::noise_multiplier(m.noise_fast, v2, NormKind::l2());
        const double hs_diff =
            (m1 - m2) * (m1 - m2) * m.noise_fast.coeff_sq_sum();
        const double lhs = 2.0 * pair_diff + hs_diff;
        kappa_hat = std::min(kappa_hat, -lhs / dn2);
        w.consider(-lhs / dn2 - ctx.fast.kappa, v1, v2);
    }
    const bool pass = kappa_hat >= ctx.fast.kappa - ctx.tol * (1.0 + std::fabs(ctx.fast.kappa));
    return finish("H2.strict_monotonicity", ctx, w, pass, kappa_hat,
                  "fitted kappa is the worst dissipation ratio over samples");
}

CheckReport check_fast_coercivity(const CheckContext& ctx) {
    const ModelSpec& m = ctx.model;
    FieldSampler su(m.slow_grid, ctx.seed, 111);
    FieldSampler sv(m.fast_grid, ctx.seed, 112);
    Worst w;
    double fit = 0.0;
    const bool fitting = ctx.fast.C < 0.0;
    for (int i = 0; i < ctx.n_samples; ++i) {
        const Field u = su.sample(static_cast<std::uint32_t>(i));
        const Field v = sv.sample(static_cast<std::uint32_t>(i));
        const double hn = field::norm(v, NormKind::l2());
        const double vn = field::norm(v, NormKind::h1());
        const double un = field::norm(u, m.h_kind());
        const double twice_pair = 2.0 * models::fast_pair(m, u, v, v);
        const double dissip = ctx.fast.eta2 * std::pow(vn, ctx.fast.alpha2);
        const double budget = 1.0 + hn * hn + un * un;
        if (fitting) {
            fit = std::max(fit, (twice_pair + dissip) / budget);
            w.consider((ctx.fast.fit_cap * budget - twice_pair - dissip) /
                           (1.0 + std::fabs(twice_pair) + dissip),
                       u, v);
        } else {
            const double slack = ctx.fast.C * budget - twice_pair - dissip;
            w.consider(slack / (1.0 + std::fabs(twice_pair) + dissip), u, v);
        }
    }
    const bool pass = fitting ? fit <= ctx.fast.fit_cap : w.margin >= -ctx.tol;
    return finish("H3.coercivity", ctx, w, pass,
                  fitting ? std::optional<double>(fit) : std::nullopt);
}

CheckReport check_growth_fast(const CheckContext& ctx) {
    const ModelSpec& m = ctx.model;
    FieldSampler su(m.slow_grid, ctx.seed, 113);
    FieldSampler sv(m.fast_grid, ctx.seed, 114);
    Worst w;
    double fit = 0.0;
    for (int i = 0; i < ctx.n_samples; ++i) {
        const Field u = su.sample(static_cast<std::uint32_t>(i));
        const Field v = sv.sample(static_cast<std::uint32_t>(i));
        const double dual2 = std::pow(models::fast_drift_dual_norm(m, u, v), 2.0);
        const double vn = field::norm(v, NormKind::h1());
        const double hn = field::norm(v, NormKind::l2());
        const double un = field::norm(u, m.h_kind());
        const double bound = (1.0 + vn * vn) * (1.0 + std::pow(hn, ctx.fast.beta2)) +
                             un * un;
        fit = std::max(fit, dual2 / bound);
        w.consider((ctx.fast.fit_cap * bound - dual2) / (1.0 + dual2 + bound), u, v);

        // uniform noise bound sup_v ||B2(u, v)|| <= C (1 + ||u||)
        const double hs = std::sqrt(
            models::noise_hs_norm_sq(m.noise_fast, v, NormKind::l2()));
        fit = std::max(fit, hs / (1.0 + un));
    }
    const bool pass = fit <= ctx.fast.fit_cap;
    return finish("H4.growth", ctx, w, pass, fit,
                  "fitted constant covers the drift growth and the noise bound");
}

CheckReport check_lipschitz_g(const CheckContext& ctx) {
    const ModelSpec& m = ctx.model;
    const double lam_max =
        field::laplace_eigenvalue(m.slow_grid, m.slow_grid.n_interior);
    const double bridge =
        m.h_kind().tag == NormKind::Tag::Hm1Dual ? std::sqrt(lam_max) : 1.0;
    const double declared =
        std::max(m.fast.g.lipschitz_x() * bridge, m.fast.lg());
    auto ratio = [&](const Field& u1, const Field& u2, const Field& v1, const Field& v2) {
        const Field d = models::coupling_apply(m.fast.g, u1, v1, m.fast_grid) -
                        models::coupling_apply(m.fast.g, u2, v2, m.fast_grid);
        const double den =
            field::norm(u1 - u2, m.h_kind()) + field::norm(v1 - v2, NormKind::l2());
        return den == 0.0 ? 0.0 : field::norm(d, NormKind::l2()) / den;
    };
    return lipschitz_generic(ctx, "H.lipschitz_g", m.slow_grid, m.fast_grid, declared,
                             ratio,
                             "x-slope bridged through the discrete dual norm");
}

CheckReport check_lipschitz_b2(const CheckContext& ctx) {
    const ModelSpec& m = ctx.model;
    const double declared = models::fast_noise_lipschitz_y(m);
    auto ratio = [&](const Field&, const Field&, const Field& v1, const Field& v2) {
        const double m1 = models::noise_multiplier(m.noise_fast, v1, NormKind::l2());
        const double m2 = models::noise_multiplier(m.noise_fast, v2, NormKind::l2());
        const double den = field::norm(v1 - v2, NormKind::l2());
        return den == 0.0 ? 0.0
                          : std::fabs(m1 - m2) * std::sqrt(m.noise_fast.coeff_sq_sum()) /
                                den;
    };
    return lipschitz_generic(ctx, "H.lipschitz_B2", m.slow_grid, m.fast_grid, declared,
                             ratio);
}

CheckReport check_dissipativity_gap(const CheckContext& ctx) {
    const double gap = models::dissipativity_gap(ctx.model);
    CheckReport rep;
    rep.condition_id = "gap.2lam1_minus_2Lg_minus_LB2sq";
    rep.n_samples = 0;
    rep.worst_margin = gap;
    rep.pass = gap > 0.0;
    rep.fitted_constant = gap;
    rep.note = "computed from declared constants and the discrete lambda_1";
    return rep;
}

std::vector<CheckReport> run_all_checks(const CheckContext& ctx) {
    std::vector<CheckReport> reps;
    reps.push_back(check_hemicontinuity_slow(ctx));
    reps.push_back(check_local_monotonicity(ctx));
    reps.push_back(check_coercivity(ctx));
    reps.push_back(check_growth_slow(ctx));
    reps.push_back(check_lipschitz_f(ctx));
    reps.push_back(check_lipschitz_b1(ctx));
    reps.push_back(check_hemicontinuity_fast(ctx));
    reps.push_back(check_fast_strict_monotonicity(ctx));
    reps.push_back(check_fast_coercivity(ctx));
    reps.push_back(check_growth_fast(ctx));
    reps.push_back(check_lipschitz_g(ctx));
    reps.push_back(check_lipschitz_b2(ctx));
    reps.push_back(check_dissipativity_gap(ctx));
    return reps;
}

} // namespace mfw::hypotheses
