#include "mfw/ldp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "mfw/action/minimize.hpp"
#include "mfw/field/norms.hpp"
#include "mfw/field/ops.hpp"
#include "mfw/paths/stepper.hpp"
#include "mfw/skeleton/solve.hpp"
#include "mfw/util/parallel.hpp"

namespace mfw::ldp {

using field::Field;

double ScalingTable::value(std::size_t row, const std::string& col) const {
    for (std::size_t c = 0; c < columns.size(); ++c)
        if (columns[c] == col) return rows[row][c];
    throw DomainError("unknown scaling-table column: " + col);
}

namespace {

constexpr long kBlockSize = 4096;

struct BlockPart {
    std::vector<double> sum, sumsq;
    long n = 0;
    long blowups = 0;
};

// vector-valued blocked ensemble; combination is in block order so the
// result does not depend on the number of threads
std::vector<MeanSE> ensemble_mean_vec(
    long n_paths, std::size_t threads, std::size_t k,
    const std::function<std::function<bool(std::uint32_t, std::span<double>)>()>&
        make_worker) {
    const long n_blocks = (n_paths + kBlockSize - 1) / kBlockSize;
    std::vector<BlockPart> parts(static_cast<std::size_t>(n_blocks));
    parallel_chunks(static_cast<std::size_t>(n_blocks), threads,
                    [&](std::size_t lo, std::size_t hi) {
                        auto worker = make_worker();
                        std::vector<double> vals(k);
                        for (std::size_t b = lo; b < hi; ++b) {
                            BlockPart& part = parts[b];
                            part.sum.assign(k, 0.0);
                            part.sumsq.assign(k, 0.0);
                            const long p0 = static_cast<long>(b) * kBlockSize;
                            const long p1 = std::min(n_paths, p0 + kBlockSize);
                            for (long p = p0; p < p1; ++p) {
                                if (!worker(static_cast<std::uint32_t>(p), vals)) {
                                    ++part.blowups;
                                    continue;
                                }
                                for (std::size_t j = 0; j < k; ++j) {
                                    part.sum[j] += vals[j];
                                    part.sumsq[j] += vals[j] * vals[j];
                                }
                                ++part.n;
                            }
                        }
                    });
    std::vector<double> sum(k, 0.0), sumsq(k, 0.0);
    long n = 0, blow = 0;
    for (const BlockPart& part : parts) {
        for (std::size_t j = 0; j < k; ++j) {
            sum[j] += part.sum[j];
            sumsq[j] += part.sumsq[j];
        }
        n += part.n;
        blow += part.blowups;
    }
    std::vector<MeanSE> out(k);
    for (std::size_t j = 0; j < k; ++j) {
        const double mean = n > 0 ? sum[j] / n : 0.0;
        const double var = n > 1 ? (sumsq[j] - n * mean * mean) / (n - 1) : 0.0;
        out[j] = {mean, n > 0 ? std::sqrt(std::max(0.0, var) / n) : 0.0, n, blow};
    }
    return out;
}

paths::TimeGrid derive_grid(double horizon, double delta, double requested_dt,
                            double zeta) {
    double dt = requested_dt;
    if (dt <= 0.0) {
        const long steps = static_cast<long>(std::ceil(horizon / (delta / 20.0) - 1e-9));
        dt = horizon / static_cast<double>(steps);
    }
    if (zeta <= 0.0) zeta = dt;
    return paths::TimeGrid::make(horizon, dt, zeta);
}

void fit_linear_trend(ScalingTable& t, std::size_t est_col, std::size_t se_col) {
    const std::size_t n = t.rows.size();
    if (n < 2) return;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = static_cast<double>(i);
        const double y = t.rows[i][est_col];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double np = static_cast<double>(n);
    const double sxx_c = sxx - sx * sx / np;
    t.slope = (sxy - sx * sy / np) / sxx_c;
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (static_cast<double>(i) - sx / np) / sxx_c;
        const double se = t.rows[i][se_col];
        var += w * w * se * se;
    }
    t.slope_se = std::sqrt(var);
    t.has_slope = true;
}

} // namespace

MeanSE ensemble_mean(
    long n_paths, std::size_t threads,
    const std::function<std::function<double(std::uint32_t)>()>& make_worker) {
    auto vec = ensemble_mean_vec(
        n_paths, threads, 1, [&]() -> std::function<bool(std::uint32_t, std::span<double>)> {
            auto w = make_worker();
            return [w](std::uint32_t p, std::span<double> out) {
                const double v = w(p);
                if (std::isnan(v)) return false;
                out[0] = v;
                return true;
            };
        });
    return vec[0];
}

void fit_loglog_slope(ScalingTable& table, const std::string& param_col,
                      const std::string& est_col) {
    std::size_t pc = 0, ec = 0;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (table.columns[c] == param_col) pc = c;
        if (table.columns[c] == est_col) ec = c;
    }
    const std::size_t n = table.rows.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& r : table.rows) {
        const double x = std::log(r[pc]);
        const double y = std::log(r[ec]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double np = static_cast<double>(n);
    const double sxx_c = sxx - sx * sx / np;
    table.slope = (sxy - sx * sy / np) / sxx_c;
    double ss_res = 0.0;
    const double intercept = (sy - table.slope * sx) / np;
    for (const auto& r : table.rows) {
        const double pred = intercept + table.slope * std::log(r[pc]);
        ss_res += std::pow(std::log(r[ec]) - pred, 2);
    }
    table.slope_se = n > 2 ? std::sqrt(ss_res / (np - 2.0) / sxx_c) : 0.0;
    table.has_slope = true;
}

ScalingTable validate_increments(const IncrementsParams& p) {
    if (p.zeta_schedule.empty())
        throw ConfigError("increments.zeta_schedule", "must not be empty");
    const double zeta_max =
        *std::max_element(p.zeta_schedule.begin(), p.zeta_schedule.end());
    const paths::TimeGrid tg = derive_grid(p.horizon, p.scales.delta, p.dt, zeta_max);
    const std::size_t nz = p.zeta_schedule.size();
    std::vector<long> spb(nz);
    for (std::size_t j = 0; j < nz; ++j) {
        const double q = p.zeta_schedule[j] / tg.dt;
        spb[j] = std::lround(q);
        if (spb[j] < 1 || std::fabs(q - spb[j]) > 1e-9 * q)
            throw ConfigError("increments.zeta_schedule",
                              "every zeta must be an integer multiple of dt");
    }
    const paths::WienerDriver driver{p.seed};
    const models::ModelSpec model = p.model;
    const auto scales = p.scales;
    const auto x0 = p.x0, y0 = p.y0;

    auto make_worker = [&]() -> std::function<bool(std::uint32_t, std::span<double>)> {
        auto sys = std::make_shared<paths::CoupledSystem>(model, scales, tg, driver);
        return [=](std::uint32_t path, std::span<double> out) {
            Field x = x0, y = y0;
            std::vector<Field> snaps(nz, x0);
            std::vector<double> acc(nz, 0.0);
            for (long k = 0; k < tg.n_steps; ++k) {
                for (std::size_t j = 0; j < nz; ++j) {
                    if (k % spb[j] == 0) snaps[j] = x;
                    const double d = field::norm(x - snaps[j], model.h_kind());
                    acc[j] += d * d * tg.dt;
                }
                if (!sys->step(x, y, k, path, nullptr)) return false;
            }
            for (std::size_t j = 0; j < nz; ++j) out[j] = acc[j];
            return true;
        };
    };
    const auto stats = ensemble_mean_vec(p.n_paths, p.threads, nz, make_worker);

    ScalingTable t;
    t.columns = {"zeta", "estimate", "se", "n_paths", "blowups"};
    for (std::size_t j = 0; j < nz; ++j)
        t.rows.push_back({p.zeta_schedule[j], stats[j].mean, stats[j].se,
                          static_cast<double>(stats[j].n),
                          static_cast<double>(stats[j].blowups)});
    std::sort(t.rows.begin(), t.rows.end(),
              [](const auto& a, const auto& b) { return a[0] < b[0]; });
    fit_loglog_slope(t, "zeta", "estimate");
    return t;
}

ScalingTable validate_fast_auxiliary(const FastAuxParams& p) {
    if (p.cells.empty()) throw ConfigError("fast_aux.cells", "must not be empty");
    ScalingTable t;
    t.columns = {"zeta", "delta_over_eps", "estimate", "se", "n_paths", "blowups"};
    for (const FastAuxCell& cell : p.cells) {
        const double delta = cell.ratio * p.epsilon;
        const paths::ScaleParams scales{p.epsilon, delta};
        const double dtmax = delta / 20.0;
        const long m = static_cast<long>(std::ceil(cell.zeta / dtmax - 1e-9));
        const double dt = cell.zeta / static_cast<double>(m);
        const paths::TimeGrid tg = paths::TimeGrid::make(p.horizon, dt, cell.zeta);
        const paths::WienerDriver driver{p.seed};
        const models::ModelSpec model = p.model;
        const auto x0 = p.x0, y0 = p.y0;
        auto phi = std::make_shared<skeleton::Control>(
            model.noise_slow.n_modes, model.noise_fast.n_modes, tg.n_steps);
        for (long k = 0; k < tg.n_steps; ++k)
            phi->at_step(k)[static_cast<std::size_t>(model.noise_slow.n_modes)] =
                p.phi_fast;

        auto make_worker = [&, phi]() -> std::function<bool(std::uint32_t, std::span<double>)> {
            auto sys = std::make_shared<paths::CoupledSystem>(model, scales, tg, driver);
            return [=](std::uint32_t path, std::span<double> out) {
                Field x = x0, y = y0, yhat = y0, snap = x0;
                double acc = 0.0;
                for (long k = 0; k < tg.n_steps; ++k) {
                    if (k % tg.steps_per_block == 0) snap = x;
                    const double d = field::norm(y - yhat, field::NormKind::l2());
                    acc += d * d * tg.dt;
                    // the auxiliary line must consume the same Wiener
                    // increments as the controlled fast line
                    if (!sys->step_fast_frozen(snap, yhat, k, path)) return false;
                    if (!sys->step(x, y, k, path, phi.get())) return false;
                }
                out[0] = acc;
                return true;
            };
        };
        const auto stats = ensemble_mean_vec(p.n_paths, p.threads, 1, make_worker);
        t.rows.push_back({cell.zeta, cell.ratio, stats[0].mean, stats[0].se,
                          static_cast<double>(stats[0].n),
                          static_cast<double>(stats[0].blowups)});
    }
    return t;
}

ScalingTable validate_averaging(const AveragingParams& p) {
    ScalingTable t;
    t.columns = {"epsilon", "delta", "estimate", "se", "n_paths", "blowups"};
    for (const double eps : p.epsilon_schedule) {
        const double delta = p.delta_rule(eps);
        const paths::ScaleParams scales{eps, delta};
        const paths::TimeGrid tgz = derive_grid(p.horizon, delta, 0.0, 0.0);
        const paths::WienerDriver driver{p.seed};
        const models::ModelSpec model = p.model;
        const auto x0 = p.x0, y0 = p.y0;

        auto phi = std::make_shared<skeleton::Control>(
            model.noise_slow.n_modes, model.noise_fast.n_modes, tgz.n_steps);
        for (long k = 0; k < tgz.n_steps; ++k) phi->at_step(k)[0] = p.phi_slow;

        const averaging::FbarBackend backend(model, p.fbar_mode, driver);
        auto xbar = std::make_shared<skeleton::SkeletonTrajectory>(
            skeleton::solve_skeleton(x0, *phi, model, backend, tgz));
        if (xbar->blew_up)
            throw DomainError("skeleton trajectory left the guard radius");

        auto make_worker = [&, phi, xbar]() -> std::function<bool(std::uint32_t, std::span<double>)> {
            auto sys = std::make_shared<paths::CoupledSystem>(model, scales, tgz, driver);
            return [=](std::uint32_t path, std::span<double> out) {
                Field x = x0, y = y0;
                double sup = 0.0;
                for (long k = 0; k < tgz.n_steps; ++k) {
                    if (!sys->step(x, y, k, path, phi.get())) return false;
                    const double d = field::norm(
                        x - xbar->states[static_cast<std::size_t>(k) + 1], model.h_kind());
                    sup = std::max(sup, d * d);
                }
                out[0] = sup;
                return true;
            };
        };
        const auto stats = ensemble_mean_vec(p.n_paths, p.threads, 1, make_worker);
        t.rows.push_back({eps, delta, stats[0].mean, stats[0].se,
                          static_cast<double>(stats[0].n),
                          static_cast<double>(stats[0].blowups)});
    }
    fit_loglog_slope(t, "epsilon", "estimate");
    return t;
}

ScalingTable validate_moments(const MomentsParams& p) {
    ScalingTable t;
    t.columns = {"epsilon", "delta", "estimate", "se", "n_paths", "blowups"};
    for (const double eps : p.epsilon_schedule) {
        const double delta = p.delta_rule(eps);
        const paths::ScaleParams scales{eps, delta};
        const paths::TimeGrid tg = derive_grid(p.horizon, delta, 0.0, 0.0);
        const paths::WienerDriver driver{p.seed};
        const models::ModelSpec model = p.model;
        const auto x0 = p.x0, y0 = p.y0;
        auto make_worker = [&]() -> std::function<bool(std::uint32_t, std::span<double>)> {
            auto sys = std::make_shared<paths::CoupledSystem>(model, scales, tg, driver);
            return [=](std::uint32_t path, std::span<double> out) {
                Field x = x0, y = y0;
                double sup = std::pow(field::norm(x, model.h_kind()), 2);
                for (long k = 0; k < tg.n_steps; ++k) {
                    if (!sys->step(x, y, k, path, nullptr)) return false;
                    sup = std::max(sup, std::pow(field::norm(x, model.h_kind()), 2));
                }
                out[0] = sup;
                return true;
            };
        };
        const auto stats = ensemble_mean_vec(p.n_paths, p.threads, 1, make_worker);
        t.rows.push_back({eps, delta, stats[0].mean, stats[0].se,
                          static_cast<double>(stats[0].n),
                          static_cast<double>(stats[0].blowups)});
    }
    fit_linear_trend(t, 2, 3);
    return t;
}

double scalar_gramian_rate(const paths::Mode1Reduction& red, double horizon, double x0,
                           double threshold) {
    if (red.f_gain_y != 0.0)
        throw ConfigError("tail", "gramian oracle needs a decoupled slow line");
    const double ac = red.f_gain_x - red.a * red.lam_slow;
    const double mT = std::exp(ac * horizon) * x0;
    const double qT = ac != 0.0
                          ? red.b1 * red.b1 * (std::exp(2.0 * ac * horizon) - 1.0) /
                                (2.0 * ac)
                          : red.b1 * red.b1 * horizon;
    if (threshold <= mT) return 0.0;
    return (threshold - mT) * (threshold - mT) / (2.0 * qT);
}

CriterionResult criterion_slope_band(const ScalingTable& t, double lo, double hi,
                                     const std::string& name) {
    CriterionResult r;
    r.name = name;
    r.pass = t.has_slope && t.slope >= lo && t.slope <= hi;
    r.detail = "slope " + std::to_string(t.slope) + " target [" + std::to_string(lo) +
               ", " + std::to_string(hi) + "]";
    return r;
}

CriterionResult criterion_halving_factor(const ScalingTable& t, double lo, double hi) {
    CriterionResult r;
    r.name = "halving_factor";
    r.pass = t.rows.size() >= 2;
    std::string detail;
    for (std::size_t i = 0; i + 1 < t.rows.size(); ++i) {
        const double a = t.value(i, "estimate");
        const double b = t.value(i + 1, "estimate");
        const double factor = b != 0.0 ? a / b : 0.0;
        detail += (i ? ", " : "") + std::to_string(factor);
        if (!(factor >= lo && factor <= hi)) r.pass = false;
    }
    r.detail = "factors " + detail + " target [" + std::to_string(lo) + ", " +
               std::to_string(hi) + "]";
    return r;
}

CriterionResult criterion_strictly_decreasing(const ScalingTable& t) {
    CriterionResult r;
    r.name = "strictly_decreasing";
    r.pass = t.rows.size() >= 2;
    for (std::size_t i = 0; i + 1 < t.rows.size(); ++i) {
        const double a = t.value(i, "estimate"), sa = t.value(i, "se");
        const double b = t.value(i + 1, "estimate"), sb = t.value(i + 1, "se");
        if (!(a - b > 2.0 * std::sqrt(sa * sa + sb * sb))) r.pass = false;
    }
    r.detail = "each step must fall by more than two combined SEs";
    return r;
}

CriterionResult criterion_tail_closure(const ScalingTable& t, double max_final_rel_gap) {
    CriterionResult r;
    r.name = "tail_closure";
    r.pass = !t.rows.empty();
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double gap = std::fabs(t.value(i, "eps_log_p") - t.value(i, "minus_I"));
        if (gap > prev) r.pass = false;
        prev = gap;
    }
    const double final_rel = t.value(t.rows.size() - 1, "rel_gap");
    if (!(final_rel < max_final_rel_gap)) r.pass = false;
    r.detail = "final relative gap " + std::to_string(final_rel) + " target < " +
               std::to_string(max_final_rel_gap) + ", absolute gap decreasing";
    return r;
}

CriterionResult criterion_flat_trend(const ScalingTable& t) {
    CriterionResult r;
    r.name = "flat_trend";
    r.pass = t.has_slope && std::fabs(t.slope) <= 2.0 * t.slope_se;
    r.detail = "trend " + std::to_string(t.slope) + " +- " + std::to_string(t.slope_se);
    return r;
}

ScalingTable estimate_tail(const TailParams& p) {
    const paths::Mode1Reduction red = paths::Mode1Reduction::from(p.model);
    const paths::WienerDriver driver{p.seed};

    // reference rate from the action minimiser on the same event
    const paths::TimeGrid tg_ref = paths::TimeGrid::make(
        p.horizon, p.horizon / static_cast<double>(p.reference_steps),
        p.horizon / static_cast<double>(p.reference_steps));
    action::ActionProblem prob;
    Field x0f(p.model.slow_grid);
    {
        const Field e1 = field::eigenmode(p.model.slow_grid, 1);
        kern::active().axpy(x0f.data(), p.x0, e1.data(), x0f.size());
    }
    prob.x0 = x0f;
    prob.tg = tg_ref;
    prob.objective = action::TerminalFunctional{1, p.threshold, true, 1e5};
    const averaging::FbarBackend backend(
        p.model,
        p.model.linear_fast() && p.model.f.is_affine() ? averaging::FbarMode::LinearOracle
                                                       : averaging::FbarMode::ErgodicAverage,
        driver);
    const skeleton::Control init(p.model.noise_slow.n_modes, p.model.noise_fast.n_modes,
                                 tg_ref.n_steps);
    const action::ActionResult act = action::minimize(prob, init, p.model, backend);
    const double rate = act.action_value;

    ScalingTable t;
    t.columns = {"epsilon", "delta",   "p_hat",    "eps_log_p", "ci95",
                 "minus_I", "rel_gap", "e_sup_sq", "sup_se",    "n_paths",
                 "hits",    "blowups"};
    bool first = true;
    for (const double eps : p.epsilon_schedule) {
        const double delta = p.delta_rule(eps);
        const paths::ScaleParams scales{eps, delta};
        const long steps = static_cast<long>(std::ceil(p.horizon / (delta / 20.0) - 1e-9));
        const double dt = p.horizon / static_cast<double>(steps);
        const paths::TimeGrid tg = paths::TimeGrid::make(p.horizon, dt, dt);

        const long n_blocks = (p.n_paths + kBlockSize - 1) / kBlockSize;
        std::vector<paths::ReducedTerminal> parts(static_cast<std::size_t>(n_blocks));
        parallel_chunks(static_cast<std::size_t>(n_blocks), p.threads,
                        [&](std::size_t lo, std::size_t hi) {
                            for (std::size_t b = lo; b < hi; ++b) {
                                const long p0 = static_cast<long>(b) * kBlockSize;
                                const long cnt =
                                    std::min(p.n_paths, p0 + kBlockSize) - p0;
                                parts[b] = paths::reduced_tail_block(
                                    red, scales, tg, driver, p.x0, p.y0, p.threshold,
                                    static_cast<std::uint32_t>(p0),
                                    static_cast<std::uint32_t>(cnt));
                            }
                        });
        paths::ReducedTerminal acc;
        for (const auto& part : parts) {
            acc.hits += part.hits;
            acc.blowups += part.blowups;
            acc.sum += part.sum;
            acc.sum_sq += part.sum_sq;
            acc.sum_sup_sq += part.sum_sup_sq;
        }
        const long n_ok = p.n_paths - static_cast<long>(acc.blowups);
        if (first && acc.hits < 10)
            throw InfeasibleEvent(
                "fewer than 10 hits at the largest epsilon; raise n_paths or lower r");
        first = false;
        const double p_hat =
            static_cast<double>(acc.hits) / static_cast<double>(std::max(1l, n_ok));
        const double eps_log_p = p_hat > 0.0 ? eps * std::log(p_hat) : -1e300;
        const double se_logp =
            acc.hits > 0 ? std::sqrt((1.0 - p_hat) / (static_cast<double>(n_ok) * p_hat))
                         : 0.0;
        const double sup_mean = acc.sum_sup_sq / static_cast<double>(std::max(1l, n_ok));
        const double rel_gap = eps_log_p != 0.0
                                   ? std::fabs(eps_log_p + rate) / std::fabs(eps_log_p)
                                   : 0.0;
        t.rows.push_back({eps, delta, p_hat, eps_log_p, 1.96 * eps * se_logp, -rate,
                          rel_gap, sup_mean, 0.0, static_cast<double>(p.n_paths),
                          static_cast<double>(acc.hits),
                          static_cast<double>(acc.blowups)});
    }
    return t;
}

} // namespace mfw::ldp
