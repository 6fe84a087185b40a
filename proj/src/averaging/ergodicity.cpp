#include "mfw/averaging/ergodicity.hpp"

#include <cmath>

#include "mfw/averaging/fbar.hpp"
#include "mfw/field/norms.hpp"
#include "mfw/models/ops.hpp"
#include "mfw/paths/stepper.hpp"
#include "mfw/util/parallel.hpp"

namespace mfw::averaging {

using field::Field;

ErgodicityFit ergodicity_decay(const models::ModelSpec& m, const Field& x,
                               const Field& y0, const Field& fbar_value, double horizon,
                               double dt, int n_paths, int record_stride,
                               const paths::WienerDriver& driver) {
    const long n_steps = std::lround(horizon / dt);
    const long n_rec = n_steps / record_stride;
    const std::size_t n = static_cast<std::size_t>(m.slow_grid.n_interior);
    const std::size_t nrec = static_cast<std::size_t>(n_rec);

    // per-time vector sums and componentwise square sums across paths
    std::vector<double> sum(nrec * n, 0.0), sumsq(nrec * n, 0.0);
    for (int p = 0; p < n_paths; ++p) {
        paths::FrozenSystem frozen(m, x, dt, driver);
        Field y = y0;
        for (long k = 0; k < n_steps; ++k) {
            if (!frozen.step(y, k, static_cast<std::uint32_t>(p)))
                throw NonConvergence("frozen trajectory left the guard radius");
            if ((k + 1) % record_stride != 0) continue;
            const std::size_t rec = static_cast<std::size_t>((k + 1) / record_stride - 1);
            const Field fv = models::coupling_apply(m.f, x, y, m.slow_grid);
            for (std::size_t i = 0; i < n; ++i) {
                sum[rec * n + i] += fv[i];
                sumsq[rec * n + i] += fv[i] * fv[i];
            }
        }
    }

    ErgodicityFit fit;
    const double h = m.slow_grid.spacing();
    for (std::size_t rec = 0; rec < nrec; ++rec) {
        double d2 = 0.0, v = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double mean = sum[rec * n + i] / n_paths;
            const double var =
                (sumsq[rec * n + i] / n_paths - mean * mean) / std::max(1, n_paths - 1) *
                n_paths;
            const double diff = mean - fbar_value[i];
            d2 += diff * diff;
            v += var / n_paths;
        }
        fit.t.push_back(dt * static_cast<double>((rec + 1) * record_stride));
        fit.distance.push_back(std::sqrt(h * d2));
        fit.se.push_back(std::sqrt(h * std::max(0.0, v)));
    }

    // fit log distance on the window above three noise floors
    std::vector<double> ts, ls;
    for (std::size_t i = 0; i < nrec; ++i) {
        if (fit.distance[i] > 3.0 * fit.se[i] && fit.distance[i] > 0.0) {
            ts.push_back(fit.t[i]);
            ls.push_back(std::log(fit.distance[i]));
        } else {
            break; // once at the floor, later points are noise
        }
    }
    if (ts.size() < 3 || ls.front() - ls.back() < 1.0) {
        fit.degenerate = true;
        return fit;
    }
    double st = 0, sl = 0, stt = 0, stl = 0;
    const double np = static_cast<double>(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        st += ts[i];
        sl += ls[i];
        stt += ts[i] * ts[i];
        stl += ts[i] * ls[i];
    }
    const double slope = (np * stl - st * sl) / (np * stt - st * st);
    const double intercept = (sl - slope * st) / np;
    double ss_res = 0, ss_tot = 0;
    const double lbar = sl / np;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double pred = intercept + slope * ts[i];
        ss_res += (ls[i] - pred) * (ls[i] - pred);
        ss_tot += (ls[i] - lbar) * (ls[i] - lbar);
    }
    fit.rate_hat = -slope;
    fit.prefactor_hat = std::exp(intercept);
    fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

} // namespace mfw::averaging
