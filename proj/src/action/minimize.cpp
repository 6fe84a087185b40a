#include "mfw/action/minimize.hpp"

#include <cmath>
#include <deque>

#include "mfw/util/parallel.hpp"

namespace mfw::action {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double nrm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

struct LbfgsMemory {
    std::deque<std::vector<double>> s, y;
    std::deque<double> rho;
    int capacity;

    explicit LbfgsMemory(int cap) : capacity(cap) {}

    void push(std::vector<double> si, std::vector<double> yi) {
        const double sy = dot(si, yi);
        if (sy <= 1e-14 * nrm2(si) * nrm2(yi)) return; // skip non-curvature pairs
        s.push_back(std::move(si));
        y.push_back(std::move(yi));
        rho.push_back(1.0 / sy);
        if (static_cast<int>(s.size()) > capacity) {
            s.pop_front();
            y.pop_front();
            rho.pop_front();
        }
    }

    // two-loop recursion: d = -H g
    std::vector<double> direction(std::span<const double> g) const {
        std::vector<double> q(g.begin(), g.end());
        const int k = static_cast<int>(s.size());
        std::vector<double> alpha(static_cast<std::size_t>(k));
        for (int i = k - 1; i >= 0; --i) {
            alpha[static_cast<std::size_t>(i)] =
                rho[static_cast<std::size_t>(i)] * dot(s[static_cast<std::size_t>(i)], q);
            for (std::size_t j = 0; j < q.size(); ++j)
                q[j] -= alpha[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)][j];
        }
        if (k > 0) {
            const auto& slast = s[static_cast<std::size_t>(k - 1)];
            const auto& ylast = y[static_cast<std::size_t>(k - 1)];
            const double gamma = dot(slast, ylast) / dot(ylast, ylast);
            for (auto& v : q) v *= gamma;
        }
        for (int i = 0; i < k; ++i) {
            const double beta =
                rho[static_cast<std::size_t>(i)] * dot(y[static_cast<std::size_t>(i)], q);
            for (std::size_t j = 0; j < q.size(); ++j)
                q[j] += (alpha[static_cast<std::size_t>(i)] - beta) *
                        s[static_cast<std::size_t>(i)][j];
        }
        for (auto& v : q) v = -v;
        return q;
    }
};

} // namespace

ActionResult minimize(const ActionProblem& p, const skeleton::Control& init,
                      const models::ModelSpec& m, const averaging::FbarBackend& fbar,
                      const OptimizerParams& params) {
    skeleton::Control current = init;
    const std::size_t dim = current.raw().size();
    std::vector<double> g(dim);
    Objective obj = gradient(p, current, m, fbar, g);

    LbfgsMemory mem(params.lbfgs_memory);
    int it = 0;
    for (; it < params.max_iterations; ++it) {
        const double gnorm = nrm2(g);
        if (gnorm < params.gtol && obj.terminal_gap < params.xtol) break;

        std::vector<double> d = mem.direction(g);
        double slope = dot(g, d);
        if (!(slope < 0.0)) { // fall back to steepest descent
            d.assign(g.begin(), g.end());
            for (auto& v : d) v = -v;
            slope = dot(g, d);
        }

        // backtracking with a batch of speculative step sizes per round
        double step = 1.0;
        bool accepted = false;
        skeleton::Control trial = current;
        for (int round = 0; round < params.ls_max_trials && !accepted;
             round += params.ls_batch) {
            const int batch = params.ls_batch;
            std::vector<double> steps(static_cast<std::size_t>(batch));
            std::vector<double> totals(static_cast<std::size_t>(batch));
            for (int b = 0; b < batch; ++b)
                steps[static_cast<std::size_t>(b)] = step * std::pow(params.ls_shrink, b);
            parallel_chunks(static_cast<std::size_t>(batch), 0,
                            [&](std::size_t lo, std::size_t hi) {
                                for (std::size_t b = lo; b < hi; ++b) {
                                    skeleton::Control c = current;
                                    auto raw = c.raw();
                                    for (std::size_t i = 0; i < dim; ++i)
                                        raw[i] += steps[b] * d[i];
                                    totals[b] = evaluate(p, c, m, fbar).total;
                                }
                            });
            for (int b = 0; b < batch; ++b) {
                const double t = steps[static_cast<std::size_t>(b)];
                if (totals[static_cast<std::size_t>(b)] <=
                    obj.total + params.armijo_c * t * slope) {
                    auto raw = trial.raw();
                    const auto cur = current.raw();
                    for (std::size_t i = 0; i < dim; ++i) raw[i] = cur[i] + t * d[i];
                    step = t;
                    accepted = true;
                    break;
                }
            }
            if (!accepted) step *= std::pow(params.ls_shrink, batch);
        }
        if (!accepted) break; // line search exhausted

        std::vector<double> gnew(dim);
        const Objective objnew = gradient(p, trial, m, fbar, gnew);
        std::vector<double> si(dim), yi(dim);
        const auto cur = current.raw();
        const auto tri = trial.raw();
        for (std::size_t i = 0; i < dim; ++i) {
            si[i] = tri[i] - cur[i];
            yi[i] = gnew[i] - g[i];
        }
        mem.push(std::move(si), std::move(yi));
        current = trial;
        g = std::move(gnew);
        obj = objnew;
    }

    ActionResult res;
    res.control = current;
    skeleton::SkeletonTrajectory traj;
    const Objective fin = evaluate(p, current, m, fbar, &traj);
    res.action_value = fin.action;
    res.terminal_gap = fin.terminal_gap;
    res.trajectory = std::move(traj);
    res.iterations = it;
    res.gradient_norm = nrm2(g);
    res.converged = res.gradient_norm < params.gtol && res.terminal_gap < params.xtol;
    return res;
}

} // namespace mfw::action
