#include "mfw/action/gradient.hpp"

#include <cmath>
#include <limits>

#include "mfw/field/norms.hpp"
#include "mfw/field/ops.hpp"

namespace mfw::action {

using field::Field;

namespace {

struct TerminalCost {
    const ActionProblem& p;
    const models::ModelSpec& m;

    double weight() const {
        if (const auto* hit = std::get_if<TerminalHit>(&p.objective))
            return hit->penalty_weight;
        return std::get<TerminalFunctional>(p.objective).penalty_weight;
    }

    // penalty value (without weight) and gap
    std::pair<double, double> value(const Field& xN) const {
        if (const auto* hit = std::get_if<TerminalHit>(&p.objective)) {
            const double gap = field::norm(xN - hit->target, m.h_kind());
            return {0.5 * gap * gap, gap};
        }
        const auto& tf = std::get<TerminalFunctional>(p.objective);
        const Field e = field::eigenmode(xN.grid(), tf.mode);
        const double ell = field::dot_l2(xN, e);
        const double s = tf.exceed ? std::max(0.0, tf.threshold - ell)
                                   : std::max(0.0, ell - tf.threshold);
        return {0.5 * s * s, s};
    }

    // coordinate gradient of the (unweighted) penalty
    Field grad(const Field& xN) const {
        const double h = xN.grid().spacing();
        if (const auto* hit = std::get_if<TerminalHit>(&p.objective)) {
            Field diff = xN - hit->target;
            if (m.h_kind().tag == field::NormKind::Tag::Hm1Dual) {
                field::NegLaplaceSolver inv(xN.grid());
                diff = inv.solve(diff);
            }
            return h * diff;
        }
        const auto& tf = std::get<TerminalFunctional>(p.objective);
        const Field e = field::eigenmode(xN.grid(), tf.mode);
        const double ell = field::dot_l2(xN, e);
        const double s = tf.exceed ? std::max(0.0, tf.threshold - ell)
                                   : std::max(0.0, ell - tf.threshold);
        const double sign = tf.exceed ? -1.0 : 1.0;
        return (sign * s * h) * e;
    }
};

// transpose Jacobian action of fbar
void fbar_jacobian_t(const models::ModelSpec& m, const averaging::FbarBackend& fbar,
                     const Field& x, const Field& mu, Field& out) {
    if (fbar.f_y_independent()) {
        kern::active().axpby(out.data(), m.f.gain_x, mu.data(), 0.0, mu.data(), out.size());
        return;
    }
    if (fbar.mode() == averaging::FbarMode::LinearOracle) {
        const Field minv = fbar.mean_inverse_apply(mu);
        kern::active().axpby(out.data(), m.f.gain_x, mu.data(),
                             m.f.gain_y * m.fast.g.gain_x, minv.data(), out.size());
        return;
    }
    // ergodic backend: forward differences of the raw average
    const double eta = 1e-4 * (1.0 + field::norm(x, m.h_kind()));
    const Field f0 = fbar.fbar_raw(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        Field xp = x;
        xp[i] += eta;
        const Field fi = fbar.fbar_raw(xp);
        double acc = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j)
            acc += (fi[j] - f0[j]) / eta * mu[j];
        out[i] = acc;
    }
}

// gradient of the noise multiplier (zero when additive or clipped)
bool multiplier_gradient(const models::ModelSpec& m, const Field& x, Field& out) {
    const auto& ns = m.noise_slow;
    if (ns.dependence != models::NoiseDependence::LinearClipped) return false;
    const double nrm = field::norm(x, m.h_kind());
    if (nrm == 0.0 || 1.0 + ns.slope * nrm >= ns.cap) return false;
    const double h = x.grid().spacing();
    if (m.h_kind().tag == field::NormKind::Tag::Hm1Dual) {
        field::NegLaplaceSolver inv(x.grid());
        const Field w = inv.solve(x);
        kern::active().axpby(out.data(), ns.slope * h / nrm, w.data(), 0.0, w.data(),
                             out.size());
    } else {
        kern::active().axpby(out.data(), ns.slope * h / nrm, x.data(), 0.0, x.data(),
                             out.size());
    }
    return true;
}

} // namespace

Objective evaluate(const ActionProblem& p, const skeleton::Control& control,
                   const models::ModelSpec& m, const averaging::FbarBackend& fbar,
                   skeleton::SkeletonTrajectory* traj_out) {
    skeleton::SkeletonTrajectory traj =
        skeleton::solve_skeleton(p.x0, control, m, fbar, p.tg);
    Objective obj;
    obj.action = action_value(control, p.tg);
    if (traj.blew_up) {
        obj.blew_up = true;
        obj.total = std::numeric_limits<double>::infinity();
        if (traj_out) *traj_out = traj;
        return obj;
    }
    const TerminalCost tc{p, m};
    const auto [pen, gap] = tc.value(traj.terminal());
    obj.penalty = tc.weight() * pen;
    obj.terminal_gap = gap;
    obj.total = obj.action + obj.penalty;
    if (traj_out) *traj_out = std::move(traj);
    return obj;
}

Objective gradient(const ActionProblem& p, const skeleton::Control& control,
                   const models::ModelSpec& m, const averaging::FbarBackend& fbar,
                   std::span<double> grad) {
    skeleton::SkeletonTrajectory traj;
    Objective obj = evaluate(p, control, m, fbar, &traj);
    const double dt = p.tg.dt;
    const long N = p.tg.n_steps;
    const int m1 = control.slow_dim();
    const int m2 = control.fast_dim();
    const int dim = m1 + m2;
    if (grad.size() != static_cast<std::size_t>(N) * static_cast<std::size_t>(dim))
        throw DomainError("gradient buffer size mismatch");
    if (obj.blew_up) {
        for (auto& g : grad) g = 0.0;
        return obj;
    }

    const models::SlowImplicit implicit(m, dt);
    std::vector<Field> modes;
    for (int k = 1; k <= m1; ++k) modes.push_back(field::eigenmode(m.slow_grid, k));

    const TerminalCost tc{p, m};
    Field lam = tc.weight() * tc.grad(traj.terminal());
    Field tmp(m.slow_grid), jml(m.slow_grid), mgrad(m.slow_grid);
    for (long k = N - 1; k >= 0; --k) {
        const Field& xk = traj.states[static_cast<std::size_t>(k)];
        const Field mu = implicit.solve(lam);
        const double mult = models::noise_multiplier(m.noise_slow, xk, m.h_kind());
        const auto phi = control.at_step(k);
        double* gk = grad.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(dim);
        for (int j = 0; j < m1; ++j) {
            double edotmu = 0.0;
            const Field& ej = modes[static_cast<std::size_t>(j)];
            for (std::size_t i = 0; i < mu.size(); ++i) edotmu += ej[i] * mu[i];
            gk[j] = dt * (phi[static_cast<std::size_t>(j)] +
                          mult * m.noise_slow.mode_coeffs[static_cast<std::size_t>(j)] *
                              edotmu);
        }
        for (int j = 0; j < m2; ++j)
            gk[m1 + j] = dt * phi[static_cast<std::size_t>(m1 + j)];

        // lam_k = mu + dt (Jexpl^T + Jfbar^T) mu + dt grad(mult) (w . mu)
        Field lnew = mu;
        models::slow_explicit_jacobian_t(m, xk, mu, jml, tmp);
        kern::active().axpy(lnew.data(), dt, jml.data(), lnew.size());
        fbar_jacobian_t(m, fbar, xk, mu, jml);
        kern::active().axpy(lnew.data(), dt, jml.data(), lnew.size());
        if (multiplier_gradient(m, xk, mgrad)) {
            // w = sum_j b_j phi_j e_j
            Field w(m.slow_grid);
            for (int j = 0; j < m1; ++j)
                kern::active().axpy(w.data(),
                                    m.noise_slow.mode_coeffs[static_cast<std::size_t>(j)] *
                                        phi[static_cast<std::size_t>(j)],
                                    modes[static_cast<std::size_t>(j)].data(), w.size());
            double wmu = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i) wmu += w[i] * mu[i];
            kern::active().axpy(lnew.data(), dt * wmu, mgrad.data(), lnew.size());
        }
        lam = std::move(lnew);
    }
    obj.total = obj.action + obj.penalty;
    return obj;
}

Objective gradient_fd(const ActionProblem& p, const skeleton::Control& control,
                      const models::ModelSpec& m, const averaging::FbarBackend& fbar,
                      std::span<double> grad, double fd_step) {
    Objective base = evaluate(p, control, m, fbar);
    skeleton::Control work = control;
    auto raw = work.raw();
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double orig = raw[i];
        raw[i] = orig + fd_step;
        const double jp = evaluate(p, work, m, fbar).total;
        raw[i] = orig - fd_step;
        const double jm = evaluate(p, work, m, fbar).total;
        raw[i] = orig;
        grad[i] = (jp - jm) / (2.0 * fd_step);
    }
    return base;
}

} // namespace mfw::action
