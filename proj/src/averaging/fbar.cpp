#include "mfw/averaging/fbar.hpp"

#include <cmath>

#include "mfw/field/norms.hpp"
#include "mfw/field/ops.hpp"
#include "mfw/paths/stepper.hpp"

namespace mfw::averaging {

using field::Field;

FbarBackend::FbarBackend(const models::ModelSpec& m, FbarMode mode,
                         paths::WienerDriver driver, ErgodicAverageParams params,
                         double cache_q)
    : model_(m), mode_(mode), driver_(driver), params_(params), cache_q_(cache_q) {
    m.validate();
    if (mode_ == FbarMode::LinearOracle && !linear_oracle_applicable())
        throw ConfigError("fbar.mode",
                          "linear oracle needs c2 = 0 and affine couplings");
    if (!f_y_independent() && models::dissipativity_gap(model_) <= 0.0)
        throw DissipativityViolated("dissipativity gap is not positive");
    if (params_.burn_in >= params_.horizon)
        throw ConfigError("fbar.burn_in", "must be smaller than the horizon");
}

bool FbarBackend::linear_oracle_applicable() const {
    return model_.linear_fast() && model_.f.is_affine();
}

Field FbarBackend::mean_inverse_apply(const Field& b) const {
    // solve (-lap - s) m = b on the fast grid, s = c1 + g_gain_y
    const field::Grid& g = model_.fast_grid;
    const double s = model_.fast.c1 + model_.fast.g.gain_y;
    if (field::laplace_eigenvalue(g, 1) <= s)
        throw DissipativityViolated("linear frozen dynamics are not stable");
    const double ih2 = 1.0 / (g.spacing() * g.spacing());
    const std::size_t n = b.size();
    std::vector<double> piv(n), low(n, 0.0);
    piv[0] = 2.0 * ih2 - s;
    for (std::size_t i = 1; i < n; ++i) {
        low[i] = -ih2 / piv[i - 1];
        piv[i] = 2.0 * ih2 - s - low[i] * (-ih2);
    }
    Field x(g);
    x[0] = b[0];
    for (std::size_t i = 1; i < n; ++i) x[i] = b[i] - low[i] * x[i - 1];
    x[n - 1] /= piv[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (x[i] - (-ih2) * x[i + 1]) / piv[i];
    return x;
}

Field FbarBackend::stationary_mean(const Field& x) const {
    if (!linear_oracle_applicable())
        throw ConfigError("fbar.mode", "stationary mean needs the linear oracle");
    Field b(model_.fast_grid);
    for (std::size_t i = 0; i < b.size(); ++i)
        b[i] = model_.fast.g.f0_const + model_.fast.g.gain_x * x[i];
    return mean_inverse_apply(b);
}

Field FbarBackend::ergodic_average(const Field& x) const {
    const auto& p = params_;
    const long n_steps = std::lround(p.horizon / p.dt);
    const long burn_steps = std::lround(p.burn_in / p.dt);
    std::vector<Field> replica_means;
    replica_means.reserve(static_cast<std::size_t>(p.n_replicas));
    for (int rep = 0; rep < p.n_replicas; ++rep) {
        paths::FrozenSystem frozen(model_, x, p.dt, driver_);
        Field y(model_.fast_grid);
        Field sum(model_.slow_grid);
        long count = 0;
        for (long k = 0; k < n_steps; ++k) {
            if (!frozen.step(y, k, static_cast<std::uint32_t>(rep)))
                throw NonConvergence("frozen trajectory left the guard radius");
            if (k >= burn_steps) {
                const Field fv = models::coupling_apply(model_.f, x, y, model_.slow_grid);
                kern::active().axpy(sum.data(), 1.0, fv.data(), sum.size());
                ++count;
            }
        }
        replica_means.push_back((1.0 / static_cast<double>(count)) * sum);
    }
    Field mean(model_.slow_grid);
    for (const Field& r : replica_means)
        kern::active().axpy(mean.data(), 1.0 / p.n_replicas, r.data(), mean.size());
    const double scale = 1.0 + field::norm(mean, field::NormKind::l2());
    for (const Field& r : replica_means) {
        const double spread = field::norm(r - mean, field::NormKind::l2()) / scale;
        if (spread > p.spread_tol)
            throw NonConvergence("ergodic-average replicas disagree beyond tolerance");
    }
    return mean;
}

Field FbarBackend::fbar_raw(const Field& x) const {
    if (f_y_independent()) {
        // integrand constant in z: fbar = f(x, anything)
        return models::coupling_apply(model_.f, x, x, model_.slow_grid);
    }
    if (mode_ == FbarMode::LinearOracle) {
        const Field m = stationary_mean(x);
        return models::coupling_apply(model_.f, x, m, model_.slow_grid);
    }
    return ergodic_average(x);
}

Field FbarBackend::fbar(const Field& x) const {
    // deterministic backends are cheap; the quantised cache exists to
    // amortise ergodic averaging inside stepping loops
    if (mode_ != FbarMode::ErgodicAverage || f_y_independent()) return fbar_raw(x);
    std::vector<std::int64_t> key(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        key[i] = std::llround(x[i] / cache_q_);
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    Field value = fbar_raw(x);
    std::lock_guard<std::mutex> lock(cache_mutex_);
    return cache_.emplace(std::move(key), std::move(value)).first->second;
}

std::size_t FbarBackend::cache_size() const {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    return cache_.size();
}

std::vector<Field> sample_invariant(const models::ModelSpec& m, const Field& x,
                                    const Field& y0, double burn_in, int n_samples,
                                    int thinning, double dt,
                                    const paths::WienerDriver& driver,
                                    std::uint32_t path) {
    if (models::dissipativity_gap(m) <= 0.0)
        throw DissipativityViolated("dissipativity gap is not positive");
    paths::FrozenSystem frozen(m, x, dt, driver);
    Field y = y0;
    const long burn_steps = std::lround(burn_in / dt);
    std::vector<Field> out;
    out.reserve(static_cast<std::size_t>(n_samples));
    long k = 0;
    for (; k < burn_steps; ++k)
        if (!frozen.step(y, k, path))
            throw NonConvergence("frozen trajectory left the guard radius");
    while (static_cast<int>(out.size()) < n_samples) {
        for (int j = 0; j < thinning; ++j, ++k)
            if (!frozen.step(y, k, path))
                throw NonConvergence("frozen trajectory left the guard radius");
        out.push_back(y);
    }
    return out;
}

} // namespace mfw::averaging
