#pragma once

#include <optional>
#include <span>
#include <vector>

namespace mfw::skeleton {

// Piecewise-constant control in the truncated noise space U = U1 x U2,
// stored per time step as [slow modes | fast modes].
class Control {
public:
    Control() = default;
    Control(int slow_dim, int fast_dim, long n_steps)
        : slow_dim_(slow_dim), fast_dim_(fast_dim), n_steps_(n_steps),
          values_(static_cast<std::size_t>(n_steps) * static_cast<std::size_t>(slow_dim + fast_dim),
                  0.0) {}

    int slow_dim() const { return slow_dim_; }
    int fast_dim() const { return fast_dim_; }
    int dim() const { return slow_dim_ + fast_dim_; }
    long n_steps() const { return n_steps_; }

    std::span<double> at_step(long k) {
        return {values_.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(dim()),
                static_cast<std::size_t>(dim())};
    }
    std::span<const double> at_step(long k) const {
        return {values_.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(dim()),
                static_cast<std::size_t>(dim())};
    }
    std::span<const double> slow_at(long k) const {
        return at_step(k).subspan(0, static_cast<std::size_t>(slow_dim_));
    }
    std::span<const double> fast_at(long k) const {
        return at_step(k).subspan(static_cast<std::size_t>(slow_dim_),
                                  static_cast<std::size_t>(fast_dim_));
    }

    std::span<double> raw() { return values_; }
    std::span<const double> raw() const { return values_; }

    // integral of ||phi_t||_U^2 over [0, T]
    double energy(double dt) const;

    // membership of the level set S_M; throws when the energy exceeds M
    void validate_bound(double dt) const;

    std::optional<double> bound_M;

private:
    int slow_dim_ = 0;
    int fast_dim_ = 0;
    long n_steps_ = 0;
    std::vector<double> values_;
};

} // namespace mfw::skeleton
