#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mfw/field/grid.hpp"
#include "mfw/kern/backend.hpp"
#include "mfw/util/error.hpp"

namespace mfw::field {

// Grid function, immutable by convention once published: all public
// operations return fresh Fields.
class Field {
public:
    Field() = default;
    explicit Field(const Grid& g) : grid_(g), v_(static_cast<std::size_t>(g.n_interior), 0.0) {}
    Field(const Grid& g, std::vector<double> values) : grid_(g), v_(std::move(values)) {
        if (v_.size() != static_cast<std::size_t>(g.n_interior))
            throw DomainError("field length does not match grid");
    }

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return v_.size(); }
    double operator[](std::size_t i) const { return v_[i]; }
    double& operator[](std::size_t i) { return v_[i]; }
    const double* data() const { return v_.data(); }
    double* data() { return v_.data(); }
    std::span<const double> values() const { return v_; }
    std::span<double> values() { return v_; }

private:
    Grid grid_{};
    std::vector<double> v_;
};

inline void require_same_grid(const Field& a, const Field& b) {
    if (!(a.grid() == b.grid())) throw DomainError("fields live on different grids");
}

inline Field axpby(double a, const Field& x, double b, const Field& y) {
    require_same_grid(x, y);
    Field z(x.grid());
    kern::active().axpby(z.data(), a, x.data(), b, y.data(), z.size());
    return z;
}

inline Field operator+(const Field& x, const Field& y) { return axpby(1.0, x, 1.0, y); }
inline Field operator-(const Field& x, const Field& y) { return axpby(1.0, x, -1.0, y); }

inline Field operator*(double a, const Field& x) {
    Field z(x.grid());
    kern::active().axpby(z.data(), a, x.data(), 0.0, x.data(), z.size());
    return z;
}

} // namespace mfw::field
