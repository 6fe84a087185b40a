#include <cmath>
#include <cstddef>

#include "mfw/kern/backend.hpp"
#include "mfw/kern/ziggurat.hpp"

namespace mfw::kern {

namespace {

void axpy_scalar(double* y, double a, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void axpby_scalar(double* z, double a, const double* x, double b, const double* y,
                  std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) z[i] = a * x[i] + b * y[i];
}

void cubic_reaction_scalar(double* out, double c1, double c2, const double* y,
                           std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double v = y[i];
        out[i] = c1 * v - c2 * (v * v * v);
    }
}

void pow_signed_scalar(double* out, const double* x, double r, std::size_t n) {
    if (r == 3.0) {
        for (std::size_t i = 0; i < n; ++i) {
            const double v = x[i];
            out[i] = v * v * v;
        }
        return;
    }
    if (r == 1.0) {
        for (std::size_t i = 0; i < n; ++i) out[i] = x[i];
        return;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double v = x[i];
        out[i] = v == 0.0 ? 0.0 : std::copysign(std::pow(std::fabs(v), r), v);
    }
}

void philox8_scalar(PhiloxKey key, const PhiloxCtr* ctrs, std::uint32_t out[8][4]) {
    for (int lane = 0; lane < 8; ++lane) {
        const PhiloxBlock b = philox4x32(ctrs[lane], key);
        for (int w = 0; w < 4; ++w) out[lane][w] = b.w[w];
    }
}

void normal8_scalar(PhiloxKey key, std::uint32_t channel, std::uint32_t step,
                    std::uint32_t path0, double* out8) {
    for (std::uint32_t lane = 0; lane < 8; ++lane)
        out8[lane] = normal_scalar(key, channel, step, path0 + lane);
}

} // namespace

const Kernels& scalar_kernels() {
    static const Kernels k{
        "scalar",        axpy_scalar,   axpby_scalar, cubic_reaction_scalar,
        pow_signed_scalar, philox8_scalar, normal8_scalar,
    };
    return k;
}

} // namespace mfw::kern
