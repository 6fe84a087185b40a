// NEON kernel variants for aarch64. Elementwise ops only; the RNG path
// uses the scalar reference on this architecture.

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cstddef>

#include "mfw/kern/backend.hpp"

namespace mfw::kern {

namespace {

void axpy_neon(double* y, double a, const double* x, std::size_t n) {
    const float64x2_t av = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t xv = vld1q_f64(x + i);
        const float64x2_t yv = vld1q_f64(y + i);
        vst1q_f64(y + i, vaddq_f64(yv, vmulq_f64(av, xv)));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void axpby_neon(double* z, double a, const double* x, double b, const double* y,
                std::size_t n) {
    const float64x2_t av = vdupq_n_f64(a);
    const float64x2_t bv = vdupq_n_f64(b);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t xv = vld1q_f64(x + i);
        const float64x2_t yv = vld1q_f64(y + i);
        vst1q_f64(z + i, vaddq_f64(vmulq_f64(av, xv), vmulq_f64(bv, yv)));
    }
    for (; i < n; ++i) z[i] = a * x[i] + b * y[i];
}

void cubic_reaction_neon(double* out, double c1, double c2, const double* y,
                         std::size_t n) {
    const float64x2_t c1v = vdupq_n_f64(c1);
    const float64x2_t c2v = vdupq_n_f64(c2);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t v = vld1q_f64(y + i);
        const float64x2_t v3 = vmulq_f64(vmulq_f64(v, v), v);
        vst1q_f64(out + i, vsubq_f64(vmulq_f64(c1v, v), vmulq_f64(c2v, v3)));
    }
    for (; i < n; ++i) {
        const double v = y[i];
        out[i] = c1 * v - c2 * (v * v * v);
    }
}

void pow_signed_neon(double* out, const double* x, double r, std::size_t n) {
    if (r == 3.0) {
        std::size_t i = 0;
        for (; i + 2 <= n; i += 2) {
            const float64x2_t v = vld1q_f64(x + i);
            vst1q_f64(out + i, vmulq_f64(vmulq_f64(v, v), v));
        }
        for (; i < n; ++i) {
            const double v = x[i];
            out[i] = v * v * v;
        }
        return;
    }
    scalar_kernels().pow_signed(out, x, r, n);
}

} // namespace

const Kernels& neon_kernels() {
    static const Kernels k{
        "neon",
        axpy_neon,
        axpby_neon,
        cubic_reaction_neon,
        pow_signed_neon,
        scalar_kernels().philox8,
        scalar_kernels().normal8,
    };
    return k;
}

} // namespace mfw::kern

#endif // __aarch64__
