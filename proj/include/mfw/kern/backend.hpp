#pragma once

// Runtime-dispatched arithmetic kernels. Every entry has a scalar
// reference implementation; SIMD variants (AVX2 on x86-64, NEON on
// aarch64) are selected at startup when the CPU supports them and must be
// bit-identical to the reference. Set MFW_FORCE_SCALAR=1 to pin the
// reference backend.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mfw/kern/philox.hpp"

namespace mfw::kern {

struct Kernels {
    const char* name;

    // y[i] += a * x[i]
    void (*axpy)(double* y, double a, const double* x, std::size_t n);
    // z[i] = a * x[i] + b * y[i]
    void (*axpby)(double* z, double a, const double* x, double b, const double* y,
                  std::size_t n);
    // out[i] = c1 * y[i] - c2 * y[i]^3
    void (*cubic_reaction)(double* out, double c1, double c2, const double* y,
                           std::size_t n);
    // out[i] = |x[i]|^(r-1) * x[i]
    void (*pow_signed)(double* out, const double* x, double r, std::size_t n);
    // eight independent blocks, counters given per lane
    void (*philox8)(PhiloxKey key, const PhiloxCtr* ctrs, std::uint32_t out[8][4]);
    // one standard normal per path for paths path0..path0+7 at a fixed
    // (channel, step); lane i must equal normal_scalar(key, channel, step,
    // path0 + i) bit for bit
    void (*normal8)(PhiloxKey key, std::uint32_t channel, std::uint32_t step,
                    std::uint32_t path0, double* out8);
};

const Kernels& scalar_kernels();

// The backend picked for this process (CPU detection + MFW_FORCE_SCALAR).
const Kernels& active();

// All backends usable on this machine, reference first.
std::vector<const Kernels*> available();

} // namespace mfw::kern
