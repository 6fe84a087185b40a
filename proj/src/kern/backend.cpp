#include "mfw/kern/backend.hpp"

#include <cstdlib>

namespace mfw::kern {

#if defined(__x86_64__) || defined(_M_X64)
const Kernels& avx2_kernels();
#endif
#if defined(__aarch64__)
const Kernels& neon_kernels();
#endif

namespace {

bool force_scalar() {
    const char* env = std::getenv("MFW_FORCE_SCALAR");
    return env != nullptr && env[0] == '1';
}

const Kernels* detect() {
    if (force_scalar()) return &scalar_kernels();
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2")) return &avx2_kernels();
#endif
#if defined(__aarch64__)
    return &neon_kernels();
#endif
    return &scalar_kernels();
}

} // namespace

const Kernels& active() {
    static const Kernels* k = detect();
    return *k;
}

std::vector<const Kernels*> available() {
    std::vector<const Kernels*> v{&scalar_kernels()};
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2")) v.push_back(&avx2_kernels());
#endif
#if defined(__aarch64__)
    v.push_back(&neon_kernels());
#endif
    return v;
}

} // namespace mfw::kern
