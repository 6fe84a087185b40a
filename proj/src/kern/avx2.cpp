// AVX2 kernel variants. Compiled with -mavx2 only in this translation
// unit; selection happens at runtime in backend.cpp. Every kernel must be
// bit-identical to the scalar reference, which rules out FMA and any
// reassociated reductions.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "mfw/kern/backend.hpp"
#include "mfw/kern/ziggurat.hpp"

namespace mfw::kern {

namespace {

void axpy_avx2(double* y, double a, const double* x, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d xv = _mm256_loadu_pd(x + i);
        const __m256d yv = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(yv, _mm256_mul_pd(av, xv)));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void axpby_avx2(double* z, double a, const double* x, double b, const double* y,
                std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    const __m256d bv = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d xv = _mm256_loadu_pd(x + i);
        const __m256d yv = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(z + i, _mm256_add_pd(_mm256_mul_pd(av, xv), _mm256_mul_pd(bv, yv)));
    }
    for (; i < n; ++i) z[i] = a * x[i] + b * y[i];
}

void cubic_reaction_avx2(double* out, double c1, double c2, const double* y,
                         std::size_t n) {
    const __m256d c1v = _mm256_set1_pd(c1);
    const __m256d c2v = _mm256_set1_pd(c2);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(y + i);
        const __m256d v3 = _mm256_mul_pd(_mm256_mul_pd(v, v), v);
        _mm256_storeu_pd(out + i,
                         _mm256_sub_pd(_mm256_mul_pd(c1v, v), _mm256_mul_pd(c2v, v3)));
    }
    for (; i < n; ++i) {
        const double v = y[i];
        out[i] = c1 * v - c2 * (v * v * v);
    }
}

void pow_signed_avx2(double* out, const double* x, double r, std::size_t n) {
    if (r == 3.0) {
        std::size_t i = 0;
        for (; i + 4 <= n; i += 4) {
            const __m256d v = _mm256_loadu_pd(x + i);
            _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_mul_pd(v, v), v));
        }
        for (; i < n; ++i) {
            const double v = x[i];
            out[i] = v * v * v;
        }
        return;
    }
    // general exponents go through libm
    scalar_kernels().pow_signed(out, x, r, n);
}

// ---- Philox4x32-10, eight blocks in SoA form --------------------------

struct Philox8State {
    __m256i c0, c1, c2, c3;
};

inline void mulhilo8(__m256i v, std::uint32_t mult, __m256i& lo, __m256i& hi) {
    const __m256i mv = _mm256_set1_epi32(static_cast<int>(mult));
    const __m256i pe = _mm256_mul_epu32(v, mv);                          // lanes 0,2,4,6
    const __m256i po = _mm256_mul_epu32(_mm256_srli_epi64(v, 32), mv);   // lanes 1,3,5,7
    lo = _mm256_blend_epi32(pe, _mm256_slli_epi64(po, 32), 0b10101010);
    hi = _mm256_blend_epi32(_mm256_srli_epi64(pe, 32), po, 0b10101010);
}

inline Philox8State philox8_rounds(Philox8State s, PhiloxKey key) {
    __m256i k0 = _mm256_set1_epi32(static_cast<int>(key.k0));
    __m256i k1 = _mm256_set1_epi32(static_cast<int>(key.k1));
    const __m256i wa = _mm256_set1_epi32(static_cast<int>(kPhiloxW32A));
    const __m256i wb = _mm256_set1_epi32(static_cast<int>(kPhiloxW32B));
    for (int round = 0; round < 10; ++round) {
        __m256i lo0, hi0, lo1, hi1;
        mulhilo8(s.c0, kPhiloxM4x32A, lo0, hi0);
        mulhilo8(s.c2, kPhiloxM4x32B, lo1, hi1);
        const __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(hi1, s.c1), k0);
        const __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(hi0, s.c3), k1);
        s.c0 = n0;
        s.c1 = lo1;
        s.c2 = n2;
        s.c3 = lo0;
        if (round < 9) {
            k0 = _mm256_add_epi32(k0, wa);
            k1 = _mm256_add_epi32(k1, wb);
        }
    }
    return s;
}

void philox8_avx2(PhiloxKey key, const PhiloxCtr* ctrs, std::uint32_t out[8][4]) {
    alignas(32) std::uint32_t buf[4][8];
    for (int lane = 0; lane < 8; ++lane) {
        buf[0][lane] = ctrs[lane].c0;
        buf[1][lane] = ctrs[lane].c1;
        buf[2][lane] = ctrs[lane].c2;
        buf[3][lane] = ctrs[lane].c3;
    }
    Philox8State s{
        _mm256_load_si256(reinterpret_cast<const __m256i*>(buf[0])),
        _mm256_load_si256(reinterpret_cast<const __m256i*>(buf[1])),
        _mm256_load_si256(reinterpret_cast<const __m256i*>(buf[2])),
        _mm256_load_si256(reinterpret_cast<const __m256i*>(buf[3])),
    };
    s = philox8_rounds(s, key);
    _mm256_store_si256(reinterpret_cast<__m256i*>(buf[0]), s.c0);
    _mm256_store_si256(reinterpret_cast<__m256i*>(buf[1]), s.c1);
    _mm256_store_si256(reinterpret_cast<__m256i*>(buf[2]), s.c2);
    _mm256_store_si256(reinterpret_cast<__m256i*>(buf[3]), s.c3);
    for (int lane = 0; lane < 8; ++lane)
        for (int w = 0; w < 4; ++w) out[lane][w] = buf[w][lane];
}

// Round keys are lane-constant; precomputing them keeps the hot loop free
// of the Weyl additions.
struct PhiloxRoundKeys {
    __m256i k0[10];
    __m256i k1[10];
    explicit PhiloxRoundKeys(PhiloxKey key) {
        std::uint32_t a = key.k0, b = key.k1;
        for (int r = 0; r < 10; ++r) {
            k0[r] = _mm256_set1_epi32(static_cast<int>(a));
            k1[r] = _mm256_set1_epi32(static_cast<int>(b));
            a += kPhiloxW32A;
            b += kPhiloxW32B;
        }
    }
};

inline Philox8State philox8_rounds_keyed(Philox8State s, const PhiloxRoundKeys& rk) {
    for (int round = 0; round < 10; ++round) {
        __m256i lo0, hi0, lo1, hi1;
        mulhilo8(s.c0, kPhiloxM4x32A, lo0, hi0);
        mulhilo8(s.c2, kPhiloxM4x32B, lo1, hi1);
        const __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(hi1, s.c1), rk.k0[round]);
        const __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(hi0, s.c3), rk.k1[round]);
        s.c0 = n0;
        s.c1 = lo1;
        s.c2 = n2;
        s.c3 = lo0;
    }
    return s;
}

// exact full-range emulation of _mm256_cvtepi64_pd
inline __m256d int64_to_double(__m256i v) {
    const __m256i magic_lo = _mm256_set1_epi64x(0x4330000000000000ll);   // 2^52
    const __m256i magic_hi = _mm256_set1_epi64x(0x4530000080000000ll);   // 2^84 + 2^63
    const __m256i magic_all = _mm256_set1_epi64x(0x4530000080100000ll);  // 2^84 + 2^63 + 2^52
    const __m256i v_lo = _mm256_blend_epi32(magic_lo, v, 0b01010101);
    __m256i v_hi = _mm256_srli_epi64(v, 32);
    v_hi = _mm256_xor_si256(v_hi, magic_hi);
    const __m256d hi_dbl =
        _mm256_sub_pd(_mm256_castsi256_pd(v_hi), _mm256_castsi256_pd(magic_all));
    return _mm256_add_pd(hi_dbl, _mm256_castsi256_pd(v_lo));
}

inline __m256i cmplt_epu64(__m256i a, __m256i b) {
    const __m256i flip = _mm256_set1_epi64x(static_cast<long long>(0x8000000000000000ull));
    return _mm256_cmpgt_epi64(_mm256_xor_si256(b, flip), _mm256_xor_si256(a, flip));
}

// Vector fast path of the ziggurat acceptance for 4 lanes; rejected lanes
// continue on the scalar slow path of the same per-lane stream. `lanes`
// names the block index feeding each of the 4 positions.
inline void zig4(__m256i uv, const Philox8State& s, const int lanes[4], PhiloxKey key,
                 std::uint32_t channel, std::uint32_t step, std::uint32_t path0,
                 double* out4) {
    const ZigTables& t = zig_tables();
    const __m256i iz = _mm256_and_si256(uv, _mm256_set1_epi64x(127));
    const __m256d wn = _mm256_i64gather_pd(t.wn, iz, 8);
    const __m256i kn =
        _mm256_i64gather_epi64(reinterpret_cast<const long long*>(t.kn), iz, 8);
    const __m256d x = _mm256_mul_pd(int64_to_double(uv), wn);
    const __m256i neg = _mm256_sub_epi64(_mm256_setzero_si256(), uv);
    const __m256i sign = _mm256_cmpgt_epi64(_mm256_setzero_si256(), uv);
    const __m256i mag = _mm256_blendv_epi8(uv, neg, sign);
    const int mask = _mm256_movemask_pd(_mm256_castsi256_pd(cmplt_epu64(mag, kn)));
    _mm256_storeu_pd(out4, x);
    if (mask == 0xF) return;
    alignas(32) std::uint32_t w[4][8];
    _mm256_store_si256(reinterpret_cast<__m256i*>(w[0]), s.c0);
    _mm256_store_si256(reinterpret_cast<__m256i*>(w[1]), s.c1);
    _mm256_store_si256(reinterpret_cast<__m256i*>(w[2]), s.c2);
    _mm256_store_si256(reinterpret_cast<__m256i*>(w[3]), s.c3);
    alignas(32) std::uint64_t u[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(u), uv);
    for (int j = 0; j < 4; ++j) {
        if (mask & (1 << j)) continue;
        const int lane = lanes[j];
        // word 0 of block 0 was consumed by the fast path
        SiteStream st{key, channel, step, path0 + static_cast<std::uint32_t>(lane), 1,
                      PhiloxBlock{{w[0][lane], w[1][lane], w[2][lane], w[3][lane]}}};
        double v;
        if (!zig_attempt(u[j], st, v)) v = normal_draw(st);
        out4[j] = v;
    }
}

void normal8_avx2(PhiloxKey key, std::uint32_t channel, std::uint32_t step,
                  std::uint32_t path0, double* out8) {
    const PhiloxRoundKeys rk(key);
    Philox8State s{
        _mm256_setzero_si256(),
        _mm256_set1_epi32(static_cast<int>(channel)),
        _mm256_set1_epi32(static_cast<int>(step)),
        _mm256_add_epi32(_mm256_set1_epi32(static_cast<int>(path0)),
                         _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7)),
    };
    s = philox8_rounds_keyed(s, rk);
    // interleave words 0 and 1 into per-block low u64s
    const __m256i uA = _mm256_unpacklo_epi32(s.c0, s.c1); // blocks 0,1,4,5
    const __m256i uB = _mm256_unpackhi_epi32(s.c0, s.c1); // blocks 2,3,6,7
    static constexpr int lanesA[4] = {0, 1, 4, 5};
    static constexpr int lanesB[4] = {2, 3, 6, 7};
    double tmpA[4], tmpB[4];
    zig4(uA, s, lanesA, key, channel, step, path0, tmpA);
    zig4(uB, s, lanesB, key, channel, step, path0, tmpB);
    out8[0] = tmpA[0];
    out8[1] = tmpA[1];
    out8[4] = tmpA[2];
    out8[5] = tmpA[3];
    out8[2] = tmpB[0];
    out8[3] = tmpB[1];
    out8[6] = tmpB[2];
    out8[7] = tmpB[3];
}

} // namespace

const Kernels& avx2_kernels() {
    static const Kernels k{
        "avx2",          axpy_avx2,   axpby_avx2,  cubic_reaction_avx2,
        pow_signed_avx2, philox8_avx2, normal8_avx2,
    };
    return k;
}

} // namespace mfw::kern

#endif // x86-64
