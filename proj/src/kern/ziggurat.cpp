#include "mfw/kern/ziggurat.hpp"

#include <cmath>

namespace mfw::kern {

namespace {

ZigTables build_tables() {
    ZigTables t{};
    const double m = 9223372036854775808.0; // 2^63
    const double vn = 9.91256303526217e-3;
    double dn = kZigR;
    double tn = kZigR;
    double q = vn / std::exp(-0.5 * dn * dn);
    t.kn[0] = static_cast<std::uint64_t>((dn / q) * m);
    t.kn[1] = 0;
    t.wn[0] = q / m;
    t.wn[127] = dn / m;
    t.fn[0] = 1.0;
    t.fn[127] = std::exp(-0.5 * dn * dn);
    for (int i = 126; i >= 1; --i) {
        dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
        t.kn[i + 1] = static_cast<std::uint64_t>((dn / tn) * m);
        tn = dn;
        t.fn[i] = std::exp(-0.5 * dn * dn);
        t.wn[i] = dn / m;
    }
    return t;
}

} // namespace

const ZigTables& zig_tables() {
    static const ZigTables t = build_tables();
    return t;
}

bool zig_attempt(std::uint64_t u, SiteStream& s, double& out) {
    const ZigTables& t = zig_tables();
    const auto hz = static_cast<std::int64_t>(u);
    const unsigned iz = static_cast<unsigned>(u & 127u);
    const double x = static_cast<double>(hz) * t.wn[iz];
    const std::uint64_t mag = hz < 0 ? ~u + 1u : u;
    if (mag < t.kn[iz]) {
        out = x;
        return true;
    }
    if (iz == 0) {
        // base strip: sample the tail beyond r by exponential rejection
        double xx, yy;
        do {
            xx = -std::log(s.next_uniform()) * (1.0 / kZigR);
            yy = -std::log(s.next_uniform());
        } while (yy + yy < xx * xx);
        out = hz > 0 ? kZigR + xx : -(kZigR + xx);
        return true;
    }
    if (t.fn[iz] + s.next_uniform() * (t.fn[iz - 1] - t.fn[iz]) < std::exp(-0.5 * x * x)) {
        out = x;
        return true;
    }
    return false;
}

double normal_draw(SiteStream& s) {
    for (;;) {
        const std::uint64_t u = s.next_u64();
        double v;
        if (zig_attempt(u, s, v)) return v;
    }
}

} // namespace mfw::kern
