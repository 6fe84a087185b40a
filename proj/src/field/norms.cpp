#include "mfw/field/norms.hpp"

#include <cmath>

#include "mfw/field/ops.hpp"
#include "mfw/util/error.hpp"

namespace mfw::field {

double dot_l2(const Field& u, const Field& v) {
    require_same_grid(u, v);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return u.grid().spacing() * s;
}

namespace {

double grad_energy(const Field& u) {
    // sum of squared one-sided differences; Dirichlet grids include the
    // boundary gaps against the zero exterior values
    const Grid& g = u.grid();
    const double ih = 1.0 / g.spacing();
    const std::size_t n = u.size();
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d = u[i + 1] - u[i];
        s += d * d;
    }
    if (g.bc == Bc::Dirichlet) s += u[0] * u[0] + u[n - 1] * u[n - 1];
    return s * ih;
}

} // namespace

double norm(const Field& u, NormKind kind) {
    switch (kind.tag) {
    case NormKind::Tag::L2:
        return std::sqrt(dot_l2(u, u));
    case NormKind::Tag::Lp: {
        if (kind.p < 1.0) throw DomainError("Lp norm requires p >= 1");
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) s += std::pow(std::fabs(u[i]), kind.p);
        return std::pow(u.grid().spacing() * s, 1.0 / kind.p);
    }
    case NormKind::Tag::H1Sobolev:
        return std::sqrt(dot_l2(u, u) + grad_energy(u));
    case NormKind::Tag::Hm1Dual: {
        return std::sqrt(inner(u, u, kind));
    }
    }
    throw DomainError("unknown norm kind");
}

double inner(const Field& u, const Field& v, NormKind kind) {
    require_same_grid(u, v);
    switch (kind.tag) {
    case NormKind::Tag::L2:
        return dot_l2(u, v);
    case NormKind::Tag::Hm1Dual: {
        NegLaplaceSolver inv(u.grid());
        return dot_l2(u, inv.solve(v));
    }
    default:
        throw DomainError("inner product defined only for L2 and Hm1Dual kinds");
    }
}

} // namespace mfw::field
