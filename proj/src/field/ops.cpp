#include "mfw/field/ops.hpp"

#include <cmath>
#include <cstddef>

#include "mfw/util/error.hpp"

namespace mfw::field {

void laplacian_into(const Grid& g, std::span<const double> u, std::span<double> out) {
    const std::size_t n = static_cast<std::size_t>(g.n_interior);
    const double ih2 = 1.0 / (g.spacing() * g.spacing());
    if (g.bc == Bc::Dirichlet) {
        out[0] = (u[1] - 2.0 * u[0]) * ih2;
        for (std::size_t i = 1; i + 1 < n; ++i)
            out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * ih2;
        out[n - 1] = (u[n - 2] - 2.0 * u[n - 1]) * ih2;
    } else {
        out[0] = (u[1] - u[0]) * ih2;
        for (std::size_t i = 1; i + 1 < n; ++i)
            out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * ih2;
        out[n - 1] = (u[n - 2] - u[n - 1]) * ih2;
    }
}

Field laplacian(const Field& u) {
    Field out(u.grid());
    laplacian_into(u.grid(), u.values(), out.values());
    return out;
}

void bilaplacian_into(const Grid& g, std::span<const double> u, std::span<double> out,
                      std::span<double> scratch) {
    laplacian_into(g, u, scratch);
    laplacian_into(g, scratch, out);
}

Field bilaplacian(const Field& u) {
    Field out(u.grid());
    std::vector<double> scratch(u.size());
    bilaplacian_into(u.grid(), u.values(), out.values(), scratch);
    return out;
}

Field eigenmode(const Grid& g, int mode) {
    if (mode < 1 || mode > g.n_interior) throw DomainError("eigenmode index out of range");
    const int n = g.n_interior;
    Field e(g);
    if (g.bc == Bc::Dirichlet) {
        const double amp = std::sqrt(2.0 / g.length);
        for (int i = 0; i < n; ++i)
            e[i] = amp * std::sin(M_PI * mode * (i + 1.0) / (n + 1.0));
    } else if (mode == 1) {
        const double amp = std::sqrt(1.0 / g.length);
        for (int i = 0; i < n; ++i) e[i] = amp;
    } else {
        const double amp = std::sqrt(2.0 / g.length);
        for (int i = 0; i < n; ++i)
            e[i] = amp * std::cos(M_PI * (mode - 1) * (i + 0.5) / n);
    }
    return e;
}

namespace {

// Symmetric tridiagonal factorisation with constant off-diagonal.
void factor_tridiag(std::span<const double> diag, double off, std::vector<double>& piv,
                    std::vector<double>& lower) {
    const std::size_t n = diag.size();
    piv.resize(n);
    lower.assign(n, 0.0);
    piv[0] = diag[0];
    for (std::size_t i = 1; i < n; ++i) {
        lower[i] = off / piv[i - 1];
        piv[i] = diag[i] - lower[i] * off;
    }
}

void solve_tridiag(const std::vector<double>& piv, const std::vector<double>& lower,
                   double off, std::span<const double> b, std::span<double> x) {
    const std::size_t n = piv.size();
    x[0] = b[0];
    for (std::size_t i = 1; i < n; ++i) x[i] = b[i] - lower[i] * x[i - 1];
    x[n - 1] /= piv[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (x[i] - off * x[i + 1]) / piv[i];
}

} // namespace

ShiftedLaplaceSolver::ShiftedLaplaceSolver(const Grid& g, double c) : grid_(g), c_(c) {
    const std::size_t n = static_cast<std::size_t>(g.n_interior);
    const double ih2 = 1.0 / (g.spacing() * g.spacing());
    std::vector<double> diag(n, 1.0 + 2.0 * c * ih2);
    if (g.bc == Bc::Neumann) {
        diag.front() = 1.0 + c * ih2;
        diag.back() = 1.0 + c * ih2;
    }
    factor_tridiag(diag, -c * ih2, diag_, lower_);
}

void ShiftedLaplaceSolver::solve(std::span<const double> b, std::span<double> x) const {
    const double ih2 = 1.0 / (grid_.spacing() * grid_.spacing());
    solve_tridiag(diag_, lower_, -c_ * ih2, b, x);
}

Field ShiftedLaplaceSolver::solve(const Field& b) const {
    Field x(grid_);
    solve(b.values(), x.values());
    return x;
}

NegLaplaceSolver::NegLaplaceSolver(const Grid& g) : grid_(g) {
    if (g.bc != Bc::Dirichlet)
        throw DomainError("dual norm requires Dirichlet Laplacian");
    const std::size_t n = static_cast<std::size_t>(g.n_interior);
    const double ih2 = 1.0 / (g.spacing() * g.spacing());
    std::vector<double> diag(n, 2.0 * ih2);
    factor_tridiag(diag, -ih2, diag_, lower_);
}

void NegLaplaceSolver::solve(std::span<const double> b, std::span<double> x) const {
    const double ih2 = 1.0 / (grid_.spacing() * grid_.spacing());
    solve_tridiag(diag_, lower_, -ih2, b, x);
}

Field NegLaplaceSolver::solve(const Field& b) const {
    Field x(grid_);
    solve(b.values(), x.values());
    return x;
}

BilaplaceSolver::BilaplaceSolver(const Grid& g, double c) : grid_(g), n_(g.n_interior) {
    const int n = n_;
    const double ih2 = 1.0 / (g.spacing() * g.spacing());
    // rows of the Neumann Laplacian as (sub, diag, super)
    auto arow = [&](int i, int j) -> double {
        if (j < 0 || j >= n) return 0.0;
        if (i == j) return ((i == 0 || i == n - 1) ? -1.0 : -2.0) * ih2;
        if (j == i - 1 || j == i + 1) return ih2;
        return 0.0;
    };
    // M = I + c * A^2, pentadiagonal, SPD
    auto mval = [&](int i, int j) -> double {
        double s = 0.0;
        for (int k = i - 1; k <= i + 1; ++k) s += arow(i, k) * arow(k, j);
        return (i == j ? 1.0 : 0.0) + c * s;
    };
    // banded Cholesky, lower bandwidth 2; band_[3*i + d] = L[i][i-d]
    band_.assign(static_cast<std::size_t>(3 * n), 0.0);
    auto L = [&](int i, int j) -> double& { return band_[static_cast<std::size_t>(3 * i + (i - j))]; };
    for (int j = 0; j < n; ++j) {
        double s = mval(j, j);
        for (int k = std::max(0, j - 2); k < j; ++k) s -= L(j, k) * L(j, k);
        if (s <= 0.0) throw DomainError("bilaplacian system not positive definite");
        L(j, j) = std::sqrt(s);
        for (int i = j + 1; i <= std::min(n - 1, j + 2); ++i) {
            double t = mval(i, j);
            for (int k = std::max(0, i - 2); k < j; ++k) t -= L(i, k) * L(j, k);
            L(i, j) = t / L(j, j);
        }
    }
}

void BilaplaceSolver::solve(std::span<const double> b, std::span<double> x) const {
    const int n = n_;
    auto L = [&](int i, int j) -> double {
        return band_[static_cast<std::size_t>(3 * i + (i - j))];
    };
    for (int i = 0; i < n; ++i) {
        double s = b[static_cast<std::size_t>(i)];
        for (int j = std::max(0, i - 2); j < i; ++j) s -= L(i, j) * x[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(i)] = s / L(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = x[static_cast<std::size_t>(i)];
        for (int j = i + 1; j <= std::min(n - 1, i + 2); ++j)
            s -= L(j, i) * x[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(i)] = s / L(i, i);
    }
}

Field BilaplaceSolver::solve(const Field& b) const {
    Field x(grid_);
    solve(b.values(), x.values());
    return x;
}

} // namespace mfw::field
