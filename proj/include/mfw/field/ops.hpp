#pragma once

#include <span>
#include <vector>

#include "mfw/field/field.hpp"
#include "mfw/field/grid.hpp"

namespace mfw::field {

// Second-difference Laplacian with the grid's boundary closure.
void laplacian_into(const Grid& g, std::span<const double> u, std::span<double> out);
Field laplacian(const Field& u);

// Laplacian applied twice (Neumann closure on u and on laplacian(u)).
void bilaplacian_into(const Grid& g, std::span<const double> u, std::span<double> out,
                      std::span<double> scratch);
Field bilaplacian(const Field& u);

// k-th L2-normalised eigenmode of the grid Laplacian, k = 1..n_interior.
Field eigenmode(const Grid& g, int mode);

// Solves (I - c * Laplacian) x = b; the factorisation is reused across
// solves. c >= 0 keeps the matrix positive definite.
class ShiftedLaplaceSolver {
public:
    ShiftedLaplaceSolver() = default;
    ShiftedLaplaceSolver(const Grid& g, double c);
    void solve(std::span<const double> b, std::span<double> x) const;
    Field solve(const Field& b) const;

private:
    Grid grid_{};
    double c_ = 0.0;
    std::vector<double> diag_;  // factored pivots
    std::vector<double> lower_; // multipliers
};

// Solves (-Laplacian) x = b on a Dirichlet grid (used by the dual norm).
class NegLaplaceSolver {
public:
    NegLaplaceSolver() = default;
    explicit NegLaplaceSolver(const Grid& g);
    void solve(std::span<const double> b, std::span<double> x) const;
    Field solve(const Field& b) const;

private:
    Grid grid_{};
    std::vector<double> diag_;
    std::vector<double> lower_;
};

// Solves (I + c * Laplacian^2) x = b with the Neumann closure; banded
// Cholesky with bandwidth 2.
class BilaplaceSolver {
public:
    BilaplaceSolver() = default;
    BilaplaceSolver(const Grid& g, double c);
    void solve(std::span<const double> b, std::span<double> x) const;
    Field solve(const Field& b) const;

private:
    Grid grid_{};
    int n_ = 0;
    std::vector<double> band_; // lower factor, 3 diagonals, row-major
};

} // namespace mfw::field
