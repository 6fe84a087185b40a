#pragma once

#include <cstddef>

namespace mfw::field {

enum class Bc { Dirichlet, Neumann };

// Uniform 1D grid of interior nodes. Dirichlet grids are vertex-centred
// with zero boundary values one spacing outside; Neumann grids are
// cell-centred with mirrored ghosts.
struct Grid {
    int n_interior = 0;
    double length = 0.0;
    Bc bc = Bc::Dirichlet;

    double spacing() const {
        return bc == Bc::Dirichlet ? length / (n_interior + 1) : length / n_interior;
    }

    bool operator==(const Grid&) const = default;

    static Grid dirichlet(int n, double len);
    static Grid neumann(int n, double len);
};

// Eigenvalue of -Laplacian for the grid's closure, mode = 1..n_interior,
// ascending.
double laplace_eigenvalue(const Grid& g, int mode);

} // namespace mfw::field
