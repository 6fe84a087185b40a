#include "mfw/field/grid.hpp"

#include <cmath>

#include "mfw/util/error.hpp"

namespace mfw::field {

namespace {

Grid make(int n, double len, Bc bc) {
    if (n < 2) throw ConfigError("grid.n_interior", "must be >= 2");
    if (!(len > 0.0)) throw ConfigError("grid.length", "must be > 0");
    return Grid{n, len, bc};
}

} // namespace

Grid Grid::dirichlet(int n, double len) { return make(n, len, Bc::Dirichlet); }
Grid Grid::neumann(int n, double len) { return make(n, len, Bc::Neumann); }

double laplace_eigenvalue(const Grid& g, int mode) {
    const double h = g.spacing();
    const int n = g.n_interior;
    if (g.bc == Bc::Dirichlet) {
        const double theta = M_PI * mode / (n + 1);
        return 2.0 / (h * h) * (1.0 - std::cos(theta));
    }
    const double theta = M_PI * (mode - 1) / n;
    return 2.0 / (h * h) * (1.0 - std::cos(theta));
}

} // namespace mfw::field
