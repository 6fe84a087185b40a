#pragma once

#include <span>

#include "mfw/field/field.hpp"
#include "mfw/field/ops.hpp"
#include "mfw/models/specs.hpp"

namespace mfw::models {

// Psi(s) = |s|^{r-1} s applied pointwise.
field::Field psi(const SlowOperatorSpec& spec, const field::Field& u);

// CH potential phi(s) = a s^3 + b s and its derivative.
inline double phi_pot(const SlowOperatorSpec& s, double x) {
    return s.pot_a * x * x * x + s.pot_b * x;
}
inline double phi_pot_prime(const SlowOperatorSpec& s, double x) {
    return 3.0 * s.pot_a * x * x + s.pot_b;
}

field::Field slow_drift(const ModelSpec& m, const field::Field& u);

// Duality pairing <A1(u), v> in the variant's triple.
double slow_pair(const ModelSpec& m, const field::Field& u, const field::Field& v);

// ||A1(u)||_{V1*}, per-variant Riesz representation.
double slow_drift_dual_norm(const ModelSpec& m, const field::Field& u);

// ||u||_{V1} for the variant's triple.
double slow_v_norm(const ModelSpec& m, const field::Field& u);

field::Field fast_drift(const ModelSpec& m, const field::Field& x, const field::Field& y);

double fast_pair(const ModelSpec& m, const field::Field& x, const field::Field& y,
                 const field::Field& v);

double fast_drift_dual_norm(const ModelSpec& m, const field::Field& x,
                            const field::Field& y);

// Pointwise coupling evaluated onto out_grid (f maps into the slow space,
// g into the fast space; both act nodewise).
field::Field coupling_apply(const CouplingSpec& c, const field::Field& x,
                            const field::Field& y, const field::Grid& out_grid);

double noise_multiplier(const NoiseSpec& spec, const field::Field& state,
                        field::NormKind hkind);

// Sum_k b_k z_k e_k scaled by the state multiplier.
field::Field noise_apply(const NoiseSpec& spec, const field::Field& state,
                         field::NormKind hkind, std::span<const double> z);

// multiplier^2 * sum b_k^2 (modes are L2-orthonormal).
double noise_hs_norm_sq(const NoiseSpec& spec, const field::Field& state,
                        field::NormKind hkind);

// Dissipativity gap 2*lambda1 - 2*Lg - L_B2^2 of the fast model, with the
// discrete smallest eigenvalue of -Laplacian on the fast grid.
double dissipativity_gap(const ModelSpec& m);

// --- IMEX split of the slow operator -----------------------------------
// A1 = L_implicit + explicit remainder. The stiff linear part (a*lap,
// nu*lap, or -lap^2) is treated implicitly by all time steppers; the
// remainder is integrated explicitly.

// explicit remainder evaluated at x (tmp is caller-provided scratch)
void slow_explicit_drift(const ModelSpec& m, const field::Field& x, field::Field& out,
                         field::Field& tmp);

// action of the transposed Jacobian of the explicit remainder on lam
void slow_explicit_jacobian_t(const ModelSpec& m, const field::Field& x,
                              const field::Field& lam, field::Field& out,
                              field::Field& tmp);

// prefactored solver for (I - dt * L_implicit); the operator is symmetric,
// so transpose solves coincide with solves
class SlowImplicit {
public:
    SlowImplicit() = default;
    SlowImplicit(const ModelSpec& m, double dt);
    field::Field solve(const field::Field& rhs) const;
    void solve(std::span<const double> rhs, std::span<double> x) const;

private:
    bool ch_ = false;
    field::ShiftedLaplaceSolver lin_;
    field::BilaplaceSolver penta_;
    field::Grid grid_{};
};

// Declared Lipschitz constant of the fast noise map in y.
double fast_noise_lipschitz_y(const ModelSpec& m);

} // namespace mfw::models
