#pragma once

#include <cmath>
#include <vector>

#include "mfw/field/grid.hpp"
#include "mfw/field/norms.hpp"

namespace mfw::models {

enum class SlowVariant { PorousMedium, CahnHilliard, LinearDiagnostic };

struct SlowOperatorSpec {
    SlowVariant variant = SlowVariant::LinearDiagnostic;
    double r = 3.0;      // porous medium: Psi(s) = |s|^{r-1} s
    double pot_a = 1.0;  // Cahn-Hilliard potential a*s^3 + b*s
    double pot_b = -1.0;
    double a = 1.0;      // linear diagnostic diffusivity
    // implicit shift nu for the porous-medium IMEX split; defaults to
    // Psi'(1) = r when <= 0
    double stabilization = -1.0;

    double pm_stab() const { return stabilization > 0.0 ? stabilization : r; }
};

enum class CouplingVariant { Affine, BoundedLip };

// Pointwise coupling map (x, y) -> value. Affine: c + gx*x + gy*y.
// BoundedLip: gain * sin(y).
struct CouplingSpec {
    CouplingVariant variant = CouplingVariant::Affine;
    double f0_const = 0.0;
    double gain_x = 0.0;
    double gain_y = 0.0;
    double gain = 0.0;

    double lipschitz_y() const {
        return variant == CouplingVariant::Affine ? std::fabs(gain_y) : std::fabs(gain);
    }
    double lipschitz_x() const {
        return variant == CouplingVariant::Affine ? std::fabs(gain_x) : 0.0;
    }
    bool is_affine() const { return variant == CouplingVariant::Affine; }
    bool depends_on_y() const { return lipschitz_y() != 0.0; }
};

struct FastOperatorSpec {
    double c1 = 0.0;
    double c2 = 0.0;
    CouplingSpec g;
    double lg() const { return g.lipschitz_y(); }
};

enum class NoiseDependence { Additive, LinearClipped };

struct NoiseSpec {
    int n_modes = 1;
    std::vector<double> mode_coeffs;
    NoiseDependence dependence = NoiseDependence::Additive;
    double slope = 0.0;
    double cap = 1.0;

    double coeff_sq_sum() const {
        double s = 0.0;
        for (double b : mode_coeffs) s += b * b;
        return s;
    }
};

struct ModelSpec {
    field::Grid slow_grid;
    field::Grid fast_grid;
    SlowOperatorSpec slow;
    CouplingSpec f; // the slow-equation coupling
    FastOperatorSpec fast;
    NoiseSpec noise_slow;
    NoiseSpec noise_fast;

    void validate() const;

    // Gelfand-triple bookkeeping for the slow variant
    field::NormKind h_kind() const {
        return slow.variant == SlowVariant::PorousMedium ? field::NormKind::hm1()
                                                         : field::NormKind::l2();
    }
    double alpha1() const {
        return slow.variant == SlowVariant::PorousMedium ? slow.r + 1.0 : 2.0;
    }
    bool linear_fast() const { return fast.c2 == 0.0 && fast.g.is_affine(); }
};

} // namespace mfw::models
