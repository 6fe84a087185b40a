#pragma once

#include <vector>

#include "mfw/field/field.hpp"
#include "mfw/models/specs.hpp"
#include "mfw/paths/driver.hpp"

namespace mfw::averaging {

struct ErgodicityFit {
    double rate_hat = 0.0;
    double prefactor_hat = 0.0;
    double r2 = 0.0;
    bool degenerate = false; // signal hit the MC noise floor before one e-fold
    std::vector<double> t;
    std::vector<double> distance; // || E f(x, Y_t) - fbar ||_L2
    std::vector<double> se;       // noise-floor scale of the estimate
};

// Monte Carlo estimate of E f(x, Y_t) on a time grid, with a linear fit of
// log distance against t on the window above the noise floor.
ErgodicityFit ergodicity_decay(const models::ModelSpec& m, const field::Field& x,
                               const field::Field& y0, const field::Field& fbar_value,
                               double horizon, double dt, int n_paths, int record_stride,
                               const paths::WienerDriver& driver);

} // namespace mfw::averaging
