#pragma once

#include <string>
#include <vector>

#include "mfw/ldp/experiments.hpp"
#include "mfw/paths/stepper.hpp"

namespace mfw::io {

// Floats are serialised with 17 significant digits so files round-trip
// bit-exactly.
std::string format_double(double v);

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

void write_scaling_table(const std::string& path, const ldp::ScalingTable& t);

// columns: t, node values of x (and y when present)
void write_trajectory(const std::string& path, const paths::Trajectory& traj);

} // namespace mfw::io
