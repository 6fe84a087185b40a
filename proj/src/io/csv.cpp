#include "mfw/io/csv.hpp"

#include <cstdio>
#include <fstream>

#include "mfw/util/error.hpp"

namespace mfw::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary); // fixed newline convention
    if (!out) throw DomainError("cannot open output file: " + path);
    return out;
}

} // namespace

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out = open_out(path);
    for (std::size_t c = 0; c < columns.size(); ++c)
        out << (c ? "," : "") << columns[c];
    out << "\n";
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < r.size(); ++c)
            out << (c ? "," : "") << format_double(r[c]);
        out << "\n";
    }
}

void write_scaling_table(const std::string& path, const ldp::ScalingTable& t) {
    write_csv(path, t.columns, t.rows);
}

void write_trajectory(const std::string& path, const paths::Trajectory& traj) {
    std::ofstream out = open_out(path);
    const bool has_x = !traj.x.empty();
    const bool has_y = !traj.y.empty();
    out << "t";
    if (has_x)
        for (std::size_t i = 0; i < traj.x.front().size(); ++i) out << ",x" << i;
    if (has_y)
        for (std::size_t i = 0; i < traj.y.front().size(); ++i) out << ",y" << i;
    out << "\n";
    for (std::size_t k = 0; k < traj.t.size(); ++k) {
        out << format_double(traj.t[k]);
        if (has_x)
            for (std::size_t i = 0; i < traj.x[k].size(); ++i)
                out << "," << format_double(traj.x[k][i]);
        if (has_y)
            for (std::size_t i = 0; i < traj.y[k].size(); ++i)
                out << "," << format_double(traj.y[k][i]);
        out << "\n";
    }
}

} // namespace mfw::io
