#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include "deq/dynamics.hpp"

namespace deq {

/// Shortest exact decimal form of a double (17 significant digits), so CSV
/// output is byte-stable and round-trips.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// One schema serves both models: columns t, theta_1..theta_{d+1} (the last
/// theta column is the self-coupling), risk, w, r, grad_norm_sq,
/// phi_1..phi_d. phi columns are left empty for nonlinear runs.
inline void write_trajectory_csv(const Trajectory& traj, int d, std::ostream& os) {
    os << "t";
    for (int i = 1; i <= d + 1; ++i) os << ",theta_" << i;
    os << ",risk,w,r,grad_norm_sq";
    for (int i = 1; i <= d; ++i) os << ",phi_" << i;
    os << "\n";
    const bool has_phi = !traj.phi.empty();
    for (std::size_t row = 0; row < traj.size(); ++row) {
        os << format_double(traj.times[row]);
        const Vector flat = traj.params[row].flat();
        for (Eigen::Index i = 0; i < flat.size(); ++i) os << ',' << format_double(flat(i));
        os << ',' << format_double(traj.risk[row]) << ',' << format_double(traj.w[row]) << ','
           << format_double(traj.r[row]) << ',' << format_double(traj.grad_norm_sq[row]);
        for (int i = 0; i < d; ++i) {
            os << ',';
            if (has_phi) os << format_double(traj.phi[row](i));
        }
        os << "\n";
    }
}

inline void write_trajectory_csv(const Trajectory& traj, int d, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot open for writing: " + path);
    write_trajectory_csv(traj, d, os);
}

}  // namespace deq
