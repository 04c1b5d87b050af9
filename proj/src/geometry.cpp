#include "leobeam/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace leobeam::geom {

namespace {

Vec3 sat_inertial(const OrbitShell& shell, int plane, int slot, double time_s) {
    const double a = shell.orbit_radius_m();
    const double raan = 2.0 * M_PI * plane / shell.plane_count;
    const double u = shell.epoch0_phase +
                     2.0 * M_PI * slot / shell.sats_per_plane +
                     2.0 * M_PI * shell.walker_phasing * plane /
                         static_cast<double>(shell.count()) +
                     shell.mean_motion_rad_s() * time_s;
    const double co = std::cos(raan);
    const double so = std::sin(raan);
    const double ci = std::cos(shell.inclination_rad);
    const double si = std::sin(shell.inclination_rad);
    const double cu = std::cos(u);
    const double su = std::sin(u);
    return {a * (co * cu - so * su * ci), a * (so * cu + co * su * ci),
            a * su * si};
}

}  // namespace

double OrbitShell::mean_motion_rad_s() const {
    const double a = orbit_radius_m();
    return std::sqrt(earth_mu_m3_s2 / (a * a * a));
}

double OrbitShell::period_s() const { return 2.0 * M_PI / mean_motion_rad_s(); }

std::vector<Vec3> propagate(const OrbitShell& shell, double time_s) {
    if (time_s < 0.0) throw std::invalid_argument("propagate: negative time");
    std::vector<Vec3> out;
    out.reserve(shell.count());
    for (int p = 0; p < shell.plane_count; ++p)
        for (int k = 0; k < shell.sats_per_plane; ++k)
            out.push_back(sat_inertial(shell, p, k, time_s));
    return out;
}

Vec3 inertial_to_earth_fixed(const Vec3& p, double time_s) {
    const double theta = earth_rotation_rad_s * time_s;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {p.x * c + p.y * s, -p.x * s + p.y * c, p.z};
}

Vec3 site_position(const GroundSite& site) {
    const double cl = std::cos(site.latitude_rad);
    return {earth_radius_m * cl * std::cos(site.longitude_rad),
            earth_radius_m * cl * std::sin(site.longitude_rad),
            earth_radius_m * std::sin(site.latitude_rad)};
}

double elevation_of(const Vec3& sat_ecef, const Vec3& site_ecef) {
    const Vec3 range = sat_ecef - site_ecef;
    return std::asin(range.dot(site_ecef) / (range.norm() * site_ecef.norm()));
}

namespace {

double law_of_cosines_angle(double adj1, double adj2, double opposite) {
    if (adj1 <= 0.0 || adj2 <= 0.0 || opposite < 0.0)
        throw std::domain_error("off-axis angle: non-positive distance");
    const double arg =
        (adj1 * adj1 + adj2 * adj2 - opposite * opposite) / (2.0 * adj1 * adj2);
    constexpr double tol = 1e-9;
    if (arg > 1.0 + tol || arg < -1.0 - tol)
        throw std::domain_error("off-axis angle: degenerate triangle");
    return std::acos(std::clamp(arg, -1.0, 1.0));
}

}  // namespace

double off_axis_angle_tx(double d_sc, double d_sc2, double d_cc2) {
    return law_of_cosines_angle(d_sc, d_sc2, d_cc2);
}

double off_axis_angle_rx(double d_sc, double d_s2c, double d_ss2) {
    return law_of_cosines_angle(d_sc, d_s2c, d_ss2);
}

ConstellationSnapshot build_snapshot(const OrbitShell& shell,
                                     const std::vector<GroundSite>& sites,
                                     int epoch_index,
                                     const GeometryConfig& config) {
    if (epoch_index < 1) throw std::invalid_argument("epoch index starts at 1");

    ConstellationSnapshot snap;
    snap.epoch_index = epoch_index;
    snap.time_s = (epoch_index - 1) * config.epoch_duration_s;

    const std::vector<Vec3> inertial = propagate(shell, snap.time_s);
    snap.sat_positions.reserve(inertial.size());
    for (const Vec3& p : inertial)
        snap.sat_positions.push_back(inertial_to_earth_fixed(p, snap.time_s));

    snap.site_positions.reserve(sites.size());
    int cells = 0;
    for (const GroundSite& s : sites) {
        if (s.kind == SiteKind::beam_cell) ++cells;
        snap.site_positions.push_back(site_position(s));
    }
    snap.cell_count = cells;

    const int nsat = snap.sat_count();
    const int nsite = snap.site_count();
    snap.elevation_matrix.resize(static_cast<size_t>(nsat) * cells);
    snap.visible_matrix.resize(static_cast<size_t>(nsat) * cells);
    snap.distance_matrix.resize(static_cast<size_t>(nsat) * nsite);
    snap.visible_counts.assign(cells, 0);

    for (int s = 0; s < nsat; ++s) {
        const Vec3& sat = snap.sat_positions[s];
        for (int i = 0; i < nsite; ++i) {
            snap.distance_matrix[static_cast<size_t>(s) * nsite + i] =
                distance(sat, snap.site_positions[i]);
        }
        for (int c = 0; c < cells; ++c) {
            const double el = elevation_of(sat, snap.site_positions[c]);
            const bool vis = el >= config.min_elevation_rad;
            snap.elevation_matrix[static_cast<size_t>(s) * cells + c] = el;
            snap.visible_matrix[static_cast<size_t>(s) * cells + c] = vis ? 1 : 0;
            if (vis) ++snap.visible_counts[c];
        }
    }
    return snap;
}

double remaining_visibility_s(const OrbitShell& shell, const GroundSite& site,
                              int sat_index, double from_time_s,
                              const GeometryConfig& config, double step_s,
                              double horizon_s) {
    const Vec3 pos = site_position(site);
    const int plane = sat_index / shell.sats_per_plane;
    const int slot = sat_index % shell.sats_per_plane;
    double t = 0.0;
    while (t < horizon_s) {
        const Vec3 sat = inertial_to_earth_fixed(
            sat_inertial(shell, plane, slot, from_time_s + t), from_time_s + t);
        if (elevation_of(sat, pos) < config.min_elevation_rad) return t;
        t += step_s;
    }
    return horizon_s;
}

}  // namespace leobeam::geom
