#pragma once

#include <cstdint>
#include <vector>

#include "leobeam/vec3.hpp"

namespace leobeam::geom {

constexpr double earth_radius_m = 6378137.0;
constexpr double earth_mu_m3_s2 = 3.986004418e14;
constexpr double earth_rotation_rad_s = 7.2921159e-5;

// Circular Walker-style shell: plane_count planes at uniform RAAN spacing,
// sats_per_plane satellites per plane, inter-plane phasing in units of
// 2*pi*walker_phasing/(plane_count*sats_per_plane).
struct OrbitShell {
    int plane_count = 1;
    int sats_per_plane = 1;
    double altitude_m = 550e3;
    double inclination_rad = 0.0;
    double epoch0_phase = 0.0;
    int walker_phasing = 1;

    int count() const { return plane_count * sats_per_plane; }
    double orbit_radius_m() const { return earth_radius_m + altitude_m; }
    double mean_motion_rad_s() const;
    double period_s() const;
};

enum class SiteKind { beam_cell, cluster_center };

struct GroundSite {
    double latitude_rad = 0.0;
    double longitude_rad = 0.0;
    SiteKind kind = SiteKind::beam_cell;
};

struct GeometryConfig {
    double min_elevation_rad = 0.6108652381980153;  // 35 deg
    double epoch_duration_s = 0.2;
};

// Inertial positions at time_s (spherical earth, circular orbits).
std::vector<Vec3> propagate(const OrbitShell& shell, double time_s);

Vec3 inertial_to_earth_fixed(const Vec3& p, double time_s);

// Earth-fixed position of a ground site on the spherical earth surface.
Vec3 site_position(const GroundSite& site);

double elevation_of(const Vec3& sat_ecef, const Vec3& site_ecef);

// Off-axis angle at the transmitting satellite between its serving cell and a
// victim cell, from the three pairwise distances (law of cosines).
double off_axis_angle_tx(double d_sc, double d_sc2, double d_cc2);

// Off-axis angle at the receiving cell between its serving satellite and an
// interfering satellite.
double off_axis_angle_rx(double d_sc, double d_s2c, double d_ss2);

// Immutable per-epoch geometry: satellite positions (earth-fixed), per-cell
// elevation/visibility, and satellite-to-site distances. Sites are ordered
// cells first, then cluster centers.
struct ConstellationSnapshot {
    int epoch_index = 0;
    double time_s = 0.0;
    int cell_count = 0;
    std::vector<Vec3> sat_positions;
    std::vector<Vec3> site_positions;
    std::vector<double> elevation_matrix;  // radians; sat-major, cells only
    std::vector<uint8_t> visible_matrix;   // sat-major, cells only
    std::vector<double> distance_matrix;   // sat-major, all sites
    std::vector<int> visible_counts;       // per cell

    int sat_count() const { return static_cast<int>(sat_positions.size()); }
    int site_count() const { return static_cast<int>(site_positions.size()); }

    double elevation(int sat, int cell) const {
        return elevation_matrix[static_cast<size_t>(sat) * cell_count + cell];
    }
    bool visible(int sat, int cell) const {
        return visible_matrix[static_cast<size_t>(sat) * cell_count + cell] != 0;
    }
    double distance(int sat, int site) const {
        return distance_matrix[static_cast<size_t>(sat) * site_count() + site];
    }
    double sat_distance(int a, int b) const {
        return leobeam::distance(sat_positions[a], sat_positions[b]);
    }
    double site_distance(int a, int b) const {
        return leobeam::distance(site_positions[a], site_positions[b]);
    }
    int visible_count(int cell) const { return visible_counts[cell]; }
};

// Snapshot for epoch f (1-based); snapshot time is (f-1)*epoch_duration.
ConstellationSnapshot build_snapshot(const OrbitShell& shell,
                                     const std::vector<GroundSite>& sites,
                                     int epoch_index,
                                     const GeometryConfig& config);

// Seconds until the given satellite drops below the visibility threshold for
// the site, probed forward from from_time_s in step_s increments.
double remaining_visibility_s(const OrbitShell& shell, const GroundSite& site,
                              int sat_index, double from_time_s,
                              const GeometryConfig& config,
                              double step_s = 1.0, double horizon_s = 1200.0);

}  // namespace leobeam::geom
