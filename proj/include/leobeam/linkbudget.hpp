#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <unordered_set>
#include <vector>

#include "leobeam/geometry.hpp"

namespace leobeam::link {

constexpr double boltzmann_j_per_k = 1.380649e-23;
constexpr double light_speed_m_s = 299792458.0;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

// Antenna pattern as peak gain plus an off-axis attenuation profile. The
// default profile is the parabolic taper min(12*(theta/theta3dB)^2, floor);
// a tabulated profile (angle ascending, attenuation dB) can be plugged in
// instead.
struct GainPattern {
    double peak_gain_db = 0.0;
    double half_power_beamwidth_rad = 0.0628;
    double floor_attenuation_db = 30.0;
    std::vector<std::pair<double, double>> table;  // empty -> parabolic

    double attenuation_db(double off_axis_rad) const;
    double attenuation_linear(double off_axis_rad) const {
        return db_to_linear(-attenuation_db(off_axis_rad));
    }
    double peak_linear() const { return db_to_linear(peak_gain_db); }
};

struct RadioConfig {
    double carrier_hz = 20e9;
    double sat_bandwidth_hz = 200e6;  // W1
    double terr_bandwidth_hz = 80e6;  // W2
    double slot_duration_s = 1e-3;
    int slots_per_epoch = 200;
    int beams_per_satellite = 4;
    int polarization_count = 2;
    double cross_pol_isolation_db = std::numeric_limits<double>::infinity();
    double rx_temperature_k = 290.0;
    double terr_peak_gain_db = 0.0;  // handheld terrestrial receivers
    double inr_beam_db = -5.0;
    double inr_terr_db = -10.0;
    double target_snr_db = 12.0;
    GainPattern tx_pattern{38.5, 0.0628, 35.0, {}};
    GainPattern rx_pattern{20.0, 0.1745, 35.0, {}};

    double epoch_duration_s() const { return slot_duration_s * slots_per_epoch; }
    double noise_w(double bandwidth_hz) const {
        return boltzmann_j_per_k * rx_temperature_k * bandwidth_hz;
    }
    // combined peak gain G_p of the service link
    double peak_gain_linear() const {
        return tx_pattern.peak_linear() * rx_pattern.peak_linear();
    }
    int beam_polarization(int beam) const { return beam % polarization_count; }
    double inr_beam_threshold_w() const {
        return db_to_linear(inr_beam_db) * noise_w(sat_bandwidth_hz);
    }
    double inr_terr_threshold_w() const {
        return db_to_linear(inr_terr_db) * noise_w(terr_bandwidth_hz);
    }
};

struct LinkSample {
    double channel_gain_linear = 0.0;
    double snr_db = 0.0;
    double slot_capacity_bits = 0.0;
};

// Free-space channel gain (c / (4 pi d f))^2.
double channel_gain(double distance_m, double carrier_hz);

// W * T_slot * log2(1 + snr).
double slot_capacity_bits(double bandwidth_hz, double slot_s, double snr_linear);

// Transmit power that hits the target SNR over bandwidth W given the link's
// channel gain and the peak antenna gains.
double tx_power_for_target_snr(double target_snr_db, double gain,
                               double bandwidth_hz, const RadioConfig& radio);

// Forward link equation; returns SNR in dB for a given power (round-trip
// check of the inversion above).
double snr_db_from_power(double power_w, double gain, double bandwidth_hz,
                         const RadioConfig& radio);

// Maximum tolerable summed pattern attenuation (in signed dB, attenuations
// counted negative) for interferer cell c2 into victim cell c.
double dynamic_conflict_threshold_db(const RadioConfig& radio,
                                     int visible_count_c, double snr_c_db,
                                     double snr_c2_db, double h_serving_c,
                                     double h_interferer_to_c);

struct ActiveBeam {
    int sat = 0;
    int cell = 0;
    int beam = 0;
};

// Aggregate co-channel co-polarized interference received by the victim cell.
// Callers pass only actives in the victim's band/polarization group.
double interbeam_interference_w(int victim_sat, int victim_cell,
                                std::span<const ActiveBeam> actives,
                                const geom::ConstellationSnapshot& snap,
                                std::span<const double> tx_power_w_per_cell,
                                const RadioConfig& radio);

// Aggregate interference at a cluster center site from all active shares;
// the cluster-side receive gain is pinned at its peak (worst case).
double terrestrial_interference_w(int cluster_site, std::span<const ActiveBeam> actives,
                                  const geom::ConstellationSnapshot& snap,
                                  std::span<const double> tx_power_w_per_cell,
                                  const RadioConfig& radio);

struct ConflictPair {
    int sat_a = 0;
    int sat_b = 0;
    int cell_a = 0;
    int cell_b = 0;
};

// Symmetric conflict tuple set for one epoch given the serving assignment.
class ConflictSet {
  public:
    void insert(const ConflictPair& p);
    bool conflicts(int cell_a, int cell_b) const;
    const std::vector<ConflictPair>& pairs() const { return pairs_; }
    size_t size() const { return pairs_.size(); }

  private:
    std::vector<ConflictPair> pairs_;
    std::unordered_set<uint64_t> keys_;
};

ConflictSet conflict_pairs(const geom::ConstellationSnapshot& snap,
                           std::span<const int> serving,
                           std::span<const double> target_snr_db,
                           const RadioConfig& radio);

}  // namespace leobeam::link
