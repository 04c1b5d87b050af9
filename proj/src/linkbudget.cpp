#include "leobeam/linkbudget.hpp"

#include <algorithm>
#include <stdexcept>

namespace leobeam::link {

double GainPattern::attenuation_db(double off_axis_rad) const {
    const double theta = std::abs(off_axis_rad);
    if (!table.empty()) {
        if (theta <= table.front().first) return table.front().second;
        for (size_t i = 1; i < table.size(); ++i) {
            if (theta <= table[i].first) {
                const auto& [a0, v0] = table[i - 1];
                const auto& [a1, v1] = table[i];
                const double w = (theta - a0) / (a1 - a0);
                return std::min(v0 + w * (v1 - v0), floor_attenuation_db);
            }
        }
        return floor_attenuation_db;
    }
    const double ratio = theta / half_power_beamwidth_rad;
    return std::min(12.0 * ratio * ratio, floor_attenuation_db);
}

double channel_gain(double distance_m, double carrier_hz) {
    if (distance_m <= 0.0) throw std::invalid_argument("channel_gain: distance <= 0");
    const double amp = light_speed_m_s / (4.0 * M_PI * distance_m * carrier_hz);
    return amp * amp;
}

double slot_capacity_bits(double bandwidth_hz, double slot_s, double snr_linear) {
    if (snr_linear < 0.0) throw std::invalid_argument("slot_capacity: snr < 0");
    return bandwidth_hz * slot_s * std::log2(1.0 + snr_linear);
}

double tx_power_for_target_snr(double target_snr_db, double gain,
                               double bandwidth_hz, const RadioConfig& radio) {
    if (gain <= 0.0 || bandwidth_hz <= 0.0)
        throw std::invalid_argument("tx_power_for_target_snr: bad gain/bandwidth");
    if (std::isinf(target_snr_db) && target_snr_db < 0.0) return 0.0;
    return db_to_linear(target_snr_db) * radio.noise_w(bandwidth_hz) /
           (radio.peak_gain_linear() * gain);
}

double snr_db_from_power(double power_w, double gain, double bandwidth_hz,
                         const RadioConfig& radio) {
    return linear_to_db(power_w * radio.peak_gain_linear() * gain) -
           linear_to_db(radio.noise_w(bandwidth_hz));
}

double dynamic_conflict_threshold_db(const RadioConfig& radio,
                                     int visible_count_c, double snr_c_db,
                                     double snr_c2_db, double h_serving_c,
                                     double h_interferer_to_c) {
    const double delta = db_to_linear(snr_c_db - snr_c2_db);
    return radio.inr_beam_db -
           10.0 * std::log10(static_cast<double>(visible_count_c) *
                             radio.beams_per_satellite) -
           snr_c2_db - 10.0 * std::log10(h_serving_c / (delta * h_interferer_to_c));
}

double interbeam_interference_w(int victim_sat, int victim_cell,
                                std::span<const ActiveBeam> actives,
                                const geom::ConstellationSnapshot& snap,
                                std::span<const double> tx_power_w_per_cell,
                                const RadioConfig& radio) {
    double total = 0.0;
    for (const ActiveBeam& a : actives) {
        if (a.cell == victim_cell && a.sat == victim_sat) continue;
        const double d_sc = snap.distance(a.sat, victim_cell);
        const double d_sc2 = snap.distance(a.sat, a.cell);
        const double d_cc2 = snap.site_distance(victim_cell, a.cell);
        const double theta_tx = geom::off_axis_angle_tx(d_sc, d_sc2, d_cc2);
        const double d_serving = snap.distance(victim_sat, victim_cell);
        const double d_ss2 = snap.sat_distance(victim_sat, a.sat);
        const double theta_rx = geom::off_axis_angle_rx(d_serving, d_sc, d_ss2);
        total += tx_power_w_per_cell[a.cell] * radio.peak_gain_linear() *
                 radio.tx_pattern.attenuation_linear(theta_tx) *
                 radio.rx_pattern.attenuation_linear(theta_rx) *
                 channel_gain(d_sc, radio.carrier_hz);
    }
    return total;
}

double terrestrial_interference_w(int cluster_site, std::span<const ActiveBeam> actives,
                                  const geom::ConstellationSnapshot& snap,
                                  std::span<const double> tx_power_w_per_cell,
                                  const RadioConfig& radio) {
    double total = 0.0;
    for (const ActiveBeam& a : actives) {
        const double d_sg = snap.distance(a.sat, cluster_site);
        const double d_sc = snap.distance(a.sat, a.cell);
        const double d_cg = snap.site_distance(a.cell, cluster_site);
        const double theta_tx = geom::off_axis_angle_tx(d_sc, d_sg, d_cg);
        total += tx_power_w_per_cell[a.cell] * radio.tx_pattern.peak_linear() *
                 radio.tx_pattern.attenuation_linear(theta_tx) *
                 db_to_linear(radio.terr_peak_gain_db) *
                 channel_gain(d_sg, radio.carrier_hz);
    }
    return total;
}

namespace {

uint64_t pair_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<uint64_t>(a) << 32) | static_cast<uint32_t>(b);
}

}  // namespace

void ConflictSet::insert(const ConflictPair& p) {
    if (keys_.insert(pair_key(p.cell_a, p.cell_b)).second) pairs_.push_back(p);
}

bool ConflictSet::conflicts(int cell_a, int cell_b) const {
    return keys_.count(pair_key(cell_a, cell_b)) != 0;
}

ConflictSet conflict_pairs(const geom::ConstellationSnapshot& snap,
                           std::span<const int> serving,
                           std::span<const double> target_snr_db,
                           const RadioConfig& radio) {
    const int cells = snap.cell_count;
    ConflictSet out;
    for (int c = 0; c < cells; ++c) {
        if (serving[c] < 0) throw std::invalid_argument("conflict_pairs: unassigned cell");
    }
    // Directional test: attenuation budget for c2's beam interfering into c.
    auto violates = [&](int c, int c2) {
        const int s_c = serving[c];
        const int s_c2 = serving[c2];
        const double h_serving = channel_gain(snap.distance(s_c, c), radio.carrier_hz);
        const double h_interf = channel_gain(snap.distance(s_c2, c), radio.carrier_hz);
        const double threshold = dynamic_conflict_threshold_db(
            radio, snap.visible_count(c), target_snr_db[c], target_snr_db[c2],
            h_serving, h_interf);
        const double theta_tx = geom::off_axis_angle_tx(
            snap.distance(s_c2, c), snap.distance(s_c2, c2), snap.site_distance(c, c2));
        const double theta_rx = geom::off_axis_angle_rx(
            snap.distance(s_c, c), snap.distance(s_c2, c), snap.sat_distance(s_c, s_c2));
        const double attenuation_sum = radio.tx_pattern.attenuation_db(theta_tx) +
                                       radio.rx_pattern.attenuation_db(theta_rx);
        return -attenuation_sum >= threshold;
    };
    for (int c = 0; c < cells; ++c) {
        for (int c2 = c + 1; c2 < cells; ++c2) {
            if (violates(c, c2) || violates(c2, c))
                out.insert({serving[c], serving[c2], c, c2});
        }
    }
    return out;
}

}  // namespace leobeam::link
