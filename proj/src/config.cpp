#include "leobeam/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace leobeam::config {

namespace {

constexpr double deg = M_PI / 180.0;

double parse_double(const std::string& v) {
    if (v == "inf") return std::numeric_limits<double>::infinity();
    size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("not a number: " + v);
    return out;
}

int parse_int(const std::string& v) {
    size_t used = 0;
    const int out = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument("not an integer: " + v);
    return out;
}

uint64_t parse_u64(const std::string& v) {
    size_t used = 0;
    const uint64_t out = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument("not an integer: " + v);
    return out;
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("not a boolean: " + v);
}

std::vector<double> parse_list(const std::string& v) {
    std::vector<double> out;
    std::istringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(item));
    return out;
}

std::string fmt(double v) {
    if (std::isinf(v)) return "inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

using Setter = std::function<void(sim::ScenarioConfig&, const std::string&)>;

const std::map<std::string, Setter>& schema() {
    static const std::map<std::string, Setter> table = {
        {"orbit.plane_count", [](auto& c, auto& v) { c.shell.plane_count = parse_int(v); }},
        {"orbit.sats_per_plane", [](auto& c, auto& v) { c.shell.sats_per_plane = parse_int(v); }},
        {"orbit.altitude_km", [](auto& c, auto& v) { c.shell.altitude_m = parse_double(v) * 1e3; }},
        {"orbit.inclination_deg", [](auto& c, auto& v) { c.shell.inclination_rad = parse_double(v) * deg; }},
        {"orbit.phase_rad", [](auto& c, auto& v) { c.shell.epoch0_phase = parse_double(v); }},
        {"orbit.walker_phasing", [](auto& c, auto& v) { c.shell.walker_phasing = parse_int(v); }},
        {"geometry.min_elevation_deg", [](auto& c, auto& v) { c.min_elevation_rad = parse_double(v) * deg; }},
        {"cells.rows", [](auto& c, auto& v) { c.cells.rows = parse_int(v); }},
        {"cells.cols", [](auto& c, auto& v) { c.cells.cols = parse_int(v); }},
        {"cells.spacing_km", [](auto& c, auto& v) { c.cells.spacing_m = parse_double(v) * 1e3; }},
        {"cells.radius_km", [](auto& c, auto& v) { c.cells.radius_m = parse_double(v) * 1e3; }},
        {"cells.anchor_lat_deg", [](auto& c, auto& v) { c.cells.anchor_lat_rad = parse_double(v) * deg; }},
        {"cells.anchor_lon_deg", [](auto& c, auto& v) { c.cells.anchor_lon_rad = parse_double(v) * deg; }},
        {"clusters.count", [](auto& c, auto& v) { c.clusters.count = parse_int(v); }},
        {"clusters.scatter_radius_km", [](auto& c, auto& v) { c.clusters.scatter_radius_m = parse_double(v) * 1e3; }},
        {"clusters.min_separation_km", [](auto& c, auto& v) { c.clusters.min_separation_m = parse_double(v) * 1e3; }},
        {"clusters.layout_seed", [](auto& c, auto& v) { c.clusters.layout_seed = parse_u64(v); }},
        {"clusters.load_min", [](auto& c, auto& v) { c.cluster_loads.load_min = parse_double(v); }},
        {"clusters.load_max", [](auto& c, auto& v) { c.cluster_loads.load_max = parse_double(v); }},
        {"clusters.load_mode",
         [](auto& c, auto& v) {
             if (v == "static") c.cluster_loads.mode = sim::ClusterLoadModel::Mode::static_draw;
             else if (v == "per_epoch") c.cluster_loads.mode = sim::ClusterLoadModel::Mode::per_epoch;
             else throw std::invalid_argument("unknown load mode: " + v);
         }},
        {"radio.carrier_ghz", [](auto& c, auto& v) { c.radio.carrier_hz = parse_double(v) * 1e9; }},
        {"radio.sat_bandwidth_mhz", [](auto& c, auto& v) { c.radio.sat_bandwidth_hz = parse_double(v) * 1e6; }},
        {"radio.terr_bandwidth_mhz", [](auto& c, auto& v) { c.radio.terr_bandwidth_hz = parse_double(v) * 1e6; }},
        {"radio.slot_duration_ms", [](auto& c, auto& v) { c.radio.slot_duration_s = parse_double(v) * 1e-3; }},
        {"radio.slots_per_epoch", [](auto& c, auto& v) { c.radio.slots_per_epoch = parse_int(v); }},
        {"radio.beams_per_satellite", [](auto& c, auto& v) { c.radio.beams_per_satellite = parse_int(v); }},
        {"radio.polarization_count", [](auto& c, auto& v) { c.radio.polarization_count = parse_int(v); }},
        {"radio.cross_pol_isolation_db", [](auto& c, auto& v) { c.radio.cross_pol_isolation_db = parse_double(v); }},
        {"radio.rx_temperature_k", [](auto& c, auto& v) { c.radio.rx_temperature_k = parse_double(v); }},
        {"radio.tx_peak_gain_db", [](auto& c, auto& v) { c.radio.tx_pattern.peak_gain_db = parse_double(v); }},
        {"radio.rx_peak_gain_db", [](auto& c, auto& v) { c.radio.rx_pattern.peak_gain_db = parse_double(v); }},
        {"radio.terr_peak_gain_db", [](auto& c, auto& v) { c.radio.terr_peak_gain_db = parse_double(v); }},
        {"radio.tx_beamwidth_deg", [](auto& c, auto& v) { c.radio.tx_pattern.half_power_beamwidth_rad = parse_double(v) * deg; }},
        {"radio.tx_floor_db", [](auto& c, auto& v) { c.radio.tx_pattern.floor_attenuation_db = parse_double(v); }},
        {"radio.rx_beamwidth_deg", [](auto& c, auto& v) { c.radio.rx_pattern.half_power_beamwidth_rad = parse_double(v) * deg; }},
        {"radio.rx_floor_db", [](auto& c, auto& v) { c.radio.rx_pattern.floor_attenuation_db = parse_double(v); }},
        {"radio.inr_beam_db", [](auto& c, auto& v) { c.radio.inr_beam_db = parse_double(v); }},
        {"radio.inr_terr_db", [](auto& c, auto& v) { c.radio.inr_terr_db = parse_double(v); }},
        {"radio.target_snr_db", [](auto& c, auto& v) { c.radio.target_snr_db = parse_double(v); }},
        {"traffic.total_rate_gbps", [](auto& c, auto& v) { c.arrivals.mean_total_rate_bps = parse_double(v) * 1e9; }},
        {"traffic.distribution",
         [](auto& c, auto& v) {
             if (v == "poisson") c.arrivals.distribution = traffic::ArrivalDistribution::poisson_batch;
             else if (v == "deterministic") c.arrivals.distribution = traffic::ArrivalDistribution::deterministic;
             else throw std::invalid_argument("unknown distribution: " + v);
         }},
        {"traffic.packet_kbits", [](auto& c, auto& v) { c.arrivals.packet_bits = parse_double(v) * 1e3; }},
        {"traffic.weights", [](auto& c, auto& v) { c.arrivals.weights = parse_list(v); }},
        {"lyapunov.v", [](auto& c, auto& v) { c.lyapunov.v = parse_double(v); }},
        {"lyapunov.h_bar", [](auto& c, auto& v) { c.lyapunov.h_bar = parse_double(v); }},
        {"handover.sigma0", [](auto& c, auto& v) { c.handover_cfg.sigma0 = parse_double(v); }},
        {"handover.tau0", [](auto& c, auto& v) { c.handover_cfg.tau0 = parse_double(v); }},
        {"handover.swap_iterations", [](auto& c, auto& v) { c.handover_cfg.max_swap_iterations = parse_int(v); }},
        {"handover.perturb_fraction", [](auto& c, auto& v) { c.handover_cfg.perturb_fraction = parse_double(v); }},
        {"handover.load_weight", [](auto& c, auto& v) { c.handover_cfg.load_weight = parse_double(v); }},
        {"sparrow.population", [](auto& c, auto& v) { c.sparrow.population = parse_int(v); }},
        {"sparrow.iterations", [](auto& c, auto& v) { c.sparrow.max_iterations = parse_int(v); }},
        {"sparrow.local_search", [](auto& c, auto& v) { c.sparrow.local_search_iterations = parse_int(v); }},
        {"sparrow.producers", [](auto& c, auto& v) { c.sparrow.producers = parse_int(v); }},
        {"sparrow.spectators", [](auto& c, auto& v) { c.sparrow.spectators = parse_int(v); }},
        {"sim.epochs", [](auto& c, auto& v) { c.epochs = parse_int(v); }},
        {"sim.seed", [](auto& c, auto& v) { c.seed = parse_u64(v); }},
        {"sim.two_satellite_mode", [](auto& c, auto& v) { c.two_satellite_mode = parse_bool(v); }},
        {"sim.final_window", [](auto& c, auto& v) { c.final_window = parse_int(v); }},
        {"sim.validate", [](auto& c, auto& v) { c.validate_every_epoch = parse_bool(v); }},
        {"policy.handover",
         [](auto& c, auto& v) {
             using H = sim::PolicySelection::Handover;
             if (v == "proposed") c.policy.handover = H::proposed;
             else if (v == "load_balance") c.policy.handover = H::load_balance;
             else if (v == "entropy_only") c.policy.handover = H::entropy_only;
             else if (v == "none") c.policy.handover = H::none;
             else throw std::invalid_argument("unknown handover policy: " + v);
         }},
        {"policy.beamhop",
         [](auto& c, auto& v) {
             using B = sim::PolicySelection::Beamhop;
             if (v == "proposed") c.policy.beamhop = B::proposed;
             else if (v == "greedy_hop") c.policy.beamhop = B::greedy_hop;
             else throw std::invalid_argument("unknown beamhop policy: " + v);
         }},
        {"policy.spectrum",
         [](auto& c, auto& v) {
             using S = sim::PolicySelection::Spectrum;
             if (v == "proposed") c.policy.spectrum = S::proposed;
             else if (v == "greedy_share") c.policy.spectrum = S::greedy_share;
             else if (v == "none") c.policy.spectrum = S::none;
             else throw std::invalid_argument("unknown spectrum policy: " + v);
         }},
    };
    return table;
}

void finalize(sim::ScenarioConfig& cfg) {
    cfg.arrivals.epoch_duration_s = cfg.radio.epoch_duration_s();
    cfg.arrivals.seed = mix_seed(cfg.seed, 1);
    if (static_cast<int>(cfg.arrivals.weights.size()) != cfg.cells.count()) {
        cfg.arrivals.weights.assign(cfg.cells.count(),
                                    1.0 / std::max(1, cfg.cells.count()));
    }
    double sum = 0.0;
    for (double w : cfg.arrivals.weights) sum += w;
    if (sum <= 0.0) throw ConfigError("traffic.weights: sum must be positive");
    for (double& w : cfg.arrivals.weights) w /= sum;
}

std::string trim(const std::string& s) {
    const size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

sim::ScenarioConfig default_scenario() {
    sim::ScenarioConfig cfg;
    cfg.arrivals.mean_total_rate_bps = 6.52e9;
    cfg.arrivals.weights = {2.21, 6.36, 6.36, 3.25, 7.40, 3.25, 2.09,
                            4.28, 4.29, 5.32, 8.44, 4.28, 3.25, 2.21,
                            6.36, 7.40, 3.12, 8.44, 4.28, 7.40};
    finalize(cfg);
    return cfg;
}

sim::ScenarioConfig parse_scenario_text(const std::string& text,
                                        const std::string& origin) {
    sim::ScenarioConfig cfg = default_scenario();
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool weights_set = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line.substr(0, line.find('#')));
        if (stripped.empty()) continue;
        const size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        const auto it = schema().find(key);
        if (it == schema().end())
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": unknown key '" + key + "'");
        try {
            it->second(cfg, value);
        } catch (const std::exception& e) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + key +
                              ": " + e.what());
        }
        if (key == "traffic.weights") weights_set = true;
    }
    if (weights_set &&
        static_cast<int>(cfg.arrivals.weights.size()) != cfg.cells.count())
        throw ConfigError(origin + ": traffic.weights: expected " +
                          std::to_string(cfg.cells.count()) + " entries, got " +
                          std::to_string(cfg.arrivals.weights.size()));
    finalize(cfg);
    return cfg;
}

sim::ScenarioConfig load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario_text(buffer.str(), path);
}

void apply_override(sim::ScenarioConfig& config, const std::string& key,
                    const std::string& value) {
    const auto it = schema().find(key);
    if (it == schema().end()) throw ConfigError("unknown key '" + key + "'");
    try {
        it->second(config, value);
    } catch (const std::exception& e) {
        throw ConfigError(key + ": " + e.what());
    }
    if (key == "traffic.weights" &&
        static_cast<int>(config.arrivals.weights.size()) != config.cells.count())
        throw ConfigError("traffic.weights: entry count mismatch");
    finalize(config);
}

std::string serialize_scenario(const sim::ScenarioConfig& c) {
    std::ostringstream out;
    out << "orbit.plane_count = " << c.shell.plane_count << "\n";
    out << "orbit.sats_per_plane = " << c.shell.sats_per_plane << "\n";
    out << "orbit.altitude_km = " << fmt(c.shell.altitude_m / 1e3) << "\n";
    out << "orbit.inclination_deg = " << fmt(c.shell.inclination_rad / deg) << "\n";
    out << "orbit.phase_rad = " << fmt(c.shell.epoch0_phase) << "\n";
    out << "orbit.walker_phasing = " << c.shell.walker_phasing << "\n";
    out << "geometry.min_elevation_deg = " << fmt(c.min_elevation_rad / deg) << "\n";
    out << "cells.rows = " << c.cells.rows << "\n";
    out << "cells.cols = " << c.cells.cols << "\n";
    out << "cells.spacing_km = " << fmt(c.cells.spacing_m / 1e3) << "\n";
    out << "cells.radius_km = " << fmt(c.cells.radius_m / 1e3) << "\n";
    out << "cells.anchor_lat_deg = " << fmt(c.cells.anchor_lat_rad / deg) << "\n";
    out << "cells.anchor_lon_deg = " << fmt(c.cells.anchor_lon_rad / deg) << "\n";
    out << "clusters.count = " << c.clusters.count << "\n";
    out << "clusters.scatter_radius_km = " << fmt(c.clusters.scatter_radius_m / 1e3) << "\n";
    out << "clusters.min_separation_km = " << fmt(c.clusters.min_separation_m / 1e3) << "\n";
    out << "clusters.layout_seed = " << c.clusters.layout_seed << "\n";
    out << "clusters.load_min = " << fmt(c.cluster_loads.load_min) << "\n";
    out << "clusters.load_max = " << fmt(c.cluster_loads.load_max) << "\n";
    out << "clusters.load_mode = "
        << (c.cluster_loads.mode == sim::ClusterLoadModel::Mode::static_draw
                ? "static"
                : "per_epoch")
        << "\n";
    out << "radio.carrier_ghz = " << fmt(c.radio.carrier_hz / 1e9) << "\n";
    out << "radio.sat_bandwidth_mhz = " << fmt(c.radio.sat_bandwidth_hz / 1e6) << "\n";
    out << "radio.terr_bandwidth_mhz = " << fmt(c.radio.terr_bandwidth_hz / 1e6) << "\n";
    out << "radio.slot_duration_ms = " << fmt(c.radio.slot_duration_s * 1e3) << "\n";
    out << "radio.slots_per_epoch = " << c.radio.slots_per_epoch << "\n";
    out << "radio.beams_per_satellite = " << c.radio.beams_per_satellite << "\n";
    out << "radio.polarization_count = " << c.radio.polarization_count << "\n";
    out << "radio.cross_pol_isolation_db = " << fmt(c.radio.cross_pol_isolation_db) << "\n";
    out << "radio.rx_temperature_k = " << fmt(c.radio.rx_temperature_k) << "\n";
    out << "radio.tx_peak_gain_db = " << fmt(c.radio.tx_pattern.peak_gain_db) << "\n";
    out << "radio.rx_peak_gain_db = " << fmt(c.radio.rx_pattern.peak_gain_db) << "\n";
    out << "radio.terr_peak_gain_db = " << fmt(c.radio.terr_peak_gain_db) << "\n";
    out << "radio.tx_beamwidth_deg = "
        << fmt(c.radio.tx_pattern.half_power_beamwidth_rad / deg) << "\n";
    out << "radio.tx_floor_db = " << fmt(c.radio.tx_pattern.floor_attenuation_db) << "\n";
    out << "radio.rx_beamwidth_deg = "
        << fmt(c.radio.rx_pattern.half_power_beamwidth_rad / deg) << "\n";
    out << "radio.rx_floor_db = " << fmt(c.radio.rx_pattern.floor_attenuation_db) << "\n";
    out << "radio.inr_beam_db = " << fmt(c.radio.inr_beam_db) << "\n";
    out << "radio.inr_terr_db = " << fmt(c.radio.inr_terr_db) << "\n";
    out << "radio.target_snr_db = " << fmt(c.radio.target_snr_db) << "\n";
    out << "traffic.total_rate_gbps = " << fmt(c.arrivals.mean_total_rate_bps / 1e9) << "\n";
    out << "traffic.distribution = "
        << (c.arrivals.distribution == traffic::ArrivalDistribution::poisson_batch
                ? "poisson"
                : "deterministic")
        << "\n";
    out << "traffic.packet_kbits = " << fmt(c.arrivals.packet_bits / 1e3) << "\n";
    out << "traffic.weights = ";
    for (size_t i = 0; i < c.arrivals.weights.size(); ++i) {
        if (i) out << ",";
        out << fmt(c.arrivals.weights[i]);
    }
    out << "\n";
    out << "lyapunov.v = " << fmt(c.lyapunov.v) << "\n";
    out << "lyapunov.h_bar = " << fmt(c.lyapunov.h_bar) << "\n";
    out << "handover.sigma0 = " << fmt(c.handover_cfg.sigma0) << "\n";
    out << "handover.tau0 = " << fmt(c.handover_cfg.tau0) << "\n";
    out << "handover.swap_iterations = " << c.handover_cfg.max_swap_iterations << "\n";
    out << "handover.perturb_fraction = " << fmt(c.handover_cfg.perturb_fraction) << "\n";
    out << "handover.load_weight = " << fmt(c.handover_cfg.load_weight) << "\n";
    out << "sparrow.population = " << c.sparrow.population << "\n";
    out << "sparrow.iterations = " << c.sparrow.max_iterations << "\n";
    out << "sparrow.local_search = " << c.sparrow.local_search_iterations << "\n";
    out << "sparrow.producers = " << c.sparrow.producers << "\n";
    out << "sparrow.spectators = " << c.sparrow.spectators << "\n";
    out << "sim.epochs = " << c.epochs << "\n";
    out << "sim.seed = " << c.seed << "\n";
    out << "sim.two_satellite_mode = " << (c.two_satellite_mode ? "true" : "false") << "\n";
    out << "sim.final_window = " << c.final_window << "\n";
    out << "sim.validate = " << (c.validate_every_epoch ? "true" : "false") << "\n";
    using H = sim::PolicySelection::Handover;
    using B = sim::PolicySelection::Beamhop;
    using S = sim::PolicySelection::Spectrum;
    out << "policy.handover = "
        << (c.policy.handover == H::proposed       ? "proposed"
            : c.policy.handover == H::load_balance ? "load_balance"
            : c.policy.handover == H::entropy_only ? "entropy_only"
                                                   : "none")
        << "\n";
    out << "policy.beamhop = "
        << (c.policy.beamhop == B::proposed ? "proposed" : "greedy_hop") << "\n";
    out << "policy.spectrum = "
        << (c.policy.spectrum == S::proposed       ? "proposed"
            : c.policy.spectrum == S::greedy_share ? "greedy_share"
                                                   : "none")
        << "\n";
    return out.str();
}

}  // namespace leobeam::config
