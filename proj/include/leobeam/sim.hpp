#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "leobeam/beamhop.hpp"
#include "leobeam/geometry.hpp"
#include "leobeam/handover.hpp"
#include "leobeam/linkbudget.hpp"
#include "leobeam/spectrum.hpp"
#include "leobeam/traffic.hpp"

namespace leobeam::sim {

// Raised when a scenario cannot be simulated (e.g. a cell with no visible
// satellite); maps to a dedicated CLI exit code.
struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CellLayout {
    int rows = 4;
    int cols = 5;
    double spacing_m = 34.6e3;
    double radius_m = 34.6e3;  // informational; spacing drives the grid
    double anchor_lat_rad = 0.3490658503988659;   // 20N
    double anchor_lon_rad = 0.5235987755982988;   // 30E

    int count() const { return rows * cols; }
    std::vector<geom::GroundSite> make_cells() const;
};

struct ClusterLayout {
    int count = 200;
    double scatter_radius_m = 50e3;
    double min_separation_m = 10e3;
    uint64_t layout_seed = 12345;

    // Scatter cluster centers around the cell centers, round-robin, honoring
    // the minimum separation.
    std::vector<geom::GroundSite> make_clusters(
        const std::vector<geom::GroundSite>& cells) const;
};

struct ClusterLoadModel {
    double load_min = 0.4;
    double load_max = 0.6;
    enum class Mode { static_draw, per_epoch } mode = Mode::per_epoch;
};

struct PolicySelection {
    enum class Handover { proposed, load_balance, entropy_only, none } handover =
        Handover::proposed;
    enum class Beamhop { proposed, greedy_hop } beamhop = Beamhop::proposed;
    enum class Spectrum { proposed, greedy_share, none } spectrum =
        Spectrum::proposed;
};

struct ScenarioConfig {
    geom::OrbitShell shell{30, 40, 550e3, 0.9250245035569946 /*53 deg*/, 0.0, 1};
    CellLayout cells;
    ClusterLayout clusters;
    ClusterLoadModel cluster_loads;
    link::RadioConfig radio;
    traffic::ArrivalModel arrivals;
    traffic::LyapunovConfig lyapunov;
    handover::HandoverConfig handover_cfg;
    spectrum::SparrowConfig sparrow;
    PolicySelection policy;
    double min_elevation_rad = 0.6108652381980153;  // 35 deg
    int epochs = 2000;
    uint64_t seed = 1;
    bool two_satellite_mode = true;
    int final_window = 0;  // 0 -> epochs/4
    bool validate_every_epoch = true;

    void validate() const;  // throws std::invalid_argument on bad values
    int final_window_epochs() const {
        return final_window > 0 ? final_window : std::max(1, epochs / 4);
    }
};

struct EpochDecision {
    int epoch = 0;
    std::vector<int> serving;              // x, per cell
    beamhop::SlotSchedule schedule;        // y
    std::vector<spectrum::ShareVar> shares;  // z entries set to one
    std::vector<double> cluster_loads;     // l_j for this epoch
};

// Everything the constraint validator needs besides the decision itself.
struct EpochContext {
    const geom::ConstellationSnapshot* snapshot = nullptr;
    const link::ConflictSet* conflicts = nullptr;
    std::span<const double> tx_power_w;      // per cell
    std::span<const double> target_snr_db;   // per cell
    std::span<const int> cluster_budgets;    // per cluster, slots
    const link::RadioConfig* radio = nullptr;
};

struct Violation {
    std::string constraint;  // identifier from the constraint catalogue
    int epoch = 0;
    int slot = -1;
    std::string detail;
};

// Constraint catalogue identifiers reported by the validator.
namespace constraint {
inline constexpr const char* cell_single_beam = "cell-single-beam";
inline constexpr const char* serving_visibility = "serving-visibility";
inline constexpr const char* beam_single_cell = "beam-single-cell";
inline constexpr const char* satellite_beam_budget = "satellite-beam-budget";
inline constexpr const char* conflict_pair = "conflict-pair";
inline constexpr const char* cluster_slot_budget = "cluster-slot-budget";
inline constexpr const char* share_requires_beam = "share-requires-beam";
inline constexpr const char* schedule_matches_serving = "schedule-matches-serving";
}  // namespace constraint

std::vector<Violation> validate_decision(const EpochDecision& decision,
                                         const EpochContext& context);

struct HandoverEvent {
    int epoch = 0;
    int cell = 0;
    int from_sat = -1;
    int to_sat = -1;
    enum class Reason { visibility, rebalance } reason = Reason::visibility;
};

struct SharingClusterStat {
    int cluster = 0;
    int interfered_slots = 0;
    int budget = 0;
};

struct MetricsFrame {
    int epoch = 0;
    double p0_term = 0.0;
    double mean_queue_bits = 0.0;
    double max_queue_bits = 0.0;
    double mean_handover_freq = 0.0;
    double max_handover_freq = 0.0;
    double sigma = 0.0;
    double tau = 0.0;
    int rebalanced = 0;
    int handovers = 0;
    double served_w1_bits = 0.0;
    double served_w2_bits = 0.0;
    double mean_virtual_queue = 0.0;
    double penalty = 0.0;  // drift-plus-penalty value at the configured V
    int conflict_pairs = 0;
    int sharing_vars = 0;
};

struct RunSummary {
    int epochs = 0;
    int final_window = 0;
    double mean_final_queue_bits = 0.0;
    double mean_final_p0 = 0.0;
    double running_avg_p0 = 0.0;  // time average over the whole run
    double max_handover_freq = 0.0;
    double mean_handover_freq = 0.0;
    double mean_virtual_queue_over_f = 0.0;  // mean over cells of M_F / F
    double served_w1_bits = 0.0;
    double served_w2_bits = 0.0;
};

struct RunResult {
    std::vector<MetricsFrame> frames;
    std::vector<HandoverEvent> handover_events;
    std::vector<double> final_queue_bits;
    std::vector<double> final_virtual_queue;
    std::vector<long> final_handovers;
    RunSummary summary;
};

struct EpochHooks {
    // Called after each epoch with the decision, validator context and frame.
    std::function<void(const EpochDecision&, const EpochContext&,
                       const MetricsFrame&, const std::vector<SharingClusterStat>&,
                       const std::vector<HandoverEvent>&)>
        on_epoch;
};

RunResult run(const ScenarioConfig& config, const EpochHooks& hooks = {});

// Baseline: assign each listed cell to its minimum-load visible candidate.
void baseline_load_balance(std::span<const int> cells,
                           const std::vector<std::vector<int>>& candidates,
                           std::span<const double> queue_bits,
                           handover::Assignment& assignment);

// Baseline: flip shares to one in descending residual-queue order subject to
// feasibility and fitness improvement.
std::vector<uint8_t> baseline_greedy_share(const spectrum::SharingProblem& problem);

RunSummary metrics_summary(const std::vector<MetricsFrame>& frames, int final_window);

// Sharing instance assembly from geometry, schedule and residual queues.
spectrum::SharingProblem make_sharing_problem(
    const geom::ConstellationSnapshot& snapshot, const beamhop::SlotSchedule& schedule,
    std::span<const double> residual_queue_bits, std::span<const double> tx_power_w,
    std::span<const double> terr_slot_rate_bits, std::span<const int> cluster_budgets,
    const link::RadioConfig& radio);

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsFrame& frame);

// Least-squares slope of a series per index step; 0 for fewer than 2 points.
double linear_slope(std::span<const double> series);

}  // namespace leobeam::sim
