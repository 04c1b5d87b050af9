#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "leobeam/rng.hpp"

namespace leobeam::traffic {

struct CellState {
    int cell_id = 0;
    double queue_bits = 0.0;      // Q
    double virtual_queue = 0.0;   // M
    long handovers = 0;           // H, accumulated
    std::optional<int> serving;   // current serving satellite
    double target_snr_db = 12.0;
    double demand_weight = 0.0;
};

enum class ArrivalDistribution { poisson_batch, deterministic };

// Per-cell arrival process: each cell receives a weight share of the total
// offered rate. poisson_batch draws a packet count per epoch; deterministic
// delivers the mean exactly.
struct ArrivalModel {
    double mean_total_rate_bps = 0.0;
    std::vector<double> weights;  // normalized, sums to 1
    ArrivalDistribution distribution = ArrivalDistribution::poisson_batch;
    double packet_bits = 10e3;
    double epoch_duration_s = 0.2;
    uint64_t seed = 0;

    void validate() const;
};

struct LyapunovConfig {
    double v = 100.0;
    double h_bar = 0.004;
};

// Queue recursion: max(Q - D, 0) + alpha.
double update_data_queue(double queue_bits, double served_bits, double arrived_bits);

// Arrivals for one epoch, one value per cell. The caller owns the stream and
// advances it epoch by epoch; identical streams reproduce identical samples.
std::vector<double> sample_arrivals(const ArrivalModel& model, int epoch, Rng& rng);

// 1 if the serving satellite changed between consecutive epochs, else 0.
// First epoch (no previous assignment) counts as no handover.
int handover_increment(std::span<const int> prev_serving,
                       std::span<const int> curr_serving, int cell);

// max(M + handover - h_bar, 0).
double update_virtual_queue(double virtual_queue, int handover, double h_bar);

// V * sum((D-Q)^2) + sum(M*m).
double epoch_penalty(std::span<const double> served_bits,
                     std::span<const double> queue_bits,
                     std::span<const double> virtual_queue,
                     std::span<const double> drift_increment, double v);

// sum((D-Q)^2); the running time average of this is the headline objective.
double p0_objective_term(std::span<const double> served_bits,
                         std::span<const double> queue_bits);

// CSV helpers for arrival regression traces (epoch, cell, bits).
void write_arrival_trace_csv(const std::string& path,
                             const std::vector<std::vector<double>>& per_epoch_bits);
std::vector<std::vector<double>> read_arrival_trace_csv(const std::string& path);

}  // namespace leobeam::traffic
