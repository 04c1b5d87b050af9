#pragma once

#include <span>
#include <vector>

#include "leobeam/linkbudget.hpp"

namespace leobeam::beamhop {

struct Vertex {
    int cell = 0;
    int sat = 0;
    int beam = 0;
    int pol = 0;
};

// Per-epoch conflict graph: B vertices per cell (one per beam of its serving
// satellite). Edges join vertices that cannot be scheduled together in one
// slot: same cell, same (satellite, beam), or a conflict pair on co-polarized
// beams.
struct ConflictGraph {
    int beams_per_satellite = 0;
    std::vector<Vertex> vertices;             // cell-major: vertex = cell*B + beam
    std::vector<std::vector<int>> adjacency;  // sorted neighbor lists

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    bool adjacent(int a, int b) const;
};

ConflictGraph build_conflict_graph(std::span<const int> serving,
                                   const link::ConflictSet& conflicts,
                                   int beams_per_satellite,
                                   int polarization_count);

// R^2 + Q^2 - (D-Q)^2; equals 2*R*Q for a scheduled candidate (D = R).
double vertex_weight(double queue_bits, double slot_rate_bits, double served_bits);

// w_v / (w_v + sum of accessible neighbor weights); 1 when isolated.
double weight_ratio(int v, const std::vector<std::vector<int>>& adjacency,
                    std::span<const double> weights,
                    std::span<const uint8_t> accessible);

// Greedy independent-set pass over accessible vertices in descending
// weight-ratio order (ties: higher weight, then lower index). Returns the
// selected vertices in selection order.
std::vector<int> greedy_wmis(const std::vector<std::vector<int>>& adjacency,
                             std::span<const double> weights,
                             std::vector<uint8_t> accessible);

// One slot of the hopping schedule: recomputes weights and accessibility from
// the remaining per-cell queues, runs the greedy pass, and drains the queues
// of the scheduled cells. Returns selected vertex ids.
std::vector<int> schedule_slot(const ConflictGraph& graph,
                               std::span<const double> slot_rate_bits,
                               std::vector<double>& queue_bits);

struct SlotSchedule {
    int slots = 0;
    std::vector<std::vector<link::ActiveBeam>> served;  // per slot

    long long busy_beam_slots() const {
        long long n = 0;
        for (const auto& s : served) n += static_cast<long long>(s.size());
        return n;
    }
};

struct EpochSchedule {
    SlotSchedule schedule;
    std::vector<double> residual_queue_bits;  // after satellite-band service
    std::vector<double> served_bits;          // satellite band, per cell
};

EpochSchedule beamhop_epoch(const ConflictGraph& graph,
                            std::span<const double> queue_bits, int slots,
                            std::span<const double> slot_rate_bits);

// Baseline: per slot, visit cells in descending remaining-queue order and
// give each the first feasible beam.
EpochSchedule greedy_hop_epoch(const ConflictGraph& graph,
                               std::span<const double> queue_bits, int slots,
                               std::span<const double> slot_rate_bits);

}  // namespace leobeam::beamhop
