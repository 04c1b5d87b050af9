#pragma once

#include <functional>
#include <span>
#include <vector>

#include "leobeam/rng.hpp"

namespace leobeam::handover {

struct HandoverConfig {
    double sigma0 = 0.9;  // utilization trigger threshold
    double tau0 = 2.0;    // imbalance trigger threshold
    int max_swap_iterations = 10;
    double perturb_fraction = 0.1;
    enum class WeightsMode { entropy, fixed } weights_mode = WeightsMode::entropy;
    // Scale on the load-balance term of the swap objective relative to the
    // virtual-queue drift term.
    double load_weight = 1.0;
};

// Serving map plus the satellite universe the load terms range over.
struct Assignment {
    std::vector<int> serving;     // per cell; -1 = unassigned
    std::vector<int> satellites;  // satellite ids considered this epoch
};

// Occupied beam-slots over the total available on active satellites.
double utilization_rate(long long busy_beam_slots, int active_satellites,
                        int beams_per_satellite, int slots);

// max/min load over satellites with positive load share; +inf when some
// active satellite has zero load.
double imbalance_index(std::span<const double> satellite_loads);

struct TriggerDecision {
    std::vector<int> mandatory;  // cells whose serving satellite left view
    bool global_rebalance = false;
};

TriggerDecision should_trigger(std::span<const int> cells_losing_visibility,
                               double sigma, double tau, const HandoverConfig& config);

// Entropy-weight method over an attribute matrix (column = attribute,
// row = candidate). Constant columns get weight zero; if every column is
// constant the weights are uniform.
std::vector<double> entropy_weights(const std::vector<std::vector<double>>& columns);

struct CandidateAttributes {
    double load_bits = 0.0;
    double remaining_service_s = 0.0;
    double elevation_rad = 0.0;
};

// Best candidate by entropy-weighted score; ties break to the lowest
// satellite id. Attributes: 1/(1+load), remaining service time, elevation.
int entropy_pick(std::span<const int> candidate_sats,
                 std::span<const CandidateAttributes> attributes);

// Inputs shared by the swap objective.
struct SwapContext {
    std::span<const double> queue_bits;        // Q per cell
    std::span<const double> virtual_queue;     // M per cell
    std::span<const int> previous_serving;     // empty on the first epoch
    const std::vector<std::vector<int>>* candidates = nullptr;  // per cell
    double h_bar = 0.004;
    double load_weight = 1.0;
};

// Swap objective: load_weight * sum over satellites of the squared normalized
// load share, plus the virtual-queue drift sum. Zero total queue makes the
// load term zero.
double delta_prime(std::span<const int> serving, std::span<const int> satellites,
                   std::span<const double> queue_bits,
                   std::span<const double> virtual_queue,
                   std::span<const int> previous_serving, double h_bar,
                   double load_weight = 1.0);

struct SwapStats {
    int iterations = 0;
    int accepted_swaps = 0;
    std::vector<double> objective_history;  // objective after each accepted swap
};

// Two-kind swap matching: exchange pairs, then single-cell moves, repeated
// until no improving feasible swap or the iteration cap. Visibility
// feasibility comes from the per-cell candidate lists. A non-null rng enables
// the random pre-perturbation.
SwapStats swap_matching(Assignment& assignment, const SwapContext& context,
                        const HandoverConfig& config, Rng* perturb_rng);

}  // namespace leobeam::handover
