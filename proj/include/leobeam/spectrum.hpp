#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "leobeam/rng.hpp"

namespace leobeam::spectrum {

struct SparrowConfig {
    int population = 50;            // N_pop
    int max_iterations = 100;       // outer iterations
    int local_search_iterations = 10;
    int producers = 10;
    int spectators = 10;
    int mutation_bits = 4;
    int crossover_bits_max = 3;
    double safety_threshold = 0.8;
    double position_clamp = 5.0;
};

struct ShareVar {
    int sat = 0;
    int cell = 0;
    int slot = 0;
};

// One epoch's terrestrial-band sharing instance. Variables exist only for
// (satellite, cell, slot) combinations that are beam-scheduled with residual
// queue, laid out slot-major. pair_contrib holds the interference each
// distinct (satellite, cell) pair deposits at each cluster center when its
// share is on.
struct SharingProblem {
    int slots = 0;
    int cell_count = 0;
    int cluster_count = 0;
    std::vector<ShareVar> vars;      // slot-major
    std::vector<int> slot_begin;     // size slots+1
    std::vector<int> var_pair;       // var -> pair index
    std::vector<double> residual_queue_bits;  // per cell
    std::vector<double> slot_rate_bits;       // per cell, terrestrial band
    std::vector<int> cluster_budgets;         // per cluster, in slots
    std::vector<double> pair_contrib;         // pair-major [pair*cluster_count+j]
    double inr_threshold_w = 0.0;

    int dim() const { return static_cast<int>(vars.size()); }
    int pair_count() const {
        return cluster_count == 0
                   ? 0
                   : static_cast<int>(pair_contrib.size()) / cluster_count;
    }
};

// Fitness per the sharing objective: per cell, a constant offset minus the
// squared gap between terrestrial-band served bits and the residual queue;
// any budget violation collapses to the all-zeros value. Memoizes per-slot
// interference patterns, so repeated evaluations are cheap.
class FitnessEvaluator {
  public:
    explicit FitnessEvaluator(const SharingProblem& problem);

    double fitness(std::span<const uint8_t> z, bool* feasible_out = nullptr);
    bool feasible(std::span<const uint8_t> z);
    double baseline() const { return baseline_; }  // all-zeros value

  private:
    const std::vector<uint16_t>& interfered(int slot, uint32_t mask);

    const SharingProblem* p_;
    std::vector<int> survivors_;        // clusters that can ever be interfered
    std::vector<double> rows_;          // pair-major over survivors
    std::vector<int> slot_pair_local_;  // per var: local pair slot index
    std::vector<std::vector<int>> slot_pairs_;  // per slot: pair ids
    std::vector<std::unordered_map<uint32_t, std::vector<uint16_t>>> memo_;
    std::vector<int> counts_;  // scratch, per survivor
    std::vector<double> served_;  // scratch, per cell
    double baseline_ = 0.0;
    double omega_sum_ = 0.0;
};

double tent_step(double x);
std::vector<std::vector<double>> tent_init(int dim, int population, Rng& rng);

int binarize(double value, double mu);

// Crossover probability schedule over the outer iterations.
double crossover_rate(int iteration, int max_iterations);

void local_search(std::vector<uint8_t>& best, double& best_fitness, int rounds,
                  int bits_per_round, FitnessEvaluator& eval, Rng& rng);

// Single flip-to-one scan in variable order; a flip sticks when it keeps the
// budgets feasible and strictly improves fitness.
void greedy_post_pass(std::vector<uint8_t>& z, double& fitness_value,
                      FitnessEvaluator& eval);

struct SolveResult {
    std::vector<uint8_t> z;
    double fitness = 0.0;
    std::vector<double> best_history;  // global best after each iteration
};

SolveResult solve_sharing(const SharingProblem& problem, const SparrowConfig& config,
                          uint64_t seed);

}  // namespace leobeam::spectrum
