#include "leobeam/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace leobeam::spectrum {

FitnessEvaluator::FitnessEvaluator(const SharingProblem& problem) : p_(&problem) {
    const int pairs = p_->pair_count();
    const int clusters = p_->cluster_count;

    // A cluster can only ever be interfered if the largest slot-coincident
    // contribution sum can exceed the threshold. Bound it by the top-k pair
    // contributions, k = max pairs active in one slot.
    int max_active = 0;
    for (int t = 0; t < p_->slots; ++t)
        max_active = std::max(max_active, p_->slot_begin[t + 1] - p_->slot_begin[t]);
    std::vector<double> column;
    for (int j = 0; j < clusters; ++j) {
        column.clear();
        for (int pr = 0; pr < pairs; ++pr)
            column.push_back(p_->pair_contrib[static_cast<size_t>(pr) * clusters + j]);
        std::sort(column.begin(), column.end(), std::greater<>());
        double bound = 0.0;
        for (int k = 0; k < std::min<int>(max_active, column.size()); ++k)
            bound += column[k];
        if (bound > p_->inr_threshold_w) survivors_.push_back(j);
    }

    rows_.resize(static_cast<size_t>(pairs) * survivors_.size());
    for (int pr = 0; pr < pairs; ++pr)
        for (size_t k = 0; k < survivors_.size(); ++k)
            rows_[pr * survivors_.size() + k] =
                p_->pair_contrib[static_cast<size_t>(pr) * clusters + survivors_[k]];

    slot_pairs_.resize(p_->slots);
    slot_pair_local_.resize(p_->dim());
    for (int t = 0; t < p_->slots; ++t) {
        for (int v = p_->slot_begin[t]; v < p_->slot_begin[t + 1]; ++v) {
            slot_pair_local_[v] = static_cast<int>(slot_pairs_[t].size());
            slot_pairs_[t].push_back(p_->var_pair[v]);
        }
        if (slot_pairs_[t].size() > 31)
            throw std::invalid_argument("sharing problem: >31 variables in one slot");
    }
    memo_.resize(p_->slots);
    counts_.resize(survivors_.size());
    served_.resize(p_->cell_count);

    omega_sum_ = 0.0;
    baseline_ = 0.0;
    for (int c = 0; c < p_->cell_count; ++c) {
        const double q = p_->residual_queue_bits[c];
        const double full = p_->slot_rate_bits[c] * p_->slots;
        omega_sum_ += q * q + full * full;
        baseline_ -= q * q;
    }
    baseline_ += omega_sum_;
}

const std::vector<uint16_t>& FitnessEvaluator::interfered(int slot, uint32_t mask) {
    auto [it, fresh] = memo_[slot].try_emplace(mask);
    if (fresh) {
        const auto& pairs = slot_pairs_[slot];
        const size_t ns = survivors_.size();
        std::vector<double> inr(ns, 0.0);
        for (size_t i = 0; i < pairs.size(); ++i) {
            if (!(mask & (1u << i))) continue;
            const double* row = rows_.data() + static_cast<size_t>(pairs[i]) * ns;
            for (size_t k = 0; k < ns; ++k) inr[k] += row[k];
        }
        for (size_t k = 0; k < ns; ++k)
            if (inr[k] > p_->inr_threshold_w) it->second.push_back(static_cast<uint16_t>(k));
    }
    return it->second;
}

bool FitnessEvaluator::feasible(std::span<const uint8_t> z) {
    std::fill(counts_.begin(), counts_.end(), 0);
    for (int t = 0; t < p_->slots; ++t) {
        uint32_t mask = 0;
        for (int v = p_->slot_begin[t]; v < p_->slot_begin[t + 1]; ++v)
            if (z[v]) mask |= 1u << slot_pair_local_[v];
        if (mask == 0) continue;
        for (uint16_t k : interfered(t, mask)) ++counts_[k];
    }
    for (size_t k = 0; k < survivors_.size(); ++k)
        if (counts_[k] > p_->cluster_budgets[survivors_[k]]) return false;
    return true;
}

double FitnessEvaluator::fitness(std::span<const uint8_t> z, bool* feasible_out) {
    const bool ok = feasible(z);
    if (feasible_out != nullptr) *feasible_out = ok;
    if (!ok) return baseline_;

    std::fill(served_.begin(), served_.end(), 0.0);
    for (int v = 0; v < p_->dim(); ++v)
        if (z[v]) served_[p_->vars[v].cell] += p_->slot_rate_bits[p_->vars[v].cell];

    double value = omega_sum_;
    for (int c = 0; c < p_->cell_count; ++c) {
        const double gap = served_[c] - p_->residual_queue_bits[c];
        value -= gap * gap;
    }
    return value;
}

double tent_step(double x) { return x < 0.7 ? x / 0.7 : (1.0 - x) / 0.3; }

std::vector<std::vector<double>> tent_init(int dim, int population, Rng& rng) {
    std::vector<std::vector<double>> out(population, std::vector<double>(dim));
    for (int i = 0; i < population; ++i) {
        double x = rng.uniform();
        for (int j = 0; j < dim; ++j) {
            x = tent_step(x);
            if (x <= 1e-12 || x >= 1.0 - 1e-12) x = rng.uniform();  // leave fixed orbits
            out[i][j] = x;
        }
    }
    return out;
}

int binarize(double value, double mu) {
    return 1.0 / (1.0 + std::exp(-2.0 * value)) > mu ? 1 : 0;
}

double crossover_rate(int iteration, int max_iterations) {
    const double phase = 5.0 - 10.0 * static_cast<double>(iteration) / max_iterations;
    return 0.55 - 0.1 / (1.0 + std::exp(phase));
}

void local_search(std::vector<uint8_t>& best, double& best_fitness, int rounds,
                  int bits_per_round, FitnessEvaluator& eval, Rng& rng) {
    if (best.empty()) return;
    const int dim = static_cast<int>(best.size());
    std::vector<uint8_t> trial;
    for (int r = 0; r < rounds; ++r) {
        trial = best;
        for (int b = 0; b < bits_per_round; ++b) {
            const int idx = rng.uniform_int(0, dim - 1);
            trial[idx] ^= 1;
        }
        const double f = eval.fitness(trial);
        if (f > best_fitness) {
            best = trial;
            best_fitness = f;
        }
    }
}

void greedy_post_pass(std::vector<uint8_t>& z, double& fitness_value,
                      FitnessEvaluator& eval) {
    for (size_t v = 0; v < z.size(); ++v) {
        if (z[v]) continue;
        z[v] = 1;
        bool ok = false;
        const double f = eval.fitness(z, &ok);
        if (ok && f > fitness_value) {
            fitness_value = f;
        } else {
            z[v] = 0;
        }
    }
}

SolveResult solve_sharing(const SharingProblem& problem, const SparrowConfig& config,
                          uint64_t seed) {
    FitnessEvaluator eval(problem);
    const int dim = problem.dim();
    SolveResult result;
    result.z.assign(dim, 0);
    result.fitness = eval.baseline();
    if (dim == 0) return result;

    Rng rng(seed);
    const int n = config.population;
    std::vector<std::vector<double>> pos = tent_init(dim, n, rng);
    std::vector<std::vector<uint8_t>> bin(n, std::vector<uint8_t>(dim));
    std::vector<double> fit(n);

    auto rebinarize = [&](int i) {
        for (int j = 0; j < dim; ++j) bin[i][j] = binarize(pos[i][j], rng.uniform());
        fit[i] = eval.fitness(bin[i]);
    };

    // global best stays feasible: infeasible vectors tie the all-zeros
    // baseline and never beat it strictly
    std::vector<uint8_t> global = result.z;
    double global_fit = result.fitness;
    auto consider = [&](const std::vector<uint8_t>& z, double f) {
        if (f > global_fit) {
            global = z;
            global_fit = f;
        }
    };

    for (int i = 0; i < n; ++i) {
        rebinarize(i);
        consider(bin[i], fit[i]);
    }

    std::vector<int> rank(n);
    const double clamp = config.position_clamp;
    for (int iter = 0; iter < config.max_iterations; ++iter) {
        std::iota(rank.begin(), rank.end(), 0);
        std::stable_sort(rank.begin(), rank.end(),
                         [&](int a, int b) { return fit[a] > fit[b]; });
        const int best_i = rank[0];
        const int worst_i = rank[n - 1];

        local_search(bin[best_i], fit[best_i], config.local_search_iterations,
                     config.mutation_bits, eval, rng);
        consider(bin[best_i], fit[best_i]);

        const double upsilon = crossover_rate(iter, config.max_iterations);
        for (int r = n / 2; r < n; ++r) {
            const int i = rank[r];
            if (rng.uniform() >= upsilon) continue;
            const int flips = rng.uniform_int(1, config.crossover_bits_max);
            for (int b = 0; b < flips; ++b) bin[i][rng.uniform_int(0, dim - 1)] ^= 1;
            fit[i] = eval.fitness(bin[i]);
            consider(bin[i], fit[i]);
        }

        // role-based position update, then refresh binaries
        const double alarm = rng.uniform();
        const std::vector<double> best_pos = pos[best_i];
        const std::vector<double> worst_pos = pos[worst_i];
        const double f_best = fit[best_i];
        const double f_worst = fit[worst_i];
        for (int r = 0; r < n; ++r) {
            const int i = rank[r];
            auto& x = pos[i];
            if (r < config.producers) {
                if (alarm < config.safety_threshold) {
                    const double alpha = std::max(rng.uniform(), 1e-9);
                    const double scale =
                        std::exp(-(r + 1) / (alpha * config.max_iterations));
                    for (double& v : x) v *= scale;
                } else {
                    for (double& v : x) v += rng.normal();
                }
            } else if (r > n / 2) {
                const double denom = static_cast<double>(r + 1) * (r + 1);
                for (int j = 0; j < dim; ++j)
                    x[j] = rng.normal() * std::exp((worst_pos[j] - x[j]) / denom);
            } else {
                for (int j = 0; j < dim; ++j) {
                    const double step = std::abs(x[j] - best_pos[j]);
                    x[j] = best_pos[j] + (rng.uniform() < 0.5 ? step : -step);
                }
            }
        }
        for (int s = 0; s < config.spectators; ++s) {
            const int i = rng.uniform_int(0, n - 1);
            auto& x = pos[i];
            if (fit[i] > f_best) {
                for (int j = 0; j < dim; ++j)
                    x[j] = best_pos[j] + rng.normal() * std::abs(x[j] - best_pos[j]);
            } else {
                const double k = rng.uniform(-1.0, 1.0);
                const double denom = fit[i] - f_worst + 1e-12;
                for (int j = 0; j < dim; ++j)
                    x[j] += k * std::abs(x[j] - worst_pos[j]) / denom;
            }
        }
        for (int i = 0; i < n; ++i) {
            for (double& v : pos[i]) v = std::clamp(v, -clamp, clamp);
            rebinarize(i);
            consider(bin[i], fit[i]);
        }
        result.best_history.push_back(global_fit);
    }

    // greedy completion; never worse than the same pass from all-zeros
    std::vector<uint8_t> from_best = global;
    double from_best_fit = global_fit;
    greedy_post_pass(from_best, from_best_fit, eval);
    std::vector<uint8_t> from_zero(dim, 0);
    double from_zero_fit = eval.baseline();
    greedy_post_pass(from_zero, from_zero_fit, eval);

    if (from_zero_fit > from_best_fit) {
        result.z = std::move(from_zero);
        result.fitness = from_zero_fit;
    } else {
        result.z = std::move(from_best);
        result.fitness = from_best_fit;
    }
    return result;
}

}  // namespace leobeam::spectrum
