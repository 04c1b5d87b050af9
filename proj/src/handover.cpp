#include "leobeam/handover.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace leobeam::handover {

double utilization_rate(long long busy_beam_slots, int active_satellites,
                        int beams_per_satellite, int slots) {
    if (active_satellites <= 0) return 0.0;
    const double capacity = static_cast<double>(active_satellites) *
                            beams_per_satellite * slots;
    return static_cast<double>(busy_beam_slots) / capacity;
}

double imbalance_index(std::span<const double> satellite_loads) {
    double max_load = 0.0;
    double min_load = std::numeric_limits<double>::infinity();
    bool any = false;
    for (double load : satellite_loads) {
        any = true;
        max_load = std::max(max_load, load);
        min_load = std::min(min_load, load);
    }
    if (!any) throw std::invalid_argument("imbalance_index: no satellites");
    if (min_load <= 0.0) return std::numeric_limits<double>::infinity();
    return max_load / min_load;
}

TriggerDecision should_trigger(std::span<const int> cells_losing_visibility,
                               double sigma, double tau, const HandoverConfig& config) {
    TriggerDecision out;
    out.mandatory.assign(cells_losing_visibility.begin(), cells_losing_visibility.end());
    out.global_rebalance = sigma < config.sigma0 && tau < config.tau0;
    return out;
}

std::vector<double> entropy_weights(const std::vector<std::vector<double>>& columns) {
    const size_t attrs = columns.size();
    std::vector<double> weights(attrs, 0.0);
    if (attrs == 0) return weights;
    const size_t rows = columns[0].size();

    std::vector<double> divergence(attrs, 0.0);  // 1 - normalized entropy
    bool any_varying = false;
    for (size_t a = 0; a < attrs; ++a) {
        const auto& col = columns[a];
        const auto [lo_it, hi_it] = std::minmax_element(col.begin(), col.end());
        const double lo = *lo_it;
        const double hi = *hi_it;
        if (hi - lo < 1e-12) continue;  // constant column carries no information
        any_varying = true;

        double sum = 0.0;
        std::vector<double> norm(rows);
        for (size_t i = 0; i < rows; ++i) {
            norm[i] = (col[i] - lo) / (hi - lo);
            sum += norm[i];
        }
        double entropy = 0.0;
        for (size_t i = 0; i < rows; ++i) {
            const double p = norm[i] / sum;
            if (p > 0.0) entropy -= p * std::log(p);
        }
        entropy /= std::log(static_cast<double>(rows));
        divergence[a] = 1.0 - entropy;
    }

    if (!any_varying) {
        std::fill(weights.begin(), weights.end(), 1.0 / attrs);
        return weights;
    }
    const double total = std::accumulate(divergence.begin(), divergence.end(), 0.0);
    for (size_t a = 0; a < attrs; ++a) weights[a] = divergence[a] / total;
    return weights;
}

int entropy_pick(std::span<const int> candidate_sats,
                 std::span<const CandidateAttributes> attributes) {
    const size_t n = candidate_sats.size();
    if (n == 0) throw std::invalid_argument("entropy_pick: no candidates");
    if (n == 1) return candidate_sats[0];

    std::vector<std::vector<double>> columns(3, std::vector<double>(n));
    for (size_t i = 0; i < n; ++i) {
        columns[0][i] = 1.0 / (1.0 + attributes[i].load_bits);
        columns[1][i] = attributes[i].remaining_service_s;
        columns[2][i] = attributes[i].elevation_rad;
    }
    const std::vector<double> weights = entropy_weights(columns);

    // score on min-max normalized attributes
    std::vector<double> score(n, 0.0);
    for (size_t a = 0; a < 3; ++a) {
        const auto [lo_it, hi_it] =
            std::minmax_element(columns[a].begin(), columns[a].end());
        const double lo = *lo_it;
        const double hi = *hi_it;
        if (hi - lo < 1e-12) continue;
        for (size_t i = 0; i < n; ++i)
            score[i] += weights[a] * (columns[a][i] - lo) / (hi - lo);
    }

    size_t best = 0;
    for (size_t i = 1; i < n; ++i) {
        if (score[i] > score[best] + 1e-12 ||
            (std::abs(score[i] - score[best]) <= 1e-12 &&
             candidate_sats[i] < candidate_sats[best]))
            best = i;
    }
    return candidate_sats[best];
}

namespace {

// Incremental evaluator for the swap objective.
class ObjectiveState {
  public:
    ObjectiveState(const Assignment& assignment, const SwapContext& ctx)
        : ctx_(ctx), serving_(assignment.serving) {
        for (size_t i = 0; i < assignment.satellites.size(); ++i)
            sat_index_[assignment.satellites[i]] = static_cast<int>(i);
        loads_.assign(assignment.satellites.size(), 0.0);
        total_queue_ = 0.0;
        for (size_t c = 0; c < serving_.size(); ++c) {
            total_queue_ += ctx.queue_bits[c];
            loads_[index_of(serving_[c])] += ctx.queue_bits[c];
        }
        drift_ = 0.0;
        for (size_t c = 0; c < serving_.size(); ++c) drift_ += drift_term(c, serving_[c]);
    }

    int index_of(int sat) const { return sat_index_.at(sat); }

    double drift_term(size_t cell, int sat) const {
        const bool handover = !ctx_.previous_serving.empty() &&
                              ctx_.previous_serving[cell] >= 0 &&
                              ctx_.previous_serving[cell] != sat;
        const double m = (handover ? 1.0 : 0.0) - ctx_.h_bar;
        return ctx_.virtual_queue[cell] * m;
    }

    double objective() const {
        double load_term = 0.0;
        if (total_queue_ > 0.0) {
            for (double load : loads_) {
                const double share = (load - 0.5 * total_queue_) / total_queue_;
                load_term += share * share;
            }
        }
        return ctx_.load_weight * load_term + drift_;
    }

    double objective_if_moved(std::span<const std::pair<int, int>> moves) {
        apply(moves);
        const double value = objective();
        revert();
        return value;
    }

    void apply(std::span<const std::pair<int, int>> moves) {
        undo_.clear();
        for (const auto& [cell, sat] : moves) {
            undo_.push_back({cell, serving_[cell]});
            move(cell, sat);
        }
    }

    void commit() { undo_.clear(); }

    void revert() {
        for (auto it = undo_.rbegin(); it != undo_.rend(); ++it) move(it->first, it->second);
        undo_.clear();
    }

    int serving(int cell) const { return serving_[cell]; }

  private:
    void move(int cell, int sat) {
        const int old_sat = serving_[cell];
        if (old_sat == sat) return;
        drift_ -= drift_term(cell, old_sat);
        loads_[index_of(old_sat)] -= ctx_.queue_bits[cell];
        serving_[cell] = sat;
        loads_[index_of(sat)] += ctx_.queue_bits[cell];
        drift_ += drift_term(cell, sat);
    }

    const SwapContext& ctx_;
    std::vector<int> serving_;
    std::vector<double> loads_;
    std::unordered_map<int, int> sat_index_;
    double total_queue_ = 0.0;
    double drift_ = 0.0;
    std::vector<std::pair<int, int>> undo_;
};

}  // namespace

double delta_prime(std::span<const int> serving, std::span<const int> satellites,
                   std::span<const double> queue_bits,
                   std::span<const double> virtual_queue,
                   std::span<const int> previous_serving, double h_bar,
                   double load_weight) {
    Assignment a;
    a.serving.assign(serving.begin(), serving.end());
    a.satellites.assign(satellites.begin(), satellites.end());
    SwapContext ctx;
    ctx.queue_bits = queue_bits;
    ctx.virtual_queue = virtual_queue;
    ctx.previous_serving = previous_serving;
    ctx.h_bar = h_bar;
    ctx.load_weight = load_weight;
    return ObjectiveState(a, ctx).objective();
}

SwapStats swap_matching(Assignment& assignment, const SwapContext& context,
                        const HandoverConfig& config, Rng* perturb_rng) {
    const int cells = static_cast<int>(assignment.serving.size());
    const auto& candidates = *context.candidates;

    auto allowed = [&](int cell, int sat) {
        const auto& list = candidates[cell];
        return std::find(list.begin(), list.end(), sat) != list.end();
    };

    if (perturb_rng != nullptr && config.perturb_fraction > 0.0) {
        const int count = static_cast<int>(
            std::ceil(config.perturb_fraction * static_cast<double>(cells)));
        std::vector<int> order(cells);
        std::iota(order.begin(), order.end(), 0);
        for (int i = 0; i < count; ++i) {
            const int j = perturb_rng->uniform_int(i, cells - 1);
            std::swap(order[i], order[j]);
            const int cell = order[i];
            const auto& cands = candidates[cell];
            assignment.serving[cell] =
                cands[perturb_rng->uniform_int(0, static_cast<int>(cands.size()) - 1)];
        }
    }

    ObjectiveState state(assignment, context);
    SwapStats stats;
    double current = state.objective();
    stats.objective_history.push_back(current);

    bool improved = true;
    while (improved && stats.iterations < config.max_swap_iterations) {
        improved = false;
        ++stats.iterations;

        // first kind: exchange the satellites of a cell pair
        for (int c1 = 0; c1 < cells; ++c1) {
            for (int c2 = c1 + 1; c2 < cells; ++c2) {
                const int s1 = state.serving(c1);
                const int s2 = state.serving(c2);
                if (s1 == s2) continue;
                if (!allowed(c1, s2) || !allowed(c2, s1)) continue;
                const std::pair<int, int> moves[] = {{c1, s2}, {c2, s1}};
                const double candidate = state.objective_if_moved(moves);
                if (candidate < current) {
                    state.apply(moves);
                    state.commit();
                    current = candidate;
                    ++stats.accepted_swaps;
                    stats.objective_history.push_back(current);
                    improved = true;
                }
            }
        }
        // second kind: move one cell to another satellite
        for (int c = 0; c < cells; ++c) {
            for (int sat : assignment.satellites) {
                if (sat == state.serving(c)) continue;
                if (!allowed(c, sat)) continue;
                const std::pair<int, int> moves[] = {{c, sat}};
                const double candidate = state.objective_if_moved(moves);
                if (candidate < current) {
                    state.apply(moves);
                    state.commit();
                    current = candidate;
                    ++stats.accepted_swaps;
                    stats.objective_history.push_back(current);
                    improved = true;
                }
            }
        }
    }

    for (int c = 0; c < cells; ++c) assignment.serving[c] = state.serving(c);
    return stats;
}

}  // namespace leobeam::handover
