#include "leobeam/oracles.hpp"

#include <stdexcept>

namespace leobeam::oracles {

WmisResult brute_force_wmis(const std::vector<std::vector<int>>& adjacency,
                            std::span<const double> weights) {
    const int n = static_cast<int>(adjacency.size());
    if (n > 20) throw std::invalid_argument("brute_force_wmis: more than 20 vertices");
    if (weights.size() != adjacency.size())
        throw std::invalid_argument("brute_force_wmis: weight count mismatch");

    std::vector<uint32_t> neighbor_mask(n, 0);
    for (int v = 0; v < n; ++v)
        for (int u : adjacency[v]) neighbor_mask[v] |= 1u << u;

    uint32_t best_set = 0;
    double best_weight = 0.0;
    const uint32_t limit = n == 0 ? 1 : (1u << n);
    for (uint32_t set = 0; set < limit; ++set) {
        double w = 0.0;
        bool independent = true;
        for (int v = 0; v < n && independent; ++v) {
            if (!(set & (1u << v))) continue;
            if (neighbor_mask[v] & set) {
                independent = false;
                break;
            }
            w += weights[v];
        }
        if (independent && w > best_weight) {
            best_weight = w;
            best_set = set;
        }
    }
    WmisResult out;
    out.weight = best_weight;
    for (int v = 0; v < n; ++v)
        if (best_set & (1u << v)) out.vertices.push_back(v);
    return out;
}

BinaryResult brute_force_binary(
    int dim, const std::function<double(std::span<const uint8_t>)>& fitness) {
    if (dim > 20) throw std::invalid_argument("brute_force_binary: dim > 20");
    BinaryResult best;
    best.assignment.assign(dim, 0);
    std::vector<uint8_t> z(dim, 0);
    best.fitness = fitness(z);
    const uint32_t limit = dim == 0 ? 1 : (1u << dim);
    for (uint32_t bits = 1; bits < limit; ++bits) {
        for (int i = 0; i < dim; ++i) z[i] = (bits >> i) & 1u;
        const double f = fitness(z);
        if (f > best.fitness) {
            best.fitness = f;
            best.assignment = z;
        }
    }
    return best;
}

AssignmentResult brute_force_assignment(
    const std::vector<std::vector<int>>& candidates_per_cell,
    const std::function<double(std::span<const int>)>& objective) {
    double combos = 1.0;
    for (const auto& cands : candidates_per_cell) {
        if (cands.empty())
            throw std::invalid_argument("brute_force_assignment: cell with no candidate");
        combos *= static_cast<double>(cands.size());
        if (combos > 1e6)
            throw std::invalid_argument("brute_force_assignment: too many combinations");
    }

    const int cells = static_cast<int>(candidates_per_cell.size());
    std::vector<int> index(cells, 0);
    std::vector<int> serving(cells);
    AssignmentResult best;
    bool first = true;
    while (true) {
        for (int c = 0; c < cells; ++c) serving[c] = candidates_per_cell[c][index[c]];
        const double value = objective(serving);
        if (first || value < best.objective) {
            best.objective = value;
            best.serving = serving;
            first = false;
        }
        int c = 0;
        while (c < cells) {
            if (++index[c] < static_cast<int>(candidates_per_cell[c].size())) break;
            index[c] = 0;
            ++c;
        }
        if (c == cells) break;
    }
    return best;
}

}  // namespace leobeam::oracles
