#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace leobeam::oracles {

// Exhaustive weighted maximum independent set; graphs up to 20 vertices.
struct WmisResult {
    std::vector<int> vertices;
    double weight = 0.0;
};
WmisResult brute_force_wmis(const std::vector<std::vector<int>>& adjacency,
                            std::span<const double> weights);

// Exhaustive binary maximization of an arbitrary fitness; dim up to 20.
struct BinaryResult {
    std::vector<uint8_t> assignment;
    double fitness = 0.0;
};
BinaryResult brute_force_binary(
    int dim, const std::function<double(std::span<const uint8_t>)>& fitness);

// Exhaustive assignment minimization over per-cell candidate satellites;
// candidate-space product up to 1e6 combinations.
struct AssignmentResult {
    std::vector<int> serving;
    double objective = 0.0;
};
AssignmentResult brute_force_assignment(
    const std::vector<std::vector<int>>& candidates_per_cell,
    const std::function<double(std::span<const int>)>& objective);

}  // namespace leobeam::oracles
