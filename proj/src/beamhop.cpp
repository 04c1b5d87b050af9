#include "leobeam/beamhop.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace leobeam::beamhop {

bool ConflictGraph::adjacent(int a, int b) const {
    const auto& nb = adjacency[a];
    return std::binary_search(nb.begin(), nb.end(), b);
}

ConflictGraph build_conflict_graph(std::span<const int> serving,
                                   const link::ConflictSet& conflicts,
                                   int beams_per_satellite,
                                   int polarization_count) {
    const int cells = static_cast<int>(serving.size());
    const int b = beams_per_satellite;
    ConflictGraph g;
    g.beams_per_satellite = b;
    g.vertices.reserve(static_cast<size_t>(cells) * b);
    for (int c = 0; c < cells; ++c)
        for (int k = 0; k < b; ++k)
            g.vertices.push_back({c, serving[c], k, k % polarization_count});

    g.adjacency.assign(g.vertices.size(), {});
    auto connect = [&](int u, int v) {
        g.adjacency[u].push_back(v);
        g.adjacency[v].push_back(u);
    };
    for (int c = 0; c < cells; ++c) {
        // one beam per cell per slot
        for (int i = 0; i < b; ++i)
            for (int j = i + 1; j < b; ++j) connect(c * b + i, c * b + j);
        for (int c2 = c + 1; c2 < cells; ++c2) {
            const bool same_sat = serving[c] == serving[c2];
            const bool conflicting = conflicts.conflicts(c, c2);
            if (!same_sat && !conflicting) continue;
            for (int i = 0; i < b; ++i) {
                for (int j = 0; j < b; ++j) {
                    const int u = c * b + i;
                    const int v = c2 * b + j;
                    if (same_sat && i == j) {
                        connect(u, v);  // a beam serves one cell at a time
                    } else if (conflicting &&
                               g.vertices[u].pol == g.vertices[v].pol) {
                        connect(u, v);
                    }
                }
            }
        }
    }
    for (auto& nb : g.adjacency) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    return g;
}

double vertex_weight(double queue_bits, double slot_rate_bits, double served_bits) {
    const double diff = served_bits - queue_bits;
    return slot_rate_bits * slot_rate_bits + queue_bits * queue_bits - diff * diff;
}

double weight_ratio(int v, const std::vector<std::vector<int>>& adjacency,
                    std::span<const double> weights,
                    std::span<const uint8_t> accessible) {
    double neighbor_sum = 0.0;
    for (int u : adjacency[v])
        if (accessible[u]) neighbor_sum += weights[u];
    return weights[v] / (weights[v] + neighbor_sum);
}

std::vector<int> greedy_wmis(const std::vector<std::vector<int>>& adjacency,
                             std::span<const double> weights,
                             std::vector<uint8_t> accessible) {
    const int n = static_cast<int>(adjacency.size());
    std::vector<double> ratio(n, 0.0);
    std::vector<int> order;
    order.reserve(n);
    for (int v = 0; v < n; ++v) {
        if (!accessible[v]) continue;
        ratio[v] = weight_ratio(v, adjacency, weights, accessible);
        order.push_back(v);
    }
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (ratio[a] != ratio[b]) return ratio[a] > ratio[b];
        if (weights[a] != weights[b]) return weights[a] > weights[b];
        return a < b;
    });

    std::vector<int> selected;
    for (int v : order) {
        if (!accessible[v]) continue;
        selected.push_back(v);
        accessible[v] = 0;
        for (int u : adjacency[v]) accessible[u] = 0;
    }
    return selected;
}

std::vector<int> schedule_slot(const ConflictGraph& graph,
                               std::span<const double> slot_rate_bits,
                               std::vector<double>& queue_bits) {
    const int n = graph.vertex_count();
    std::vector<double> weights(n, 0.0);
    std::vector<uint8_t> accessible(n, 0);
    for (int v = 0; v < n; ++v) {
        const int c = graph.vertices[v].cell;
        if (queue_bits[c] <= 0.0) continue;
        accessible[v] = 1;
        weights[v] = vertex_weight(queue_bits[c], slot_rate_bits[c], slot_rate_bits[c]);
    }
    std::vector<int> selected = greedy_wmis(graph.adjacency, weights, std::move(accessible));
    for (int v : selected) {
        const int c = graph.vertices[v].cell;
        queue_bits[c] = std::max(queue_bits[c] - slot_rate_bits[c], 0.0);
    }
    return selected;
}

EpochSchedule beamhop_epoch(const ConflictGraph& graph,
                            std::span<const double> queue_bits, int slots,
                            std::span<const double> slot_rate_bits) {
    EpochSchedule out;
    out.schedule.slots = slots;
    out.schedule.served.resize(slots);
    out.residual_queue_bits.assign(queue_bits.begin(), queue_bits.end());
    out.served_bits.assign(queue_bits.size(), 0.0);
    for (int t = 0; t < slots; ++t) {
        std::vector<double> before = out.residual_queue_bits;
        const std::vector<int> picked =
            schedule_slot(graph, slot_rate_bits, out.residual_queue_bits);
        auto& slot = out.schedule.served[t];
        slot.reserve(picked.size());
        for (int v : picked) {
            const Vertex& vert = graph.vertices[v];
            slot.push_back({vert.sat, vert.cell, vert.beam});
            out.served_bits[vert.cell] +=
                before[vert.cell] - out.residual_queue_bits[vert.cell];
        }
        std::sort(slot.begin(), slot.end(), [](const auto& a, const auto& b) {
            if (a.sat != b.sat) return a.sat < b.sat;
            return a.beam < b.beam;
        });
    }
    return out;
}

EpochSchedule greedy_hop_epoch(const ConflictGraph& graph,
                               std::span<const double> queue_bits, int slots,
                               std::span<const double> slot_rate_bits) {
    EpochSchedule out;
    out.schedule.slots = slots;
    out.schedule.served.resize(slots);
    out.residual_queue_bits.assign(queue_bits.begin(), queue_bits.end());
    out.served_bits.assign(queue_bits.size(), 0.0);

    const int cells = static_cast<int>(queue_bits.size());
    const int b = graph.beams_per_satellite;
    std::vector<int> cell_order(cells);
    std::iota(cell_order.begin(), cell_order.end(), 0);

    for (int t = 0; t < slots; ++t) {
        auto& queues = out.residual_queue_bits;
        std::stable_sort(cell_order.begin(), cell_order.end(),
                         [&](int a, int bb) { return queues[a] > queues[bb]; });
        std::vector<int> selected;
        auto& slot = out.schedule.served[t];
        for (int c : cell_order) {
            if (queues[c] <= 0.0) break;
            for (int k = 0; k < b; ++k) {
                const int v = c * b + k;
                bool ok = true;
                for (int u : selected) {
                    if (graph.adjacent(v, u)) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) continue;
                selected.push_back(v);
                const double served = std::min(queues[c], slot_rate_bits[c]);
                queues[c] -= served;
                out.served_bits[c] += served;
                slot.push_back({graph.vertices[v].sat, c, k});
                break;
            }
        }
        std::sort(slot.begin(), slot.end(), [](const auto& a, const auto& bb) {
            if (a.sat != bb.sat) return a.sat < bb.sat;
            return a.beam < bb.beam;
        });
    }
    return out;
}

}  // namespace leobeam::beamhop
