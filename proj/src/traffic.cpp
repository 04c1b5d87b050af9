#include "leobeam/traffic.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace leobeam::traffic {

void ArrivalModel::validate() const {
    if (mean_total_rate_bps < 0.0)
        throw std::invalid_argument("arrival model: negative rate");
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("arrival model: negative weight");
        sum += w;
    }
    if (!weights.empty() && std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("arrival model: weights must sum to 1");
}

double update_data_queue(double queue_bits, double served_bits, double arrived_bits) {
    if (queue_bits < 0.0 || served_bits < 0.0 || arrived_bits < 0.0)
        throw std::invalid_argument("update_data_queue: negative input");
    return std::max(queue_bits - served_bits, 0.0) + arrived_bits;
}

std::vector<double> sample_arrivals(const ArrivalModel& model, int epoch, Rng& rng) {
    if (epoch < 1) throw std::invalid_argument("sample_arrivals: epoch starts at 1");
    std::vector<double> out(model.weights.size(), 0.0);
    const double epoch_bits = model.mean_total_rate_bps * model.epoch_duration_s;
    for (size_t c = 0; c < model.weights.size(); ++c) {
        const double mean = epoch_bits * model.weights[c];
        if (model.distribution == ArrivalDistribution::deterministic) {
            out[c] = mean;
        } else {
            out[c] = model.packet_bits *
                     static_cast<double>(rng.poisson(mean / model.packet_bits));
        }
    }
    return out;
}

int handover_increment(std::span<const int> prev_serving,
                       std::span<const int> curr_serving, int cell) {
    if (prev_serving.empty() || prev_serving[cell] < 0) return 0;
    return prev_serving[cell] == curr_serving[cell] ? 0 : 1;
}

double update_virtual_queue(double virtual_queue, int handover, double h_bar) {
    if (virtual_queue < 0.0)
        throw std::invalid_argument("update_virtual_queue: negative queue");
    return std::max(virtual_queue + handover - h_bar, 0.0);
}

double epoch_penalty(std::span<const double> served_bits,
                     std::span<const double> queue_bits,
                     std::span<const double> virtual_queue,
                     std::span<const double> drift_increment, double v) {
    if (served_bits.size() != queue_bits.size() ||
        virtual_queue.size() != drift_increment.size() ||
        served_bits.size() != virtual_queue.size())
        throw std::invalid_argument("epoch_penalty: length mismatch");
    double penalty = 0.0;
    double drift = 0.0;
    for (size_t c = 0; c < served_bits.size(); ++c) {
        const double diff = served_bits[c] - queue_bits[c];
        penalty += diff * diff;
        drift += virtual_queue[c] * drift_increment[c];
    }
    return v * penalty + drift;
}

double p0_objective_term(std::span<const double> served_bits,
                         std::span<const double> queue_bits) {
    double total = 0.0;
    for (size_t c = 0; c < served_bits.size(); ++c) {
        const double diff = served_bits[c] - queue_bits[c];
        total += diff * diff;
    }
    return total;
}

void write_arrival_trace_csv(const std::string& path,
                             const std::vector<std::vector<double>>& per_epoch_bits) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "epoch,cell,bits\n";
    char buf[64];
    for (size_t f = 0; f < per_epoch_bits.size(); ++f) {
        for (size_t c = 0; c < per_epoch_bits[f].size(); ++c) {
            std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g\n", f + 1, c,
                          per_epoch_bits[f][c]);
            out << buf;
        }
    }
}

std::vector<std::vector<double>> read_arrival_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<std::vector<double>> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        std::getline(ss, field, ',');
        const size_t epoch = std::stoul(field);
        std::getline(ss, field, ',');
        const size_t cell = std::stoul(field);
        std::getline(ss, field, ',');
        const double bits = std::stod(field);
        if (out.size() < epoch) out.resize(epoch);
        if (out[epoch - 1].size() <= cell) out[epoch - 1].resize(cell + 1, 0.0);
        out[epoch - 1][cell] = bits;
    }
    return out;
}

}  // namespace leobeam::traffic
