#include "leobeam/trace.hpp"

#include <json.hpp>

#include "leobeam/config.hpp"

namespace leobeam::trace {

using nlohmann::json;

TraceWriter::TraceWriter(const std::string& path, const sim::ScenarioConfig& config)
    : out_(path) {
    if (!out_) throw std::runtime_error("cannot open trace file: " + path);
    json header;
    header["type"] = "header";
    header["version"] = 1;
    header["scenario"] = config::serialize_scenario(config);
    out_ << header.dump() << "\n";
}

void TraceWriter::write_epoch(const sim::EpochDecision& decision,
                              const std::vector<sim::SharingClusterStat>& sharing,
                              const std::vector<sim::HandoverEvent>& events) {
    json rec;
    rec["type"] = "epoch";
    rec["f"] = decision.epoch;
    rec["x"] = decision.serving;

    json slots = json::array();
    for (const auto& slot : decision.schedule.served) {
        json entries = json::array();
        for (const auto& a : slot) entries.push_back({a.sat, a.cell, a.beam});
        slots.push_back(std::move(entries));
    }
    rec["y"] = std::move(slots);

    json shares = json::array();
    for (const auto& z : decision.shares) shares.push_back({z.sat, z.cell, z.slot});
    rec["z"] = std::move(shares);
    rec["loads"] = decision.cluster_loads;

    json stats = json::array();
    for (const auto& s : sharing) stats.push_back({s.cluster, s.interfered_slots, s.budget});
    rec["sharing"] = std::move(stats);

    json evs = json::array();
    for (const auto& e : events)
        evs.push_back({e.cell, e.from_sat, e.to_sat,
                       e.reason == sim::HandoverEvent::Reason::visibility ? 0 : 1});
    rec["handovers"] = std::move(evs);

    out_ << rec.dump() << "\n";
}

TraceReader::TraceReader(const std::string& path) : in_(path) {
    if (!in_) throw std::runtime_error("cannot open trace file: " + path);
    std::string line;
    if (!std::getline(in_, line))
        throw std::runtime_error("trace is missing its header line");
    const json header = json::parse(line);
    if (header.value("type", "") != "header")
        throw std::runtime_error("trace does not start with a header record");
    scenario_ = config::parse_scenario_text(header.at("scenario").get<std::string>(),
                                            path + "#header");
}

bool TraceReader::next(TraceEpoch& epoch) {
    std::string line;
    while (std::getline(in_, line)) {
        if (line.empty()) continue;
        const json rec = json::parse(line);
        if (rec.value("type", "") != "epoch") continue;
        epoch.decision = sim::EpochDecision{};
        epoch.decision.epoch = rec.at("f").get<int>();
        epoch.decision.serving = rec.at("x").get<std::vector<int>>();
        const auto& slots = rec.at("y");
        epoch.decision.schedule.slots = static_cast<int>(slots.size());
        epoch.decision.schedule.served.resize(slots.size());
        for (size_t t = 0; t < slots.size(); ++t) {
            for (const auto& e : slots[t]) {
                epoch.decision.schedule.served[t].push_back(
                    {e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>()});
            }
        }
        for (const auto& e : rec.at("z")) {
            epoch.decision.shares.push_back(
                {e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>()});
        }
        epoch.decision.cluster_loads = rec.at("loads").get<std::vector<double>>();
        return true;
    }
    return false;
}

}  // namespace leobeam::trace
