#pragma once

#include <fstream>
#include <string>

#include "leobeam/sim.hpp"

namespace leobeam::trace {

// Line-delimited JSON decision trace. The header embeds the resolved
// scenario, so a trace is self-contained for later validation.
class TraceWriter {
  public:
    TraceWriter(const std::string& path, const sim::ScenarioConfig& config);

    void write_epoch(const sim::EpochDecision& decision,
                     const std::vector<sim::SharingClusterStat>& sharing,
                     const std::vector<sim::HandoverEvent>& events);

  private:
    std::ofstream out_;
};

struct TraceEpoch {
    sim::EpochDecision decision;
};

class TraceReader {
  public:
    explicit TraceReader(const std::string& path);

    const sim::ScenarioConfig& scenario() const { return scenario_; }
    bool next(TraceEpoch& epoch);  // false at end of file

  private:
    std::ifstream in_;
    sim::ScenarioConfig scenario_;
};

}  // namespace leobeam::trace
