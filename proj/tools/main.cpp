#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <sstream>

#include "leobeam/config.hpp"
#include "leobeam/sim.hpp"
#include "leobeam/trace.hpp"

namespace fs = std::filesystem;
using namespace leobeam;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_violation = 1;
constexpr int exit_usage = 2;
constexpr int exit_infeasible = 3;

struct CommonOpts {
    std::string scenario;
    std::string out_dir = "out";
    std::vector<std::string> sets;
    std::vector<std::string> policies;
    std::optional<uint64_t> seed;
    std::optional<int> epochs;
};

sim::ScenarioConfig resolve_config(const CommonOpts& opts) {
    sim::ScenarioConfig cfg = config::load_scenario_file(opts.scenario);
    for (const std::string& kv : opts.sets) {
        const size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw config::ConfigError("--set expects key=value, got '" + kv + "'");
        config::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    for (const std::string& kv : opts.policies) {
        const size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw config::ConfigError("--policy expects stage=name, got '" + kv + "'");
        config::apply_override(cfg, "policy." + kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (opts.seed) config::apply_override(cfg, "sim.seed", std::to_string(*opts.seed));
    if (opts.epochs)
        config::apply_override(cfg, "sim.epochs", std::to_string(*opts.epochs));
    return cfg;
}

void write_summary(const std::string& path, const sim::RunSummary& s) {
    std::ofstream out(path);
    char buf[128];
    auto line = [&](const char* key, double v) {
        std::snprintf(buf, sizeof buf, "%s: %.10g\n", key, v);
        out << buf;
    };
    out << "epochs: " << s.epochs << "\n";
    out << "final_window: " << s.final_window << "\n";
    line("mean_final_queue_bits", s.mean_final_queue_bits);
    line("mean_final_p0", s.mean_final_p0);
    line("running_avg_p0", s.running_avg_p0);
    line("mean_handover_freq", s.mean_handover_freq);
    line("max_handover_freq", s.max_handover_freq);
    line("mean_virtual_queue_over_f", s.mean_virtual_queue_over_f);
    line("served_w1_bits", s.served_w1_bits);
    line("served_w2_bits", s.served_w2_bits);
}

int cmd_run(const CommonOpts& opts) {
    const sim::ScenarioConfig cfg = resolve_config(opts);
    fs::create_directories(opts.out_dir);

    std::ofstream metrics(opts.out_dir + "/metrics.csv");
    metrics << sim::metrics_csv_header() << "\n";
    trace::TraceWriter tracer(opts.out_dir + "/decisions.trace", cfg);

    sim::EpochHooks hooks;
    hooks.on_epoch = [&](const sim::EpochDecision& d, const sim::EpochContext&,
                         const sim::MetricsFrame& frame,
                         const std::vector<sim::SharingClusterStat>& sharing,
                         const std::vector<sim::HandoverEvent>& events) {
        metrics << sim::metrics_csv_row(frame) << "\n";
        tracer.write_epoch(d, sharing, events);
    };

    const sim::RunResult result = sim::run(cfg, hooks);
    write_summary(opts.out_dir + "/summary.txt", result.summary);
    std::cout << "run complete: " << result.frames.size() << " epochs, mean final queue "
              << result.summary.mean_final_queue_bits / 1e6 << " Mb, handover freq mean "
              << result.summary.mean_handover_freq << " max "
              << result.summary.max_handover_freq << "\n";
    return exit_ok;
}

int cmd_validate(const std::string& trace_path) {
    trace::TraceReader reader(trace_path);
    const sim::ScenarioConfig& cfg = reader.scenario();

    const std::vector<geom::GroundSite> cells = cfg.cells.make_cells();
    const std::vector<geom::GroundSite> clusters = cfg.clusters.make_clusters(cells);
    std::vector<geom::GroundSite> sites = cells;
    sites.insert(sites.end(), clusters.begin(), clusters.end());
    const geom::GeometryConfig geo{cfg.min_elevation_rad, cfg.radio.epoch_duration_s()};
    const std::vector<double> targets(cells.size(), cfg.radio.target_snr_db);

    int violations = 0;
    trace::TraceEpoch epoch;
    while (reader.next(epoch)) {
        const sim::EpochDecision& d = epoch.decision;
        const geom::ConstellationSnapshot snap =
            geom::build_snapshot(cfg.shell, sites, d.epoch, geo);
        std::vector<double> power(cells.size(), 0.0);
        for (size_t c = 0; c < cells.size(); ++c) {
            const int s = d.serving[c];
            if (s < 0) continue;
            power[c] = link::tx_power_for_target_snr(
                targets[c], link::channel_gain(snap.distance(s, c), cfg.radio.carrier_hz),
                cfg.radio.sat_bandwidth_hz, cfg.radio);
        }
        const link::ConflictSet conflicts =
            link::conflict_pairs(snap, d.serving, targets, cfg.radio);
        std::vector<int> budgets(d.cluster_loads.size(), 0);
        for (size_t j = 0; j < budgets.size(); ++j)
            budgets[j] = static_cast<int>(
                std::floor(cfg.radio.slots_per_epoch * (1.0 - d.cluster_loads[j])));

        sim::EpochContext ctx;
        ctx.snapshot = &snap;
        ctx.conflicts = &conflicts;
        ctx.tx_power_w = power;
        ctx.target_snr_db = targets;
        ctx.cluster_budgets = budgets;
        ctx.radio = &cfg.radio;

        for (const sim::Violation& v : sim::validate_decision(d, ctx)) {
            ++violations;
            std::cout << "violation: epoch " << v.epoch << " slot " << v.slot << " "
                      << v.constraint << ": " << v.detail << "\n";
        }
    }
    if (violations > 0) {
        std::cout << violations << " violation(s)\n";
        return exit_violation;
    }
    std::cout << "trace valid\n";
    return exit_ok;
}

struct SweepRow {
    double value = 0.0;
    uint64_t seed = 0;
    sim::RunSummary summary;
    double slope_ratio = 0.0;
    bool diverging = false;
};

int cmd_sweep(const CommonOpts& opts, const std::string& parameter,
              const std::vector<double>& values, std::vector<uint64_t> seeds,
              const std::string& out_file) {
    if (parameter != "V" && parameter != "arrival_rate")
        throw config::ConfigError("unknown sweep parameter '" + parameter + "'");
    const sim::ScenarioConfig base = resolve_config(opts);
    if (seeds.empty()) seeds.push_back(base.seed);

    std::vector<std::future<SweepRow>> futures;
    for (double value : values) {
        for (uint64_t seed : seeds) {
            futures.push_back(std::async(std::launch::async, [=, &base]() {
                sim::ScenarioConfig cfg = base;
                if (parameter == "V")
                    config::apply_override(cfg, "lyapunov.v", std::to_string(value));
                else
                    config::apply_override(cfg, "traffic.total_rate_gbps",
                                           std::to_string(value));
                config::apply_override(cfg, "sim.seed", std::to_string(seed));
                const sim::RunResult r = sim::run(cfg);

                SweepRow row;
                row.value = value;
                row.seed = seed;
                row.summary = r.summary;
                std::vector<double> tail;
                for (size_t i = r.frames.size() / 2; i < r.frames.size(); ++i)
                    tail.push_back(r.frames[i].mean_queue_bits);
                const double slope = sim::linear_slope(tail);
                double mean = 0.0;
                for (double q : tail) mean += q;
                mean /= std::max<size_t>(tail.size(), 1);
                row.slope_ratio = mean > 0.0 ? slope / mean : 0.0;
                row.diverging = row.slope_ratio > 0.01;
                return row;
            }));
        }
    }

    std::vector<SweepRow> rows;
    for (auto& f : futures) rows.push_back(f.get());

    fs::create_directories(opts.out_dir);
    const std::string path = out_file.empty() ? opts.out_dir + "/sweep.csv" : out_file;
    std::ofstream out(path);
    out << "parameter,value,seed,mean_final_queue_bits,mean_final_p0,"
           "mean_handover_freq,max_handover_freq,slope_ratio,diverging\n";
    char buf[256];
    for (const SweepRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.10g,%llu,%.10g,%.10g,%.10g,%.10g,%.10g,%d\n",
                      parameter.c_str(), r.value,
                      static_cast<unsigned long long>(r.seed),
                      r.summary.mean_final_queue_bits, r.summary.mean_final_p0,
                      r.summary.mean_handover_freq, r.summary.max_handover_freq,
                      r.slope_ratio, r.diverging ? 1 : 0);
        out << buf;
    }

    // aggregate per value
    std::cout << "value        mean_queue_Mb  handover_freq  diverging\n";
    for (double value : values) {
        double q = 0.0, h = 0.0;
        int n = 0, div = 0;
        for (const SweepRow& r : rows) {
            if (r.value != value) continue;
            q += r.summary.mean_final_queue_bits;
            h += r.summary.mean_handover_freq;
            div += r.diverging ? 1 : 0;
            ++n;
        }
        std::snprintf(buf, sizeof buf, "%-12.6g %-14.6g %-14.8g %d/%d\n", value,
                      q / n / 1e6, h / n, div, n);
        std::cout << buf;
    }
    std::cout << "sweep table written to " << path << "\n";
    return exit_ok;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out_file) {
    std::ostringstream table;
    table << "source,epochs,mean_final_queue_bits,mean_final_p0,final_mean_handover_freq\n";
    for (const std::string& path : inputs) {
        std::ifstream in(path);
        if (!in) throw config::ConfigError("cannot open metrics file: " + path);
        std::string line;
        if (!std::getline(in, line)) throw config::ConfigError(path + ": empty file");
        std::istringstream hs(line);
        std::map<std::string, int> col;
        std::string name;
        int idx = 0;
        while (std::getline(hs, name, ',')) col[name] = idx++;
        if (!col.count("mean_queue_bits") || !col.count("p0_term"))
            throw config::ConfigError(path + ": unrecognized metrics header");

        std::vector<std::vector<double>> data;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::vector<double> row;
            std::istringstream ls(line);
            std::string field;
            while (std::getline(ls, field, ',')) row.push_back(std::stod(field));
            data.push_back(std::move(row));
        }
        if (data.empty()) throw config::ConfigError(path + ": no data rows");
        const size_t window = std::max<size_t>(1, data.size() / 4);
        double q = 0.0, p0 = 0.0;
        for (size_t i = data.size() - window; i < data.size(); ++i) {
            q += data[i][col["mean_queue_bits"]];
            p0 += data[i][col["p0_term"]];
        }
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s,%zu,%.10g,%.10g,%.10g\n", path.c_str(),
                      data.size(), q / window, p0 / window,
                      data.back()[col["mean_handover_freq"]]);
        table << buf;
    }
    if (out_file.empty()) {
        std::cout << table.str();
    } else {
        std::ofstream out(out_file);
        out << table.str();
        std::cout << "report written to " << out_file << "\n";
    }
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LEO constellation beam management simulator"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string trace_path;
    std::string parameter;
    std::vector<double> values;
    std::vector<uint64_t> seeds;
    std::string out_file;
    std::vector<std::string> report_inputs;

    auto add_common = [&](CLI::App* cmd, bool scenario_required) {
        cmd->add_option("--scenario", opts.scenario, "scenario file")
            ->required(scenario_required);
        cmd->add_option("--out", opts.out_dir, "output directory");
        cmd->add_option("--set", opts.sets, "override key=value")->take_all();
        cmd->add_option("--policy", opts.policies, "override stage=name")->take_all();
        cmd->add_option("--seed", opts.seed, "simulation seed");
        cmd->add_option("--epochs", opts.epochs, "epoch count");
    };

    CLI::App* run = app.add_subcommand("run", "run one scenario");
    add_common(run, true);

    CLI::App* validate = app.add_subcommand("validate", "validate a decisions trace");
    validate->add_option("trace", trace_path, "trace file")->required();

    CLI::App* sweep = app.add_subcommand("sweep", "sweep a parameter across runs");
    add_common(sweep, true);
    sweep->add_option("--parameter", parameter, "V or arrival_rate")->required();
    sweep->add_option("--values", values, "parameter values")->required()->delimiter(',');
    sweep->add_option("--seeds", seeds, "seed list")->delimiter(',');
    sweep->add_option("--table", out_file, "output table path");

    CLI::App* report = app.add_subcommand("report", "summarize metrics files");
    report->add_option("--inputs", report_inputs, "metrics.csv files")
        ->required()
        ->delimiter(',');
    report->add_option("--table", out_file, "output table path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (run->parsed()) return cmd_run(opts);
        if (validate->parsed()) return cmd_validate(trace_path);
        if (sweep->parsed()) return cmd_sweep(opts, parameter, values, seeds, out_file);
        if (report->parsed()) return cmd_report(report_inputs, out_file);
    } catch (const config::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const sim::ScenarioError& e) {
        std::cerr << "infeasible scenario: " << e.what() << "\n";
        return exit_infeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}
