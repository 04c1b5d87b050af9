#include "leobeam/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

namespace leobeam::sim {

std::vector<geom::GroundSite> CellLayout::make_cells() const {
    std::vector<geom::GroundSite> out;
    out.reserve(count());
    const double row_pitch = spacing_m * std::sqrt(3.0) / 2.0;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const double x = (c + 0.5 * (r % 2)) * spacing_m;
            const double y = r * row_pitch;
            geom::GroundSite site;
            site.latitude_rad = anchor_lat_rad + y / geom::earth_radius_m;
            site.longitude_rad =
                anchor_lon_rad + x / (geom::earth_radius_m * std::cos(anchor_lat_rad));
            site.kind = geom::SiteKind::beam_cell;
            out.push_back(site);
        }
    }
    return out;
}

std::vector<geom::GroundSite> ClusterLayout::make_clusters(
    const std::vector<geom::GroundSite>& cells) const {
    std::vector<geom::GroundSite> out;
    if (count == 0) return out;
    if (cells.empty()) throw std::invalid_argument("cluster layout: no cells");
    Rng rng(layout_seed);
    std::vector<Vec3> placed;
    out.reserve(count);
    for (int k = 0; k < count; ++k) {
        const geom::GroundSite& parent = cells[k % cells.size()];
        bool ok = false;
        for (int attempt = 0; attempt < 5000 && !ok; ++attempt) {
            const double radius = scatter_radius_m * std::sqrt(rng.uniform());
            const double angle = 2.0 * M_PI * rng.uniform();
            geom::GroundSite site;
            site.latitude_rad =
                parent.latitude_rad + radius * std::sin(angle) / geom::earth_radius_m;
            site.longitude_rad =
                parent.longitude_rad + radius * std::cos(angle) /
                                           (geom::earth_radius_m *
                                            std::cos(parent.latitude_rad));
            site.kind = geom::SiteKind::cluster_center;
            const Vec3 pos = geom::site_position(site);
            ok = true;
            for (const Vec3& other : placed) {
                if (distance(pos, other) < min_separation_m) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                placed.push_back(pos);
                out.push_back(site);
            }
        }
        if (!ok)
            throw std::runtime_error(
                "cluster layout: cannot satisfy the minimum separation");
    }
    return out;
}

void ScenarioConfig::validate() const {
    if (shell.plane_count < 1 || shell.sats_per_plane < 1)
        throw std::invalid_argument("orbit shell: empty constellation");
    if (shell.altitude_m <= 0.0)
        throw std::invalid_argument("orbit shell: altitude must be positive");
    if (shell.inclination_rad < 0.0 || shell.inclination_rad > M_PI)
        throw std::invalid_argument("orbit shell: inclination out of range");
    if (cells.rows < 1 || cells.cols < 1)
        throw std::invalid_argument("cell layout: empty grid");
    if (radio.slots_per_epoch < 1)
        throw std::invalid_argument("radio: at least one slot per epoch");
    if (radio.polarization_count != 1 && radio.polarization_count != 2)
        throw std::invalid_argument("radio: polarization count must be 1 or 2");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (lyapunov.h_bar <= 0.0 || lyapunov.h_bar >= 1.0)
        throw std::invalid_argument("handover threshold must lie in (0,1)");
    if (lyapunov.v < 0.0) throw std::invalid_argument("penalty weight must be >= 0");
    if (handover_cfg.sigma0 < 0.0 || handover_cfg.sigma0 > 1.0)
        throw std::invalid_argument("sigma0 out of [0,1]");
    if (handover_cfg.tau0 < 1.0) throw std::invalid_argument("tau0 must be >= 1");
    if (handover_cfg.max_swap_iterations < 1)
        throw std::invalid_argument("swap iteration cap must be >= 1");
    if (sparrow.population < 2) throw std::invalid_argument("population must be >= 2");
    if (sparrow.producers + sparrow.spectators > sparrow.population)
        throw std::invalid_argument("producers + spectators exceed population");
    if (sparrow.local_search_iterations >= sparrow.population)
        throw std::invalid_argument("local search iterations must stay below population");
    if (cluster_loads.load_min < 0.0 || cluster_loads.load_max > 1.0 ||
        cluster_loads.load_min > cluster_loads.load_max)
        throw std::invalid_argument("cluster load range invalid");
    if (static_cast<int>(arrivals.weights.size()) != cells.count())
        throw std::invalid_argument("arrival weights must match the cell count");
    arrivals.validate();
}

namespace {

std::vector<Violation> check_schedule(const EpochDecision& d, const EpochContext& ctx) {
    std::vector<Violation> out;
    const auto& snap = *ctx.snapshot;
    const auto& radio = *ctx.radio;
    const int cells = snap.cell_count;

    for (int c = 0; c < cells; ++c) {
        const int s = d.serving[c];
        if (s < 0 || !snap.visible(s, c)) {
            out.push_back({constraint::serving_visibility, d.epoch, -1,
                           "cell " + std::to_string(c) + " served by " +
                               std::to_string(s) + " outside visibility"});
        }
    }

    for (int t = 0; t < d.schedule.slots; ++t) {
        const auto& slot = d.schedule.served[t];
        std::map<int, int> beams_per_cell;
        std::map<std::pair<int, int>, int> cells_per_beam;
        std::map<int, int> beams_per_sat;
        for (const auto& a : slot) {
            ++beams_per_cell[a.cell];
            ++cells_per_beam[{a.sat, a.beam}];
            ++beams_per_sat[a.sat];
            if (d.serving[a.cell] != a.sat)
                out.push_back({constraint::schedule_matches_serving, d.epoch, t,
                               "cell " + std::to_string(a.cell) +
                                   " scheduled under satellite " +
                                   std::to_string(a.sat)});
        }
        for (const auto& [cell, n] : beams_per_cell) {
            if (n > 1)
                out.push_back({constraint::cell_single_beam, d.epoch, t,
                               "cell " + std::to_string(cell) + " held " +
                                   std::to_string(n) + " beams"});
        }
        for (const auto& [key, n] : cells_per_beam) {
            if (n > 1)
                out.push_back({constraint::beam_single_cell, d.epoch, t,
                               "satellite " + std::to_string(key.first) + " beam " +
                                   std::to_string(key.second) + " served " +
                                   std::to_string(n) + " cells"});
        }
        for (const auto& [sat, n] : beams_per_sat) {
            if (n > radio.beams_per_satellite)
                out.push_back({constraint::satellite_beam_budget, d.epoch, t,
                               "satellite " + std::to_string(sat) + " ran " +
                                   std::to_string(n) + " beams"});
        }
        for (size_t i = 0; i < slot.size(); ++i) {
            for (size_t j = i + 1; j < slot.size(); ++j) {
                const auto& a = slot[i];
                const auto& b = slot[j];
                if (radio.beam_polarization(a.beam) != radio.beam_polarization(b.beam))
                    continue;
                if (ctx.conflicts->conflicts(a.cell, b.cell))
                    out.push_back({constraint::conflict_pair, d.epoch, t,
                                   "cells " + std::to_string(a.cell) + "," +
                                       std::to_string(b.cell) +
                                       " co-scheduled on one polarization"});
            }
        }
    }
    return out;
}

std::vector<Violation> check_shares(const EpochDecision& d, const EpochContext& ctx) {
    std::vector<Violation> out;
    const auto& snap = *ctx.snapshot;
    const auto& radio = *ctx.radio;
    const int clusters = snap.site_count() - snap.cell_count;

    std::vector<std::vector<link::ActiveBeam>> active(d.schedule.slots);
    std::set<std::tuple<int, int, int>> seen;
    for (const auto& share : d.shares) {
        if (share.slot < 0 || share.slot >= d.schedule.slots) {
            out.push_back({constraint::share_requires_beam, d.epoch, share.slot,
                           "share outside the epoch"});
            continue;
        }
        if (!seen.insert({share.sat, share.cell, share.slot}).second) {
            out.push_back({constraint::share_requires_beam, d.epoch, share.slot,
                           "duplicate share for cell " + std::to_string(share.cell)});
            continue;
        }
        bool scheduled = false;
        for (const auto& a : d.schedule.served[share.slot]) {
            if (a.sat == share.sat && a.cell == share.cell) {
                scheduled = true;
                break;
            }
        }
        if (!scheduled) {
            out.push_back({constraint::share_requires_beam, d.epoch, share.slot,
                           "cell " + std::to_string(share.cell) +
                               " shares spectrum without a beam"});
        }
        active[share.slot].push_back({share.sat, share.cell, 0});
    }

    const double threshold = radio.inr_terr_threshold_w();
    for (int j = 0; j < clusters; ++j) {
        const int site = snap.cell_count + j;
        int interfered = 0;
        for (int t = 0; t < d.schedule.slots; ++t) {
            if (active[t].empty()) continue;
            const double inr = link::terrestrial_interference_w(
                site, active[t], snap, ctx.tx_power_w, radio);
            if (inr > threshold) ++interfered;
        }
        if (interfered > ctx.cluster_budgets[j]) {
            out.push_back({constraint::cluster_slot_budget, d.epoch, -1,
                           "cluster " + std::to_string(j) + " interfered " +
                               std::to_string(interfered) + " slots, budget " +
                               std::to_string(ctx.cluster_budgets[j])});
        }
    }
    return out;
}

}  // namespace

std::vector<Violation> validate_decision(const EpochDecision& decision,
                                         const EpochContext& context) {
    std::vector<Violation> out = check_schedule(decision, context);
    std::vector<Violation> shares = check_shares(decision, context);
    out.insert(out.end(), shares.begin(), shares.end());
    return out;
}

void baseline_load_balance(std::span<const int> cells,
                           const std::vector<std::vector<int>>& candidates,
                           std::span<const double> queue_bits,
                           handover::Assignment& assignment) {
    std::unordered_map<int, double> load;
    for (size_t c = 0; c < assignment.serving.size(); ++c) {
        if (assignment.serving[c] >= 0) load[assignment.serving[c]] += queue_bits[c];
    }
    for (int c : cells) {
        const auto& cands = candidates[c];
        int best = cands[0];
        for (int s : cands) {
            const double ls = load.count(s) ? load.at(s) : 0.0;
            const double lb = load.count(best) ? load.at(best) : 0.0;
            if (ls < lb || (ls == lb && s < best)) best = s;
        }
        assignment.serving[c] = best;
        load[best] += queue_bits[c];
    }
}

std::vector<uint8_t> baseline_greedy_share(const spectrum::SharingProblem& problem) {
    spectrum::FitnessEvaluator eval(problem);
    std::vector<uint8_t> z(problem.dim(), 0);
    double current = eval.baseline();

    std::vector<int> cell_order(problem.cell_count);
    std::iota(cell_order.begin(), cell_order.end(), 0);
    std::stable_sort(cell_order.begin(), cell_order.end(), [&](int a, int b) {
        return problem.residual_queue_bits[a] > problem.residual_queue_bits[b];
    });
    std::vector<std::vector<int>> vars_by_cell(problem.cell_count);
    for (int v = 0; v < problem.dim(); ++v)
        vars_by_cell[problem.vars[v].cell].push_back(v);

    for (int c : cell_order) {
        for (int v : vars_by_cell[c]) {
            z[v] = 1;
            bool ok = false;
            const double f = eval.fitness(z, &ok);
            if (ok && f > current) {
                current = f;
            } else {
                z[v] = 0;
            }
        }
    }
    return z;
}

spectrum::SharingProblem make_sharing_problem(
    const geom::ConstellationSnapshot& snapshot, const beamhop::SlotSchedule& schedule,
    std::span<const double> residual_queue_bits, std::span<const double> tx_power_w,
    std::span<const double> terr_slot_rate_bits, std::span<const int> cluster_budgets,
    const link::RadioConfig& radio) {
    spectrum::SharingProblem p;
    p.slots = schedule.slots;
    p.cell_count = snapshot.cell_count;
    p.cluster_count = snapshot.site_count() - snapshot.cell_count;
    p.residual_queue_bits.assign(residual_queue_bits.begin(), residual_queue_bits.end());
    p.slot_rate_bits.assign(terr_slot_rate_bits.begin(), terr_slot_rate_bits.end());
    p.cluster_budgets.assign(cluster_budgets.begin(), cluster_budgets.end());
    p.inr_threshold_w = radio.inr_terr_threshold_w();

    std::map<std::pair<int, int>, int> pair_ids;
    p.slot_begin.assign(p.slots + 1, 0);
    for (int t = 0; t < p.slots; ++t) {
        p.slot_begin[t] = static_cast<int>(p.vars.size());
        std::vector<link::ActiveBeam> eligible(schedule.served[t]);
        std::sort(eligible.begin(), eligible.end(),
                  [](const auto& a, const auto& b) { return a.cell < b.cell; });
        for (const auto& a : eligible) {
            if (p.residual_queue_bits[a.cell] <= 0.0) continue;
            auto [it, fresh] =
                pair_ids.try_emplace({a.sat, a.cell}, static_cast<int>(pair_ids.size()));
            p.vars.push_back({a.sat, a.cell, t});
            p.var_pair.push_back(it->second);
        }
    }
    p.slot_begin[p.slots] = static_cast<int>(p.vars.size());

    p.pair_contrib.assign(static_cast<size_t>(pair_ids.size()) * p.cluster_count, 0.0);
    for (const auto& [key, id] : pair_ids) {
        const link::ActiveBeam one[] = {{key.first, key.second, 0}};
        for (int j = 0; j < p.cluster_count; ++j) {
            p.pair_contrib[static_cast<size_t>(id) * p.cluster_count + j] =
                link::terrestrial_interference_w(snapshot.cell_count + j, one,
                                                 snapshot, tx_power_w, radio);
        }
    }
    return p;
}

RunSummary metrics_summary(const std::vector<MetricsFrame>& frames, int final_window) {
    if (frames.empty()) throw std::invalid_argument("metrics_summary: no frames");
    RunSummary s;
    s.epochs = static_cast<int>(frames.size());
    s.final_window = std::min<int>(std::max(final_window, 1), s.epochs);

    double p0_sum = 0.0;
    for (const auto& f : frames) {
        p0_sum += f.p0_term;
        s.served_w1_bits += f.served_w1_bits;
        s.served_w2_bits += f.served_w2_bits;
    }
    s.running_avg_p0 = p0_sum / s.epochs;

    double q = 0.0, p0 = 0.0;
    for (int i = s.epochs - s.final_window; i < s.epochs; ++i) {
        q += frames[i].mean_queue_bits;
        p0 += frames[i].p0_term;
    }
    s.mean_final_queue_bits = q / s.final_window;
    s.mean_final_p0 = p0 / s.final_window;
    s.max_handover_freq = frames.back().max_handover_freq;
    s.mean_handover_freq = frames.back().mean_handover_freq;
    s.mean_virtual_queue_over_f = frames.back().mean_virtual_queue / s.epochs;
    return s;
}

double linear_slope(std::span<const double> series) {
    const size_t n = series.size();
    if (n < 2) return 0.0;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sx += i;
        sy += series[i];
        sxx += static_cast<double>(i) * i;
        sxy += i * series[i];
    }
    const double denom = n * sxx - sx * sx;
    return (n * sxy - sx * sy) / denom;
}

std::string metrics_csv_header() {
    return "epoch,p0_term,mean_queue_bits,max_queue_bits,mean_handover_freq,"
           "max_handover_freq,sigma,tau,rebalanced,handovers,served_w1_bits,"
           "served_w2_bits,mean_virtual_queue,penalty,conflict_pairs,sharing_vars";
}

std::string metrics_csv_row(const MetricsFrame& f) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%d,%d,%.10g,%.10g,"
                  "%.10g,%.10g,%d,%d",
                  f.epoch, f.p0_term, f.mean_queue_bits, f.max_queue_bits,
                  f.mean_handover_freq, f.max_handover_freq, f.sigma, f.tau,
                  f.rebalanced, f.handovers, f.served_w1_bits, f.served_w2_bits,
                  f.mean_virtual_queue, f.penalty, f.conflict_pairs, f.sharing_vars);
    return buf;
}

namespace {

struct CandidateSets {
    std::vector<std::vector<int>> per_cell;
    std::vector<int> universe;
};

CandidateSets select_candidates(const geom::ConstellationSnapshot& snap,
                                std::span<const int> prev_serving,
                                bool two_satellite_mode, int epoch) {
    const int cells = snap.cell_count;
    const int sats = snap.sat_count();
    CandidateSets out;
    out.per_cell.resize(cells);

    for (int c = 0; c < cells; ++c) {
        if (snap.visible_count(c) == 0)
            throw ScenarioError("epoch " + std::to_string(epoch) + ": cell " +
                                std::to_string(c) + " sees no satellite");
    }

    std::vector<int> pool;
    if (two_satellite_mode) {
        // rank satellites by their worst elevation across the grid; keep the
        // two best that cover every cell
        std::vector<std::pair<double, int>> ranked;
        for (int s = 0; s < sats; ++s) {
            double min_el = std::numeric_limits<double>::infinity();
            bool covers = true;
            for (int c = 0; c < cells; ++c) {
                if (!snap.visible(s, c)) {
                    covers = false;
                    break;
                }
                min_el = std::min(min_el, snap.elevation(s, c));
            }
            if (covers) ranked.push_back({min_el, s});
        }
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        for (size_t i = 0; i < ranked.size() && i < 2; ++i)
            pool.push_back(ranked[i].second);
    }

    std::set<int> universe;
    for (int c = 0; c < cells; ++c) {
        auto& cands = out.per_cell[c];
        if (two_satellite_mode) {
            cands = pool;
            if (cands.empty()) {
                // no satellite covers the whole grid; fall back to the two
                // highest-elevation satellites of this cell
                std::vector<std::pair<double, int>> ranked;
                for (int s = 0; s < sats; ++s)
                    if (snap.visible(s, c)) ranked.push_back({snap.elevation(s, c), s});
                std::sort(ranked.begin(), ranked.end(),
                          [](const auto& a, const auto& b) {
                              if (a.first != b.first) return a.first > b.first;
                              return a.second < b.second;
                          });
                for (size_t i = 0; i < ranked.size() && i < 2; ++i)
                    cands.push_back(ranked[i].second);
            }
        } else {
            for (int s = 0; s < sats; ++s)
                if (snap.visible(s, c)) cands.push_back(s);
        }
        if (!prev_serving.empty() && prev_serving[c] >= 0 &&
            snap.visible(prev_serving[c], c) &&
            std::find(cands.begin(), cands.end(), prev_serving[c]) == cands.end())
            cands.push_back(prev_serving[c]);
        std::sort(cands.begin(), cands.end());
        universe.insert(cands.begin(), cands.end());
    }
    out.universe.assign(universe.begin(), universe.end());
    return out;
}

}  // namespace

RunResult run(const ScenarioConfig& config, const EpochHooks& hooks) {
    config.validate();

    const std::vector<geom::GroundSite> cell_sites = config.cells.make_cells();
    const std::vector<geom::GroundSite> cluster_sites =
        config.clusters.make_clusters(cell_sites);
    std::vector<geom::GroundSite> sites = cell_sites;
    sites.insert(sites.end(), cluster_sites.begin(), cluster_sites.end());

    const int cells = config.cells.count();
    const int clusters = static_cast<int>(cluster_sites.size());
    const int slots = config.radio.slots_per_epoch;
    const link::RadioConfig& radio = config.radio;
    const geom::GeometryConfig geo_cfg{config.min_elevation_rad,
                                       radio.epoch_duration_s()};

    Rng arrivals_rng(mix_seed(config.seed, 1));
    Rng perturb_rng(mix_seed(config.seed, 2));
    const uint64_t sparrow_base = mix_seed(config.seed, 3);
    Rng loads_rng(mix_seed(config.seed, 4));

    std::vector<double> static_loads(clusters, 0.0);
    if (config.cluster_loads.mode == ClusterLoadModel::Mode::static_draw) {
        for (double& l : static_loads)
            l = loads_rng.uniform(config.cluster_loads.load_min,
                                  config.cluster_loads.load_max);
    }

    std::vector<double> queue(cells, 0.0);
    std::vector<double> virtual_queue(cells, 0.0);
    std::vector<long> handovers(cells, 0);
    std::vector<int> prev_serving;
    long long prev_busy = 0;
    int prev_active = 0;

    const std::vector<double> targets(cells, radio.target_snr_db);
    const double snr_linear = link::db_to_linear(radio.target_snr_db);

    RunResult result;
    result.frames.reserve(config.epochs);

    for (int f = 1; f <= config.epochs; ++f) {
        const geom::ConstellationSnapshot snap =
            geom::build_snapshot(config.shell, sites, f, geo_cfg);

        CandidateSets cands =
            select_candidates(snap, prev_serving, config.two_satellite_mode, f);

        // trigger inputs from the previous epoch
        double sigma = 0.0;
        double tau = 0.0;
        if (!prev_serving.empty()) {
            sigma = handover::utilization_rate(prev_busy, prev_active,
                                               radio.beams_per_satellite, slots);
            std::unordered_map<int, double> load_by_sat;
            for (int c = 0; c < cells; ++c) load_by_sat[prev_serving[c]] += queue[c];
            std::vector<double> loads;
            loads.reserve(load_by_sat.size());
            for (const auto& [sat, load] : load_by_sat) loads.push_back(load);
            tau = handover::imbalance_index(loads);
        }

        // mandatory set: serving satellite no longer visible
        std::vector<int> mandatory;
        for (int c = 0; c < cells; ++c) {
            if (prev_serving.empty() || prev_serving[c] < 0 ||
                !snap.visible(prev_serving[c], c))
                mandatory.push_back(c);
        }

        handover::Assignment assignment;
        assignment.serving.assign(cells, -1);
        assignment.satellites = cands.universe;
        for (int c = 0; c < cells; ++c) {
            if (!prev_serving.empty() && prev_serving[c] >= 0 &&
                snap.visible(prev_serving[c], c))
                assignment.serving[c] = prev_serving[c];
        }

        bool rebalanced = false;
        {
            using HP = PolicySelection::Handover;
            const HP policy = config.policy.handover;
            std::unordered_map<int, double> load_by_sat;
            for (int c = 0; c < cells; ++c)
                if (assignment.serving[c] >= 0)
                    load_by_sat[assignment.serving[c]] += queue[c];

            if (policy == HP::proposed || policy == HP::entropy_only) {
                for (int c : mandatory) {
                    const auto& list = cands.per_cell[c];
                    std::vector<handover::CandidateAttributes> attrs(list.size());
                    for (size_t i = 0; i < list.size(); ++i) {
                        const int s = list[i];
                        attrs[i].load_bits =
                            load_by_sat.count(s) ? load_by_sat.at(s) : 0.0;
                        attrs[i].remaining_service_s = geom::remaining_visibility_s(
                            config.shell, cell_sites[c], s, snap.time_s, geo_cfg);
                        attrs[i].elevation_rad = snap.elevation(s, c);
                    }
                    const int pick = handover::entropy_pick(list, attrs);
                    assignment.serving[c] = pick;
                    load_by_sat[pick] += queue[c];
                }
            } else if (policy == HP::load_balance) {
                baseline_load_balance(mandatory, cands.per_cell, queue, assignment);
            } else {
                for (int c : mandatory) {
                    int best = cands.per_cell[c][0];
                    for (int s : cands.per_cell[c])
                        if (snap.elevation(s, c) > snap.elevation(best, c)) best = s;
                    assignment.serving[c] = best;
                }
            }

            if (policy == HP::proposed) {
                const double trig_sigma = mandatory.empty() ? sigma : 0.0;
                const double trig_tau = mandatory.empty() ? tau : 0.0;
                const handover::TriggerDecision trigger = handover::should_trigger(
                    mandatory, trig_sigma, trig_tau, config.handover_cfg);
                if (trigger.global_rebalance) {
                    rebalanced = true;
                    handover::SwapContext ctx;
                    ctx.queue_bits = queue;
                    ctx.virtual_queue = virtual_queue;
                    ctx.previous_serving = prev_serving;
                    ctx.candidates = &cands.per_cell;
                    ctx.h_bar = config.lyapunov.h_bar;
                    ctx.load_weight = config.handover_cfg.load_weight *
                                      config.lyapunov.v / 100.0;
                    handover::swap_matching(assignment, ctx, config.handover_cfg,
                                            &perturb_rng);
                }
            }
        }

        // per-cell link derivations for the epoch
        std::vector<double> power(cells, 0.0);
        std::vector<double> rate_w1(cells, 0.0);
        std::vector<double> rate_w2(cells, 0.0);
        for (int c = 0; c < cells; ++c) {
            const int s = assignment.serving[c];
            const double h =
                link::channel_gain(snap.distance(s, c), radio.carrier_hz);
            power[c] = link::tx_power_for_target_snr(targets[c], h,
                                                     radio.sat_bandwidth_hz, radio);
            rate_w1[c] = link::slot_capacity_bits(radio.sat_bandwidth_hz,
                                                  radio.slot_duration_s, snr_linear);
            rate_w2[c] = link::slot_capacity_bits(radio.terr_bandwidth_hz,
                                                  radio.slot_duration_s, snr_linear);
        }

        const link::ConflictSet conflicts =
            link::conflict_pairs(snap, assignment.serving, targets, radio);

        const beamhop::ConflictGraph graph =
            beamhop::build_conflict_graph(assignment.serving, conflicts,
                                          radio.beams_per_satellite,
                                          radio.polarization_count);
        const beamhop::EpochSchedule hop =
            config.policy.beamhop == PolicySelection::Beamhop::proposed
                ? beamhop::beamhop_epoch(graph, queue, slots, rate_w1)
                : beamhop::greedy_hop_epoch(graph, queue, slots, rate_w1);

        // cluster loads and budgets
        std::vector<double> loads(clusters, 0.0);
        if (config.cluster_loads.mode == ClusterLoadModel::Mode::per_epoch) {
            for (double& l : loads)
                l = loads_rng.uniform(config.cluster_loads.load_min,
                                      config.cluster_loads.load_max);
        } else {
            loads = static_loads;
        }
        std::vector<int> budgets(clusters, 0);
        for (int j = 0; j < clusters; ++j)
            budgets[j] = static_cast<int>(std::floor(slots * (1.0 - loads[j])));

        // spectrum sharing
        spectrum::SharingProblem problem = make_sharing_problem(
            snap, hop.schedule, hop.residual_queue_bits, power, rate_w2, budgets,
            radio);
        std::vector<uint8_t> z(problem.dim(), 0);
        if (config.policy.spectrum == PolicySelection::Spectrum::proposed) {
            z = spectrum::solve_sharing(problem, config.sparrow,
                                        mix_seed(sparrow_base, f))
                    .z;
        } else if (config.policy.spectrum == PolicySelection::Spectrum::greedy_share) {
            z = baseline_greedy_share(problem);
        }

        EpochDecision decision;
        decision.epoch = f;
        decision.serving = assignment.serving;
        decision.schedule = hop.schedule;
        decision.cluster_loads = loads;
        for (int v = 0; v < problem.dim(); ++v)
            if (z[v]) decision.shares.push_back(problem.vars[v]);

        // serve: per slot, satellite band then terrestrial band, capped at
        // the remaining queue
        std::vector<double> served_w1(cells, 0.0);
        std::vector<double> served_w2(cells, 0.0);
        {
            std::vector<double> remaining = queue;
            std::vector<std::vector<int>> share_cells(slots);
            for (const auto& share : decision.shares)
                share_cells[share.slot].push_back(share.cell);
            for (int t = 0; t < slots; ++t) {
                for (const auto& a : decision.schedule.served[t]) {
                    const double d = std::min(remaining[a.cell], rate_w1[a.cell]);
                    served_w1[a.cell] += d;
                    remaining[a.cell] -= d;
                }
                for (int c : share_cells[t]) {
                    const double d = std::min(remaining[c], rate_w2[c]);
                    served_w2[c] += d;
                    remaining[c] -= d;
                }
            }
        }
        std::vector<double> served(cells, 0.0);
        for (int c = 0; c < cells; ++c) served[c] = served_w1[c] + served_w2[c];

        // handover accounting and virtual queues
        std::vector<double> drift(cells, 0.0);
        std::vector<HandoverEvent> events;
        int epoch_handovers = 0;
        const std::vector<double> virtual_pre = virtual_queue;
        for (int c = 0; c < cells; ++c) {
            const int inc =
                traffic::handover_increment(prev_serving, assignment.serving, c);
            if (inc != 0) {
                ++epoch_handovers;
                HandoverEvent ev;
                ev.epoch = f;
                ev.cell = c;
                ev.from_sat = prev_serving[c];
                ev.to_sat = assignment.serving[c];
                ev.reason = std::find(mandatory.begin(), mandatory.end(), c) !=
                                    mandatory.end()
                                ? HandoverEvent::Reason::visibility
                                : HandoverEvent::Reason::rebalance;
                events.push_back(ev);
            }
            handovers[c] += inc;
            if (f >= 2) {
                drift[c] = inc - config.lyapunov.h_bar;
                virtual_queue[c] = traffic::update_virtual_queue(
                    virtual_queue[c], inc, config.lyapunov.h_bar);
            }
        }

        const double p0 = traffic::p0_objective_term(served, queue);
        const double penalty =
            traffic::epoch_penalty(served, queue, virtual_pre, drift,
                                   config.lyapunov.v);

        const std::vector<double> alpha =
            traffic::sample_arrivals(config.arrivals, f, arrivals_rng);
        for (int c = 0; c < cells; ++c)
            queue[c] = traffic::update_data_queue(queue[c], served[c], alpha[c]);

        MetricsFrame frame;
        frame.epoch = f;
        frame.p0_term = p0;
        frame.penalty = penalty;
        frame.sigma = sigma;
        frame.tau = std::isinf(tau) ? -1.0 : tau;
        frame.rebalanced = rebalanced ? 1 : 0;
        frame.handovers = epoch_handovers;
        frame.conflict_pairs = static_cast<int>(conflicts.size());
        frame.sharing_vars = problem.dim();
        for (int c = 0; c < cells; ++c) {
            frame.mean_queue_bits += queue[c];
            frame.max_queue_bits = std::max(frame.max_queue_bits, queue[c]);
            frame.served_w1_bits += served_w1[c];
            frame.served_w2_bits += served_w2[c];
            frame.mean_virtual_queue += virtual_queue[c];
            const double freq = static_cast<double>(handovers[c]) / f;
            frame.mean_handover_freq += freq;
            frame.max_handover_freq = std::max(frame.max_handover_freq, freq);
        }
        frame.mean_queue_bits /= cells;
        frame.mean_virtual_queue /= cells;
        frame.mean_handover_freq /= cells;

        EpochContext context;
        context.snapshot = &snap;
        context.conflicts = &conflicts;
        context.tx_power_w = power;
        context.target_snr_db = targets;
        context.cluster_budgets = budgets;
        context.radio = &radio;

        if (config.validate_every_epoch) {
            const std::vector<Violation> violations =
                validate_decision(decision, context);
            if (!violations.empty())
                throw std::logic_error("epoch " + std::to_string(f) +
                                       ": decision violates " +
                                       violations.front().constraint + " (" +
                                       violations.front().detail + ")");
        }

        if (hooks.on_epoch) {
            std::vector<SharingClusterStat> stats;
            std::vector<std::vector<link::ActiveBeam>> active(slots);
            for (const auto& share : decision.shares)
                active[share.slot].push_back({share.sat, share.cell, 0});
            for (int j = 0; j < clusters; ++j) {
                int interfered = 0;
                for (int t = 0; t < slots; ++t) {
                    if (active[t].empty()) continue;
                    if (link::terrestrial_interference_w(snap.cell_count + j,
                                                         active[t], snap, power,
                                                         radio) >
                        radio.inr_terr_threshold_w())
                        ++interfered;
                }
                if (interfered > 0) stats.push_back({j, interfered, budgets[j]});
            }
            hooks.on_epoch(decision, context, frame, stats, events);
        }

        result.handover_events.insert(result.handover_events.end(), events.begin(),
                                      events.end());
        result.frames.push_back(frame);

        prev_serving = assignment.serving;
        prev_busy = decision.schedule.busy_beam_slots();
        std::set<int> active_sats(assignment.serving.begin(), assignment.serving.end());
        prev_active = static_cast<int>(active_sats.size());
    }

    result.final_queue_bits = queue;
    result.final_virtual_queue = virtual_queue;
    result.final_handovers = handovers;
    result.summary = metrics_summary(result.frames, config.final_window_epochs());
    return result;
}

}  // namespace leobeam::sim
