#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <unordered_map>
#include <vector>

#include "airmatrix/batch.hpp"
#include "airmatrix/occupancy.hpp"
#include "airmatrix/trajectory.hpp"

namespace airmatrix {

struct FlightDelayRow {
    int id = 0;
    double baseline_s = 0.0;
    double cfa_s = 0.0;
    double delay_s = 0.0;
    double ratio = 0.0;
};

struct ComparisonReport {
    std::vector<FlightDelayRow> per_flight;
    std::vector<double> accumulated_delay;  // prefix sums over per_flight
    double total_delay_s = 0.0;
    double max_flight_time_s = 0.0;  // over the conflict-free trajectories
};

// Restricts two trajectory lists to the flight ids present in both, ordered
// by id. Flights that failed under only one planner drop out of the delay
// comparison.
inline std::pair<std::vector<Trajectory4D>, std::vector<Trajectory4D>> match_by_id(
    std::span<const Trajectory4D> baseline, std::span<const Trajectory4D> cfa) {
    std::unordered_map<int, std::size_t> cfa_index;
    cfa_index.reserve(cfa.size());
    for (std::size_t n = 0; n < cfa.size(); ++n) cfa_index.emplace(cfa[n].id, n);
    std::pair<std::vector<Trajectory4D>, std::vector<Trajectory4D>> out;
    for (const Trajectory4D& b : baseline) {
        const auto it = cfa_index.find(b.id);
        if (it == cfa_index.end()) continue;
        out.first.push_back(b);
        out.second.push_back(cfa[it->second]);
    }
    const auto by_id = [](const Trajectory4D& a, const Trajectory4D& b) {
        return a.id < b.id;
    };
    std::sort(out.first.begin(), out.first.end(), by_id);
    std::sort(out.second.begin(), out.second.end(), by_id);
    return out;
}

// Per-flight delay (conflict-free minus baseline flight time) and the
// accumulated delay curve. Requires id-aligned lists; use match_by_id first
// when either run had failures. Delays are clamped at zero within float
// round-off; a genuinely negative delay is a planner bug and throws.
inline ComparisonReport delay_report(std::span<const Trajectory4D> baseline,
                                     std::span<const Trajectory4D> cfa) {
    if (baseline.size() != cfa.size())
        throw IdMismatch("delay_report: list sizes differ");
    ComparisonReport report;
    report.per_flight.reserve(baseline.size());
    report.accumulated_delay.reserve(baseline.size());
    double accum = 0.0;
    for (std::size_t n = 0; n < baseline.size(); ++n) {
        if (baseline[n].id != cfa[n].id)
            throw IdMismatch("delay_report: flight ids differ at position " +
                             std::to_string(n));
        double delay = cfa[n].flight_time - baseline[n].flight_time;
        if (delay < 0.0) {
            if (delay < -1e-9)
                throw Error("delay_report: conflict-free flight beat the baseline");
            delay = 0.0;
        }
        const double base = baseline[n].flight_time;
        report.per_flight.push_back(
            {baseline[n].id, base, cfa[n].flight_time, delay,
             base > 0.0 ? delay / base : 0.0});
        accum += delay;
        report.accumulated_delay.push_back(accum);
        report.max_flight_time_s = std::max(report.max_flight_time_s, cfa[n].flight_time);
    }
    report.total_delay_s = accum;
    return report;
}

// Cumulative duplicate-occupancy metric: entry n is the metric over the first
// n + 1 trajectories, so the curve is monotone non-decreasing.
inline std::vector<double> conflict_curve(std::span<const Trajectory4D> trajectories,
                                          double dt = 1.0) {
    if (!(dt > 0.0)) throw ConfigError("conflict_curve: dt must be positive");
    struct Key {
        int i, j, k;
        long long m;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& key) const {
            std::uint64_t h = 1469598103934665603ull;
            for (std::uint64_t v : {static_cast<std::uint64_t>(key.i),
                                    static_cast<std::uint64_t>(key.j),
                                    static_cast<std::uint64_t>(key.k),
                                    static_cast<std::uint64_t>(key.m)}) {
                h ^= v;
                h *= 1099511628211ull;
            }
            return static_cast<std::size_t>(h);
        }
    };
    std::unordered_map<Key, int, KeyHash> counts;
    std::vector<double> curve;
    curve.reserve(trajectories.size());
    double total = 0.0;
    for (const Trajectory4D& traj : trajectories) {
        for (const BlockVisit& v : traj.visits) {
            for (long long m = static_cast<long long>(std::ceil(v.t_enter / dt));
                 m * dt < v.t_exit; ++m) {
                if (++counts[{v.block.i, v.block.j, v.block.k, m}] == 2) total += dt;
            }
        }
        curve.push_back(total);
    }
    return curve;
}

// Total occupied seconds per block, split by layer. Buildings never appear
// (only trajectory visits contribute), and the total mass equals the sum of
// flight times.
struct LayerHeatmap {
    int I = 0, J = 0, K = 0;
    std::vector<std::vector<std::vector<double>>> seconds;  // [k][i][j]

    double total() const {
        double sum = 0.0;
        for (const auto& layer : seconds)
            for (const auto& row : layer)
                for (double v : row) sum += v;
        return sum;
    }

    double layer_total(int k) const {
        double sum = 0.0;
        for (const auto& row : seconds[k])
            for (double v : row) sum += v;
        return sum;
    }
};

inline LayerHeatmap heatmap(std::span<const Trajectory4D> trajectories,
                            const GridSpec& g) {
    LayerHeatmap map;
    map.I = g.I;
    map.J = g.J;
    map.K = g.K;
    map.seconds.assign(g.K, std::vector<std::vector<double>>(
                                g.I, std::vector<double>(g.J, 0.0)));
    for (const Trajectory4D& traj : trajectories)
        for (const BlockVisit& v : traj.visits)
            map.seconds[v.block.k][v.block.i][v.block.j] += v.t_exit - v.t_enter;
    return map;
}

struct SweepRow {
    double window_s = 0.0;
    double flights_per_min = 0.0;
    double conflict_block_seconds = 0.0;  // baseline duplicate occupancy
    std::size_t conflict_events = 0;      // exact overlapping visit pairs
    double total_delay_s = 0.0;           // conflict-free total delay
    std::size_t baseline_failures = 0;
    std::size_t cfa_failures = 0;
};

// Density sensitivity: one full baseline + conflict-free run per departure
// window, same seed and flight count throughout. The same OD/aircraft draws
// recur in every window; only the departure times rescale.
inline std::vector<SweepRow> density_sweep(std::span<const double> windows,
                                           const ScenarioConfig& base,
                                           const PlanningEnv& env, int jobs = 1) {
    if (windows.empty()) throw ConfigError("density_sweep: no windows given");
    std::vector<SweepRow> rows;
    rows.reserve(windows.size());
    for (const double w : windows) {
        ScenarioConfig cfg = base;
        cfg.window_s = w;
        const std::vector<FlightPlan> plans = generate_scenario(cfg, env);
        const BatchResult baseline = plan_baseline(plans, env, cfg, jobs);
        const BatchResult conflict_free = plan_fcfs(plans, env, cfg);
        const auto [mb, mc] =
            match_by_id(baseline.trajectories, conflict_free.trajectories);
        const ComparisonReport report = delay_report(mb, mc);
        SweepRow row;
        row.window_s = w;
        row.flights_per_min = cfg.count / (w / 60.0);
        row.conflict_block_seconds =
            duplicate_occupancy_time(baseline.trajectories, cfg.dt_s);
        row.conflict_events = exact_duplicate_overlap(baseline.trajectories).event_pairs;
        row.total_delay_s = report.total_delay_s;
        row.baseline_failures = baseline.failures.size();
        row.cfa_failures = conflict_free.failures.size();
        rows.push_back(row);
    }
    return rows;
}

}  // namespace airmatrix
