#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "airmatrix/grid.hpp"
#include "airmatrix/occupancy.hpp"
#include "airmatrix/performance.hpp"
#include "airmatrix/search.hpp"
#include "airmatrix/trajectory.hpp"

namespace airmatrix {

struct FlightPlan {
    int id = 0;
    Vec3 origin;       // take-off point (m)
    Vec3 destination;  // landing point (m)
    double t_dep = 0.0;
    std::string aircraft;
};

struct ScenarioConfig {
    std::uint64_t seed = 0;
    int count = 0;
    double window_s = 300.0;
    double speed_scale = 0.6;
    double hover_threshold_s = 60.0;
    double dt_s = 1.0;
    // Landing blocks stay reserved this long after arrival (infinite by
    // default: arrivals park on their destination block).
    double goal_hold_s = kInf;
    // Busy start block at departure: fail the flight (default) or wait on the
    // ground for the next free instant.
    bool ground_hold = false;
};

// Shared immutable planning context: grid, calibrated fleet, and the
// rasterized building obstacles.
struct PlanningEnv {
    GridSpec grid;
    Fleet fleet;
    std::vector<BuildingFootprint> buildings;
    std::vector<BlockIndex> building_blocks;

    static PlanningEnv make(GridSpec g, Fleet f,
                            std::vector<BuildingFootprint> footprints) {
        g.validate();
        PlanningEnv env;
        env.grid = g;
        env.fleet = std::move(f);
        env.buildings = std::move(footprints);
        env.building_blocks = rasterize_buildings(env.buildings, env.grid);
        return env;
    }
};

enum class FailureKind {
    NoPathFound,
    DepartureConflict,
    BlockedEndpoint,
    PointOutOfBounds,
    UnknownAircraft,
};

inline const char* to_string(FailureKind k) {
    switch (k) {
        case FailureKind::NoPathFound: return "NoPathFound";
        case FailureKind::DepartureConflict: return "DepartureConflict";
        case FailureKind::BlockedEndpoint: return "BlockedEndpoint";
        case FailureKind::PointOutOfBounds: return "PointOutOfBounds";
        case FailureKind::UnknownAircraft: return "UnknownAircraft";
    }
    return "Unknown";
}

struct PlanFailure {
    int id = 0;
    FailureKind kind = FailureKind::NoPathFound;
    std::string message;
};

struct BatchResult {
    std::vector<Trajectory4D> trajectories;  // successful flights, input order
    std::vector<PlanFailure> failures;       // skipped flights, input order
    std::vector<double> wall_seconds;        // per input plan
};

namespace detail {

struct PlanTarget {
    BlockIndex start;
    BlockIndex goal;
};

inline PlanTarget resolve_endpoints(const FlightPlan& plan, const PlanningEnv& env,
                                    const std::vector<char>& building) {
    const BlockIndex s = block_of_point(plan.origin, env.grid);
    const BlockIndex d = block_of_point(plan.destination, env.grid);
    if (building[flatten(s, env.grid)] || building[flatten(d, env.grid)])
        throw BlockedEndpoint("endpoint block occupied by a building");
    return {s, d};
}

}  // namespace detail

// Plans flights strictly in list order against a shared ledger: each flight
// sees every earlier trajectory as a dynamic obstacle. Failures are recorded
// and skipped, never aborting the batch, and a skipped flight leaves the
// ledger untouched — so planning the first n plans of a list reproduces the
// first n outcomes of planning the whole list.
inline BatchResult plan_fcfs(std::span<const FlightPlan> plans, const PlanningEnv& env,
                             const ScenarioConfig& cfg) {
    BatchResult out;
    out.wall_seconds.assign(plans.size(), 0.0);
    OccupancyLedger ledger(env.grid);
    ledger.add_buildings(env.building_blocks);

    for (std::size_t n = 0; n < plans.size(); ++n) {
        const FlightPlan& plan = plans[n];
        if (plan.id < 0) throw ConfigError("plan_fcfs: negative flight id");
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const auto fleet_it = env.fleet.find(plan.aircraft);
            if (fleet_it == env.fleet.end())
                throw ConfigError("unknown aircraft type: " + plan.aircraft);
            const auto target =
                detail::resolve_endpoints(plan, env, ledger.building_flags());
            PlanOptions opt;
            opt.scale = cfg.speed_scale;
            opt.t_dep = plan.t_dep;
            opt.hover_threshold = cfg.hover_threshold_s;
            opt.goal_hold_s = cfg.goal_hold_s;
            opt.ground_hold_retry = cfg.ground_hold;
            Trajectory4D traj = cfa_star(env.grid, ledger, target.start, target.goal,
                                         fleet_it->second, opt);
            traj.id = plan.id;
            traj.aircraft = plan.aircraft;
            reserve_trajectory(ledger, traj, plan.id + 1, cfg.goal_hold_s);
            out.trajectories.push_back(std::move(traj));
        } catch (const NoPathFound& e) {
            out.failures.push_back({plan.id, FailureKind::NoPathFound, e.what()});
        } catch (const DepartureConflict& e) {
            out.failures.push_back({plan.id, FailureKind::DepartureConflict, e.what()});
        } catch (const BlockedEndpoint& e) {
            out.failures.push_back({plan.id, FailureKind::BlockedEndpoint, e.what()});
        } catch (const PointOutOfBounds& e) {
            out.failures.push_back({plan.id, FailureKind::PointOutOfBounds, e.what()});
        } catch (const ConfigError& e) {
            out.failures.push_back({plan.id, FailureKind::UnknownAircraft, e.what()});
        }
        out.wall_seconds[n] = std::chrono::duration<double>(
                                  std::chrono::steady_clock::now() - t0)
                                  .count();
    }
    return out;
}

// Baseline comparison run: shortest flight-time routes over buildings only,
// no deconfliction. Independent per flight, so optionally parallel; results
// are emitted in input order regardless of completion order.
inline BatchResult plan_baseline(std::span<const FlightPlan> plans,
                                 const PlanningEnv& env, const ScenarioConfig& cfg,
                                 int jobs = 1) {
    const std::size_t n_plans = plans.size();
    std::vector<std::optional<Trajectory4D>> slots(n_plans);
    std::vector<std::optional<PlanFailure>> fails(n_plans);
    std::vector<double> wall(n_plans, 0.0);

    const std::vector<char> building = detail::blocked_flags(env.building_blocks, env.grid);
    std::map<std::string, TimeTable> tables;
    for (const auto& [name, perf] : env.fleet)
        tables.emplace(name, TimeTable::build(perf, env.grid, cfg.speed_scale));

    const auto run_one = [&](std::size_t n) {
        const FlightPlan& plan = plans[n];
        const auto t0 = std::chrono::steady_clock::now();
        try {
            if (plan.id < 0) throw ConfigError("plan_baseline: negative flight id");
            const auto table_it = tables.find(plan.aircraft);
            if (table_it == tables.end())
                throw ConfigError("unknown aircraft type: " + plan.aircraft);
            const auto target = detail::resolve_endpoints(plan, env, building);
            Trajectory4D traj =
                detail::plan_route(env.grid, table_it->second, building, nullptr,
                                   target.start, target.goal, plan.t_dep, kInf);
            traj.id = plan.id;
            traj.aircraft = plan.aircraft;
            slots[n] = std::move(traj);
        } catch (const NoPathFound& e) {
            fails[n] = {plan.id, FailureKind::NoPathFound, e.what()};
        } catch (const BlockedEndpoint& e) {
            fails[n] = {plan.id, FailureKind::BlockedEndpoint, e.what()};
        } catch (const PointOutOfBounds& e) {
            fails[n] = {plan.id, FailureKind::PointOutOfBounds, e.what()};
        } catch (const ConfigError& e) {
            fails[n] = {plan.id, FailureKind::UnknownAircraft, e.what()};
        }
        wall[n] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                      .count();
    };

    if (jobs <= 1) {
        for (std::size_t n = 0; n < n_plans; ++n) run_one(n);
    } else {
        std::atomic<std::size_t> next{0};
        const auto worker = [&] {
            for (;;) {
                const std::size_t n = next.fetch_add(1);
                if (n >= n_plans) return;
                run_one(n);
            }
        };
        std::vector<std::thread> pool;
        const int width = std::min<int>(jobs, static_cast<int>(n_plans));
        pool.reserve(width);
        for (int t = 0; t < width; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    BatchResult out;
    out.wall_seconds = std::move(wall);
    for (std::size_t n = 0; n < n_plans; ++n) {
        if (slots[n]) out.trajectories.push_back(std::move(*slots[n]));
        if (fails[n]) out.failures.push_back(std::move(*fails[n]));
    }
    return out;
}

// Seeded scenario generator: OD pairs drawn uniformly from non-building block
// centers (origin != destination), departure times uniform in [0, window),
// aircraft uniform over the fleet. Emitted sorted by departure time with ids
// assigned in that order.
inline std::vector<FlightPlan> generate_scenario(const ScenarioConfig& cfg,
                                                 const PlanningEnv& env) {
    if (cfg.count < 0) throw ConfigError("generate_scenario: negative count");
    if (!(cfg.window_s > 0.0))
        throw ConfigError("generate_scenario: window must be positive");
    if (cfg.count == 0) return {};

    const std::vector<char> building = detail::blocked_flags(env.building_blocks, env.grid);
    std::vector<std::size_t> free_blocks;
    free_blocks.reserve(env.grid.block_count());
    for (std::size_t idx = 0; idx < building.size(); ++idx)
        if (!building[idx]) free_blocks.push_back(idx);
    if (free_blocks.size() < 2)
        throw InfeasibleScenario("generate_scenario: fewer than two free blocks");

    std::vector<std::string> names;
    names.reserve(env.fleet.size());
    for (const auto& [name, perf] : env.fleet) names.push_back(name);
    if (names.empty()) throw ConfigError("generate_scenario: empty fleet");

    std::mt19937_64 rng(cfg.seed);
    std::vector<FlightPlan> plans;
    plans.reserve(cfg.count);
    for (int n = 0; n < cfg.count; ++n) {
        const std::size_t o = free_blocks[rng_below(rng, free_blocks.size())];
        std::size_t d = o;
        while (d == o) d = free_blocks[rng_below(rng, free_blocks.size())];
        FlightPlan plan;
        plan.origin = center(unflatten(o, env.grid), env.grid);
        plan.destination = center(unflatten(d, env.grid), env.grid);
        plan.t_dep = rng_unit(rng) * cfg.window_s;
        plan.aircraft = names[rng_below(rng, names.size())];
        plans.push_back(std::move(plan));
    }
    std::stable_sort(plans.begin(), plans.end(),
                     [](const FlightPlan& a, const FlightPlan& b) {
                         return a.t_dep < b.t_dep;
                     });
    for (std::size_t n = 0; n < plans.size(); ++n)
        plans[n].id = static_cast<int>(n);
    return plans;
}

// Synthetic building stock. Rectangular (occasionally triangular) footprints
// are placed at random until each layer's covered-cell count reaches its
// target fraction, working from the tallest tier down so tall buildings
// contribute to every layer beneath them.
struct BuildingGenConfig {
    std::uint64_t seed = 0;
    // Target fraction of the I x J cells covered per layer, ground up.
    std::vector<double> layer_fractions{0.3925, 0.1286, 0.0189};
    std::size_t max_buildings = 200000;
};

inline std::vector<BuildingFootprint> generate_buildings(const BuildingGenConfig& cfg,
                                                         const GridSpec& g) {
    const std::size_t cells = static_cast<std::size_t>(g.I) * g.J;
    const int tiers = std::min<int>(g.K, static_cast<int>(cfg.layer_fractions.size()));
    std::vector<std::size_t> target(tiers, 0);
    for (int k = 0; k < tiers; ++k) {
        if (cfg.layer_fractions[k] < 0.0 || cfg.layer_fractions[k] > 1.0)
            throw ConfigError("generate_buildings: layer fraction outside [0, 1]");
        target[k] = static_cast<std::size_t>(std::llround(cfg.layer_fractions[k] * cells));
    }

    std::vector<std::vector<char>> covered(g.K, std::vector<char>(cells, 0));
    std::vector<std::size_t> covered_count(g.K, 0);
    std::mt19937_64 rng(cfg.seed);
    std::vector<BuildingFootprint> out;

    const auto absorb = [&](const BuildingFootprint& f) {
        const BuildingFootprint one[] = {f};
        for (const BlockIndex& b : rasterize_buildings(one, g)) {
            auto& flag = covered[b.k][static_cast<std::size_t>(b.j) * g.I + b.i];
            if (!flag) {
                flag = 1;
                ++covered_count[b.k];
            }
        }
    };

    for (int tier = tiers - 1; tier >= 0; --tier) {
        while (covered_count[tier] < target[tier] && out.size() < cfg.max_buildings) {
            // Taller tiers get smaller footprints.
            const double max_half = g.a * std::max(1.0, 2.8 - 0.85 * tier);
            double hx = rng_range(rng, 0.4 * g.a, max_half);
            double hy = rng_range(rng, 0.4 * g.a, max_half);
            hx = std::min(hx, 0.49 * g.width());
            hy = std::min(hy, 0.49 * g.depth());
            const double cx = g.origin.x + rng_range(rng, hx, g.width() - hx);
            const double cy = g.origin.y + rng_range(rng, hy, g.depth() - hy);
            const double height =
                rng_range(rng, (tier + 0.08) * g.h, (tier + 0.92) * g.h);

            BuildingFootprint f;
            f.height = height;
            f.polygon = {{cx - hx, cy - hy},
                         {cx + hx, cy - hy},
                         {cx + hx, cy + hy},
                         {cx - hx, cy + hy}};
            if (rng_below(rng, 4) == 0)  // occasional triangular footprint
                f.polygon.erase(f.polygon.begin() + rng_below(rng, 4));
            absorb(f);
            out.push_back(std::move(f));
        }
    }
    return out;
}

}  // namespace airmatrix
