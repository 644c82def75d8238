#pragma once

#include <algorithm>
#include <cstdint>
#include <queue>
#include <span>
#include <tuple>
#include <vector>

#include "airmatrix/grid.hpp"
#include "airmatrix/occupancy.hpp"
#include "airmatrix/performance.hpp"
#include "airmatrix/trajectory.hpp"

namespace airmatrix {

// Single-step flight times for one (aircraft, grid, speed scale), one per
// move type. t_x00 == t_0y0 and t_x0z == t_0yz by horizontal isotropy.
struct TimeTable {
    double t_x00 = 0.0;
    double t_0y0 = 0.0;
    double t_00z = 0.0;
    double t_xy0 = 0.0;
    double t_x0z = 0.0;
    double t_0yz = 0.0;
    double t_xyz = 0.0;

    static TimeTable build(const AircraftPerformance& perf, const GridSpec& g,
                           double scale) {
        TimeTable tt;
        for (const LinkTableEntry& e : link_table(g))
            tt.slot(e.di, e.dj, e.dk) = link_time(perf, e, scale);
        return tt;
    }

    double step(int adx, int ady, int adz) const {
        switch (adx * 4 + ady * 2 + adz) {
            case 0b100: return t_x00;
            case 0b010: return t_0y0;
            case 0b001: return t_00z;
            case 0b110: return t_xy0;
            case 0b101: return t_x0z;
            case 0b011: return t_0yz;
            case 0b111: return t_xyz;
            default: throw Error("TimeTable: zero move");
        }
    }

private:
    double& slot(int adx, int ady, int adz) {
        switch (adx * 4 + ady * 2 + adz) {
            case 0b100: return t_x00;
            case 0b010: return t_0y0;
            case 0b001: return t_00z;
            case 0b110: return t_xy0;
            case 0b101: return t_x0z;
            case 0b011: return t_0yz;
            default: return t_xyz;
        }
    }
};

// Exact obstacle-free flight time over a 2D block offset: take as many
// horizontal-diagonal moves as the smaller component allows, then finish
// along the larger axis.
inline double heuristic_2d(int dx, int dy, const TimeTable& tt) {
    dx = std::abs(dx);
    dy = std::abs(dy);
    if (dx >= dy) return dy * tt.t_xy0 + (dx - dy) * tt.t_x00;
    return dx * tt.t_xy0 + (dy - dx) * tt.t_0y0;
}

// 3D extension: spend the smallest component on full-diagonal moves, the
// middle one on the two-axis diagonal of the two larger components, and the
// rest on the largest axis.
inline double heuristic_3d(int dx, int dy, int dz, const TimeTable& tt) {
    dx = std::abs(dx);
    dy = std::abs(dy);
    dz = std::abs(dz);
    if (dx >= dy && dy >= dz)
        return dz * tt.t_xyz + (dy - dz) * tt.t_xy0 + (dx - dy) * tt.t_x00;
    if (dx >= dz && dz >= dy)
        return dy * tt.t_xyz + (dz - dy) * tt.t_x0z + (dx - dz) * tt.t_x00;
    if (dy >= dx && dx >= dz)
        return dz * tt.t_xyz + (dx - dz) * tt.t_xy0 + (dy - dx) * tt.t_0y0;
    if (dy >= dz && dz >= dx)
        return dx * tt.t_xyz + (dz - dx) * tt.t_0yz + (dy - dz) * tt.t_0y0;
    if (dz >= dx && dx >= dy)
        return dy * tt.t_xyz + (dx - dy) * tt.t_x0z + (dz - dx) * tt.t_00z;
    return dx * tt.t_xyz + (dy - dx) * tt.t_0yz + (dz - dy) * tt.t_00z;
}

// Per-block cost of a path: half the incoming link time, half the outgoing
// link time, plus any hover at the block. The endpoints carry only their one
// half-link. Enter/exit times accumulate these costs from the departure time.
inline Trajectory4D annotate_times(std::span<const BlockIndex> path,
                                   std::span<const double> hover,
                                   const AircraftPerformance& perf,
                                   const GridSpec& g, double scale, double t_dep) {
    if (path.empty()) throw Error("annotate_times: empty path");
    if (!hover.empty() && hover.size() != path.size())
        throw Error("annotate_times: hover list size mismatch");

    std::vector<double> links(path.size() > 0 ? path.size() - 1 : 0, 0.0);
    for (std::size_t n = 0; n + 1 < path.size(); ++n) {
        const int di = path[n + 1].i - path[n].i;
        const int dj = path[n + 1].j - path[n].j;
        const int dk = path[n + 1].k - path[n].k;
        if ((di == 0 && dj == 0 && dk == 0) || std::abs(di) > 1 || std::abs(dj) > 1 ||
            std::abs(dk) > 1 || !in_bounds(path[n + 1], g) || !in_bounds(path[n], g))
            throw NotAdjacent("annotate_times: path blocks are not grid neighbors");
        links[n] = link_time(perf, classify_link(di, dj, dk, g), scale);
    }

    Trajectory4D traj;
    traj.visits.resize(path.size());
    double t = t_dep;
    for (std::size_t n = 0; n < path.size(); ++n) {
        const double in_half = (n == 0) ? 0.0 : 0.5 * links[n - 1];
        const double out_half = (n + 1 == path.size()) ? 0.0 : 0.5 * links[n];
        const double hov = hover.empty() ? 0.0 : hover[n];
        const double cost = in_half + out_half + hov;
        traj.visits[n] = {path[n], t, t + cost, hov};
        t += cost;
    }
    traj.flight_time = t - t_dep;
    return traj;
}

namespace detail {

struct OpenEntry {
    double f = 0.0;
    double h = 0.0;
    int k = 0, j = 0, i = 0;
    std::uint64_t seq = 0;
    std::size_t flat = 0;
    double g = 0.0;  // snapshot for staleness detection
};

struct OpenCompare {
    // Tie-break order: F, then H, then (k, j, i), then insertion order.
    bool operator()(const OpenEntry& a, const OpenEntry& b) const {
        return std::tie(a.f, a.h, a.k, a.j, a.i, a.seq) >
               std::tie(b.f, b.h, b.k, b.j, b.i, b.seq);
    }
};

// Shared A*/CFA* core. With `ledger == nullptr` this is plain shortest
// flight-time A* over the static obstacle map. With a ledger it additionally
// enforces the reservation table: every generated edge must find the
// neighbor's entry window free (or buy it with a hover at the parent, capped
// by `hover_threshold`), and the parent block must stay free while the
// aircraft waits and crosses. Blocks close permanently: a block expanded once
// is never re-expanded at a later time.
inline Trajectory4D plan_route(const GridSpec& g, const TimeTable& tt,
                               const std::vector<char>& blocked,
                               const OccupancyLedger* ledger, BlockIndex start_b,
                               BlockIndex goal_b, double t_dep,
                               double hover_threshold, double goal_hold_s = kInf) {
    const std::size_t count = g.block_count();
    const std::size_t start = flatten(start_b, g);
    const std::size_t goal = flatten(goal_b, g);

    struct Move {
        int di, dj, dk;
        double t;
    };
    std::vector<Move> moves;
    moves.reserve(26);
    for (int dk = -1; dk <= 1; ++dk)
        for (int dj = -1; dj <= 1; ++dj)
            for (int di = -1; di <= 1; ++di) {
                if (di == 0 && dj == 0 && dk == 0) continue;
                moves.push_back(
                    {di, dj, dk, tt.step(std::abs(di), std::abs(dj), std::abs(dk))});
            }

    std::vector<double> gcost(count, kInf), t_enter(count, 0.0), arr(count, 0.0),
        hover_in(count, 0.0);
    std::vector<std::int32_t> parent(count, -1);
    std::vector<char> closed(count, 0), after_hover(count, 0);

    const auto hval = [&](int i, int j, int k) {
        return heuristic_3d(goal_b.i - i, goal_b.j - j, goal_b.k - k, tt);
    };

    std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenCompare> open;
    std::uint64_t seq = 0;

    gcost[start] = 0.0;
    t_enter[start] = t_dep;
    arr[start] = t_dep;
    open.push({hval(start_b.i, start_b.j, start_b.k), hval(start_b.i, start_b.j, start_b.k),
               start_b.k, start_b.j, start_b.i, seq++, start, 0.0});

    while (!open.empty()) {
        const OpenEntry top = open.top();
        open.pop();
        if (closed[top.flat] || top.g != gcost[top.flat]) continue;
        closed[top.flat] = 1;
        if (top.flat == goal) break;

        const BlockIndex pb = unflatten(top.flat, g);
        const double depart_center = arr[top.flat];

        for (const Move& mv : moves) {
            const BlockIndex nb{pb.i + mv.di, pb.j + mv.dj, pb.k + mv.dk};
            if (!in_bounds(nb, g)) continue;
            const std::size_t nf = flatten(nb, g);
            if (blocked[nf] || closed[nf]) continue;

            double enter_n = depart_center + 0.5 * mv.t;
            double hover = 0.0;
            if (ledger) {
                // Entry window: the landing block is held for goal_hold_s
                // (forever by default, floored at its own half-link stay),
                // any other block for one estimated visit (the incoming link
                // mirrored, no hover at the neighbor itself).
                const bool to_goal = (nf == goal);
                const double duration =
                    to_goal ? std::max(0.5 * mv.t, goal_hold_s) : mv.t;
                if (!ledger->is_free(nb, {enter_n, duration == kInf
                                                       ? kInf
                                                       : enter_n + duration})) {
                    const double t_free = ledger->earliest_free_after(nb, enter_n, duration);
                    hover = t_free - enter_n;
                    if (!(hover <= hover_threshold)) continue;
                    enter_n = t_free;
                }
                // The parent keeps its block while hovering and until the
                // handoff instant; a secondary conflict there kills the move.
                if (!ledger->is_free(pb, {depart_center, enter_n})) continue;
            }

            const double cand_g = gcost[top.flat] + mv.t + hover;
            if (cand_g < gcost[nf]) {
                gcost[nf] = cand_g;
                parent[nf] = static_cast<std::int32_t>(top.flat);
                t_enter[nf] = enter_n;
                arr[nf] = enter_n + 0.5 * mv.t;
                hover_in[nf] = hover;
                after_hover[nf] = hover > 0.0;
                const double h = hval(nb.i, nb.j, nb.k);
                open.push({cand_g + h, h, nb.k, nb.j, nb.i, seq++, nf, cand_g});
            }
        }
    }

    if (!closed[goal]) throw NoPathFound("no route from start to goal");

    std::vector<std::size_t> chain;
    for (std::int32_t at = static_cast<std::int32_t>(goal); at >= 0; at = parent[at])
        chain.push_back(static_cast<std::size_t>(at));
    std::reverse(chain.begin(), chain.end());

    Trajectory4D traj;
    traj.visits.resize(chain.size());
    for (std::size_t n = 0; n < chain.size(); ++n) {
        traj.visits[n].block = unflatten(chain[n], g);
        traj.visits[n].t_enter = t_enter[chain[n]];
    }
    for (std::size_t n = 0; n + 1 < chain.size(); ++n) {
        traj.visits[n].t_exit = t_enter[chain[n + 1]];
        traj.visits[n].hover = hover_in[chain[n + 1]];
    }
    traj.visits.back().t_exit = arr[goal];
    traj.visits.back().hover = 0.0;
    traj.flight_time = arr[goal] - t_dep;
    return traj;
}

inline std::vector<char> blocked_flags(std::span<const BlockIndex> obstacles,
                                       const GridSpec& g) {
    std::vector<char> flags(g.block_count(), 0);
    for (const BlockIndex& b : obstacles) flags[flatten(b, g)] = 1;
    return flags;
}

}  // namespace detail

// Shortest flight-time route over static obstacles only. Optimal: the
// heuristic equals the obstacle-free optimum, so it is admissible and
// consistent.
inline std::vector<BlockIndex> astar(const GridSpec& g,
                                     std::span<const BlockIndex> static_obstacles,
                                     const BlockIndex& start, const BlockIndex& goal,
                                     const AircraftPerformance& perf, double scale) {
    if (!in_bounds(start, g) || !in_bounds(goal, g))
        throw Error("astar: endpoint outside grid");
    const std::vector<char> blocked = detail::blocked_flags(static_obstacles, g);
    if (blocked[flatten(start, g)] || blocked[flatten(goal, g)])
        throw BlockedEndpoint("astar: start or goal lies in a static obstacle");
    const TimeTable tt = TimeTable::build(perf, g, scale);
    const Trajectory4D traj =
        detail::plan_route(g, tt, blocked, nullptr, start, goal, 0.0, kInf);
    std::vector<BlockIndex> path;
    path.reserve(traj.visits.size());
    for (const BlockVisit& v : traj.visits) path.push_back(v.block);
    return path;
}

struct PlanOptions {
    double scale = 0.6;
    double t_dep = 0.0;
    double hover_threshold = 60.0;
    // How long the landing block stays reserved after arrival. Infinite by
    // default: the aircraft parks there.
    double goal_hold_s = kInf;
    // When set, a start block busy at t_dep delays departure to the next free
    // instant instead of failing.
    bool ground_hold_retry = false;
};

// Conflict-free A*: plans against the reservation ledger, resolving dynamic
// conflicts greedily by hovering at the parent block or detouring, whichever
// the F-ordering reaches first. Every visit interval of the returned
// trajectory is free in the ledger; the landing block is treated as occupied
// from arrival onward.
inline Trajectory4D cfa_star(const GridSpec& g, const OccupancyLedger& ledger,
                             const BlockIndex& start, const BlockIndex& goal,
                             const AircraftPerformance& perf,
                             const PlanOptions& opt = {}) {
    if (!in_bounds(start, g) || !in_bounds(goal, g))
        throw Error("cfa_star: endpoint outside grid");
    if (ledger.is_building(goal))
        throw NoPathFound("cfa_star: goal block is occupied by a building");

    double t_dep = opt.t_dep;
    if (ledger.occupied_at(start, t_dep)) {
        if (!opt.ground_hold_retry)
            throw DepartureConflict("cfa_star: start block busy at departure time");
        const double held = ledger.next_free_instant(start, t_dep);
        if (!(held < kInf))
            throw DepartureConflict("cfa_star: start block never frees up");
        t_dep = held;
    }

    Trajectory4D traj;
    if (start == goal) {
        const double hold_end =
            opt.goal_hold_s == kInf ? kInf : t_dep + opt.goal_hold_s;
        if (!ledger.is_free(start, {t_dep, hold_end}))
            throw NoPathFound("cfa_star: landing block reserved after departure time");
        traj.visits = {{start, t_dep, t_dep, 0.0}};
        traj.flight_time = 0.0;
    } else {
        const TimeTable tt = TimeTable::build(perf, g, opt.scale);
        traj = detail::plan_route(g, tt, ledger.building_flags(), &ledger, start, goal,
                                  t_dep, opt.hover_threshold, opt.goal_hold_s);
    }
    traj.aircraft = perf.name;
    return traj;
}

// Writes every visit of a planned trajectory into the ledger under `owner`,
// all or nothing. The final block is reserved for `goal_hold_s` past entry
// (forever by default: the aircraft lands and stays); pass the same value
// the trajectory was planned with. A conflict here means the trajectory was
// not planned against this ledger state.
inline void reserve_trajectory(OccupancyLedger& ledger, const Trajectory4D& traj,
                               OwnerId owner, double goal_hold_s = kInf) {
    if (traj.visits.empty()) return;
    const auto visit_interval = [&](std::size_t n) {
        const BlockVisit& v = traj.visits[n];
        if (n + 1 < traj.visits.size()) return TimeInterval{v.t_enter, v.t_exit};
        const double end = goal_hold_s == kInf
                               ? kInf
                               : std::max(v.t_exit, v.t_enter + goal_hold_s);
        return TimeInterval{v.t_enter, end};
    };
    for (std::size_t n = 0; n < traj.visits.size(); ++n) {
        const BlockVisit& v = traj.visits[n];
        const TimeInterval iv = visit_interval(n);
        if (!ledger.is_free(v.block, iv)) {
            const auto& entries = ledger.entries(v.block);
            for (const auto& e : entries)
                if (overlaps(e.interval, iv))
                    throw ConflictError({v.block, e.interval, e.owner});
            throw ConflictError({v.block, iv, owner});
        }
    }
    for (std::size_t n = 0; n < traj.visits.size(); ++n) {
        if (ledger.reserve(traj.visits[n].block, visit_interval(n), owner))
            throw Error("reserve_trajectory: self-overlapping trajectory");
    }
}

}  // namespace airmatrix
