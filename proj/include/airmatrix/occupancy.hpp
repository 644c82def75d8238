#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "airmatrix/common.hpp"
#include "airmatrix/errors.hpp"
#include "airmatrix/grid.hpp"
#include "airmatrix/trajectory.hpp"

namespace airmatrix {

// Half-open time interval [start, end). Two intervals conflict only when they
// overlap with positive measure, so handing a block from one flight to the
// next at the same instant is legal.
struct TimeInterval {
    double start = 0.0;
    double end = 0.0;

    double length() const { return end - start; }
    bool empty() const { return !(end > start); }
    bool operator==(const TimeInterval& o) const = default;
};

inline bool overlaps(const TimeInterval& a, const TimeInterval& b) {
    return std::min(a.end, b.end) > std::max(a.start, b.start);
}

using OwnerId = std::int32_t;
inline constexpr OwnerId kBuildingOwner = 0;

struct Conflict {
    BlockIndex block;
    TimeInterval interval;  // the stored interval that blocks
    OwnerId owner = 0;
};

struct BuildingFootprint {
    std::vector<Vec2> polygon;  // simple polygon, grid-local meters
    double height = 0.0;        // m above ground
};

namespace geom {

// Inclusive point-in-polygon: boundary points count as inside.
inline bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly) {
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = poly[j];
        const Vec2& b = poly[i];
        const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        // On-segment check: collinear and within the bounding box of a-b.
        if (cross == 0.0 && std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
            std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y))
            return true;
        if ((a.y > p.y) != (b.y > p.y)) {
            const double t = (p.y - a.y) / (b.y - a.y);
            if (p.x < a.x + t * (b.x - a.x)) inside = !inside;
        }
    }
    return inside;
}

inline int orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
    const double v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    return (v > 0.0) - (v < 0.0);
}

inline bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

// Inclusive segment intersection (touching endpoints count).
inline bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1,
                               const Vec2& q2) {
    const int o1 = orientation(p1, p2, q1);
    const int o2 = orientation(p1, p2, q2);
    const int o3 = orientation(q1, q2, p1);
    const int o4 = orientation(q1, q2, p2);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(p1, p2, q1)) return true;
    if (o2 == 0 && on_segment(p1, p2, q2)) return true;
    if (o3 == 0 && on_segment(q1, q2, p1)) return true;
    if (o4 == 0 && on_segment(q1, q2, p2)) return true;
    return false;
}

inline bool polygon_is_simple(const std::vector<Vec2>& poly) {
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            // Skip edges sharing a vertex (consecutive, or first-last pair).
            if (j == i || j == (i + 1) % n || (j + 1) % n == i) continue;
            if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j],
                                   poly[(j + 1) % n]))
                return false;
        }
    }
    return true;
}

// Closed-set rectangle/polygon intersection test (touching counts).
inline bool rect_intersects_polygon(double x0, double y0, double x1, double y1,
                                    const std::vector<Vec2>& poly) {
    for (const Vec2& v : poly)
        if (v.x >= x0 && v.x <= x1 && v.y >= y0 && v.y <= y1) return true;
    const std::array<Vec2, 4> corners{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
    for (const Vec2& c : corners)
        if (point_in_polygon(c, poly)) return true;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        for (std::size_t e = 0; e < 4; ++e)
            if (segments_intersect(a, b, corners[e], corners[(e + 1) % 4]))
                return true;
    }
    return false;
}

}  // namespace geom

// Blocks intersected by any footprint. A block counts as occupied if its cell
// rectangle touches the polygon and its vertical span [k*h, (k+1)*h) reaches
// into [0, height], i.e. k*h <= height.
inline std::vector<BlockIndex> rasterize_buildings(
    std::span<const BuildingFootprint> footprints, const GridSpec& g) {
    std::vector<char> hit(g.block_count(), 0);
    for (const BuildingFootprint& f : footprints) {
        if (f.polygon.size() < 3)
            throw MalformedPolygon("rasterize_buildings: polygon needs >= 3 vertices");
        if (!geom::polygon_is_simple(f.polygon))
            throw MalformedPolygon("rasterize_buildings: polygon self-intersects");
        if (!(f.height > 0.0))
            throw MalformedPolygon("rasterize_buildings: height must be positive");

        double minx = f.polygon[0].x, maxx = minx, miny = f.polygon[0].y, maxy = miny;
        for (const Vec2& v : f.polygon) {
            minx = std::min(minx, v.x);
            maxx = std::max(maxx, v.x);
            miny = std::min(miny, v.y);
            maxy = std::max(maxy, v.y);
        }
        const int i0 = std::clamp(
            static_cast<int>(std::floor((minx - g.origin.x) / g.a)), 0, g.I - 1);
        const int i1 = std::clamp(
            static_cast<int>(std::floor((maxx - g.origin.x) / g.a)), 0, g.I - 1);
        const int j0 = std::clamp(
            static_cast<int>(std::floor((miny - g.origin.y) / g.a)), 0, g.J - 1);
        const int j1 = std::clamp(
            static_cast<int>(std::floor((maxy - g.origin.y) / g.a)), 0, g.J - 1);
        const int kmax = std::min(
            g.K - 1, static_cast<int>(std::floor(f.height / g.h)));

        for (int j = j0; j <= j1; ++j) {
            for (int i = i0; i <= i1; ++i) {
                const double x0 = g.origin.x + i * g.a;
                const double y0 = g.origin.y + j * g.a;
                if (!geom::rect_intersects_polygon(x0, y0, x0 + g.a, y0 + g.a,
                                                   f.polygon))
                    continue;
                for (int k = 0; k <= kmax; ++k)
                    hit[flatten({i, j, k}, g)] = 1;
            }
        }
    }
    std::vector<BlockIndex> out;
    for (std::size_t idx = 0; idx < hit.size(); ++idx)
        if (hit[idx]) out.push_back(unflatten(idx, g));
    return out;  // flat-index order == (k, j, i) lexicographic
}

// Per-block reservation ledger. Each block holds a start-sorted list of
// pairwise disjoint intervals with their owners; buildings are owner-0
// reservations over [0, inf). Single writer, multiple readers.
class OccupancyLedger {
public:
    struct Entry {
        TimeInterval interval;
        OwnerId owner = 0;
    };

    explicit OccupancyLedger(const GridSpec& g)
        : grid_(g), blocks_(g.block_count()), building_(g.block_count(), 0) {}

    const GridSpec& grid() const { return grid_; }

    void add_buildings(std::span<const BlockIndex> blocks) {
        for (const BlockIndex& b : blocks) {
            const std::size_t idx = flatten(b, grid_);
            if (building_[idx]) continue;
            building_[idx] = 1;
            if (auto c = reserve(b, {0.0, kInf}, kBuildingOwner))
                throw Error("add_buildings: block already reserved");
        }
    }

    bool is_building(const BlockIndex& b) const { return building_[flatten(b, grid_)] != 0; }

    // Per-block building occupancy as flat flags, for planners that treat
    // buildings as hard obstacles.
    const std::vector<char>& building_flags() const { return building_; }

    bool is_free(const BlockIndex& b, const TimeInterval& iv) const {
        if (iv.empty()) return true;
        const auto& entries = blocks_[flatten(b, grid_)];
        const auto it = first_candidate(entries, iv.start);
        return it == entries.end() || !(it->interval.start < iv.end);
    }

    // True if some reservation covers instant t (t inside [start, end)).
    bool occupied_at(const BlockIndex& b, double t) const {
        const auto& entries = blocks_[flatten(b, grid_)];
        auto it = std::upper_bound(
            entries.begin(), entries.end(), t,
            [](double v, const Entry& e) { return v < e.interval.start; });
        return it != entries.begin() && std::prev(it)->interval.end > t;
    }

    // Inserts if the interval is disjoint from everything stored; otherwise
    // returns the first blocking entry and leaves the ledger unchanged.
    // Zero-length intervals cannot conflict and are not stored.
    std::optional<Conflict> reserve(const BlockIndex& b, const TimeInterval& iv,
                                    OwnerId owner) {
        if (iv.empty()) return std::nullopt;
        auto& entries = blocks_[flatten(b, grid_)];
        const auto it = first_candidate(entries, iv.start);
        if (it != entries.end() && it->interval.start < iv.end)
            return Conflict{b, it->interval, it->owner};
        const auto pos = std::upper_bound(
            entries.begin(), entries.end(), iv.start,
            [](double v, const Entry& e) { return v < e.interval.start; });
        entries.insert(pos, Entry{iv, owner});
        return std::nullopt;
    }

    // Smallest t' >= t such that [t', t' + duration) is free; kInf when no
    // such instant exists (building-occupied block).
    double earliest_free_after(const BlockIndex& b, double t, double duration) const {
        const auto& entries = blocks_[flatten(b, grid_)];
        double candidate = t;
        for (const Entry& e : entries) {
            if (!(e.interval.end > candidate)) continue;       // entirely before
            if (e.interval.start >= candidate + duration) break;  // gap fits
            candidate = e.interval.end;                        // jump past it
        }
        return candidate;
    }

    // Smallest t' >= t not covered by any reservation.
    double next_free_instant(const BlockIndex& b, double t) const {
        const auto& entries = blocks_[flatten(b, grid_)];
        double candidate = t;
        for (const Entry& e : entries) {
            if (!(e.interval.end > candidate)) continue;
            if (e.interval.start > candidate) break;
            candidate = e.interval.end;
        }
        return candidate;
    }

    const std::vector<Entry>& entries(const BlockIndex& b) const {
        return blocks_[flatten(b, grid_)];
    }

private:
    // First stored entry whose interval ends after `t`; any overlap with a
    // query starting at `t` must involve this entry or a later one.
    std::vector<Entry>::const_iterator first_candidate(
        const std::vector<Entry>& entries, double t) const {
        auto it = std::upper_bound(
            entries.begin(), entries.end(), t,
            [](double v, const Entry& e) { return v < e.interval.start; });
        if (it != entries.begin() && std::prev(it)->interval.end > t) return std::prev(it);
        return it;
    }

    GridSpec grid_;
    std::vector<std::vector<Entry>> blocks_;
    std::vector<char> building_;
};

// Reservation failure as an exception, for callers where a conflict signals a
// broken contract rather than an expected outcome.
struct ConflictError : Error {
    Conflict conflict;
    explicit ConflictError(const Conflict& c)
        : Error("conflict at block (" + std::to_string(c.block.i) + ", " +
                std::to_string(c.block.j) + ", " + std::to_string(c.block.k) +
                ") with owner " + std::to_string(c.owner)),
          conflict(c) {}
};

// Duplicate-occupancy metric: samples time at t = 0, dt, 2dt, ... and adds dt
// for every (block, sample) occupied by two or more trajectories at once.
// Buildings never enter (the sum ranges over planned paths only).
inline double duplicate_occupancy_time(std::span<const Trajectory4D> trajectories,
                                       double dt = 1.0) {
    if (!(dt > 0.0)) throw ConfigError("duplicate_occupancy_time: dt must be positive");
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
    double total = 0.0;
    for (const Trajectory4D& traj : trajectories) {
        for (const BlockVisit& v : traj.visits) {
            for (long long m = static_cast<long long>(std::ceil(v.t_enter / dt));
                 m * dt < v.t_exit; ++m) {
                if (++counts[{v.block.i, v.block.j, v.block.k, m}] == 2) total += dt;
            }
        }
    }
    return total;
}

struct OverlapStats {
    double block_seconds = 0.0;    // exact measure where >= 2 flights share a block
    std::size_t event_pairs = 0;   // visit pairs (distinct flights) that overlap
};

// Interval-exact counterpart of the sampled metric above.
inline OverlapStats exact_duplicate_overlap(std::span<const Trajectory4D> trajectories) {
    struct Tagged {
        TimeInterval iv;
        int flight;
    };
    std::map<BlockIndex, std::vector<Tagged>> per_block;
    for (const Trajectory4D& traj : trajectories)
        for (const BlockVisit& v : traj.visits)
            if (v.t_exit > v.t_enter)
                per_block[v.block].push_back({{v.t_enter, v.t_exit}, traj.id});

    OverlapStats stats;
    for (auto& [block, items] : per_block) {
        if (items.size() < 2) continue;
        std::sort(items.begin(), items.end(),
                  [](const Tagged& a, const Tagged& b) { return a.iv.start < b.iv.start; });
        for (std::size_t x = 0; x < items.size(); ++x)
            for (std::size_t y = x + 1; y < items.size(); ++y) {
                if (items[y].iv.start >= items[x].iv.end) break;
                if (items[y].flight != items[x].flight) ++stats.event_pairs;
            }
        // Measure of coverage >= 2 via an endpoint sweep.
        std::vector<std::pair<double, int>> bounds;
        bounds.reserve(items.size() * 2);
        for (const Tagged& t : items) {
            bounds.emplace_back(t.iv.start, +1);
            bounds.emplace_back(t.iv.end, -1);
        }
        std::sort(bounds.begin(), bounds.end());
        int depth = 0;
        double prev = 0.0;
        for (const auto& [t, d] : bounds) {
            if (depth >= 2) stats.block_seconds += t - prev;
            depth += d;
            prev = t;
        }
    }
    return stats;
}

}  // namespace airmatrix
