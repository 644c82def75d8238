#pragma once

#include <array>
#include <cstdint>
#include <tuple>
#include <utility>
#include <vector>

#include "airmatrix/common.hpp"
#include "airmatrix/errors.hpp"

namespace airmatrix {

// Airspace grid: an I x J x K array of axis-aligned blocks, each a x a wide
// and h tall, anchored at `origin`. All coordinates are local Cartesian
// meters. Immutable after construction; safe for concurrent reads.
struct GridSpec {
    Vec3 origin{0.0, 0.0, 0.0};
    double a = 20.0;  // block side length (m)
    double h = 40.0;  // block height (m)
    int I = 1;
    int J = 1;
    int K = 1;

    std::size_t block_count() const {
        return static_cast<std::size_t>(I) * static_cast<std::size_t>(J) *
               static_cast<std::size_t>(K);
    }
    double width() const { return a * I; }
    double depth() const { return a * J; }
    double ceiling() const { return h * K; }

    void validate() const {
        if (!(a > 0.0) || !(h > 0.0))
            throw ConfigError("grid: block dimensions must be positive");
        if (I < 1 || J < 1 || K < 1)
            throw ConfigError("grid: block counts must be >= 1");
    }
};

// Zero-based block coordinates. Orders lexicographically by (k, j, i), which
// matches the flat storage order used throughout.
struct BlockIndex {
    int i = 0;
    int j = 0;
    int k = 0;

    bool operator==(const BlockIndex& o) const = default;
    bool operator<(const BlockIndex& o) const {
        return std::tie(k, j, i) < std::tie(o.k, o.j, o.i);
    }
};

inline bool in_bounds(const BlockIndex& b, const GridSpec& g) {
    return b.i >= 0 && b.i < g.I && b.j >= 0 && b.j < g.J && b.k >= 0 && b.k < g.K;
}

inline std::size_t flatten(const BlockIndex& b, const GridSpec& g) {
    return (static_cast<std::size_t>(b.k) * g.J + b.j) * g.I + b.i;
}

inline BlockIndex unflatten(std::size_t idx, const GridSpec& g) {
    const int i = static_cast<int>(idx % g.I);
    const int j = static_cast<int>((idx / g.I) % g.J);
    const int k = static_cast<int>(idx / (static_cast<std::size_t>(g.I) * g.J));
    return {i, j, k};
}

// The five geometric shapes a block-to-neighbor link can take.
enum class LinkShape : std::uint8_t {
    AxisH,       // one horizontal axis        length a
    DiagH,       // horizontal diagonal        length sqrt(2)*a
    Vertical,    // straight up/down           length h
    FaceDiag,    // one axis + vertical        length sqrt(a^2+h^2)
    CornerDiag,  // both axes + vertical       length sqrt(2a^2+h^2)
};

struct LinkClass {
    LinkShape shape = LinkShape::AxisH;
    int vertical_sign = 0;   // -1 descend, 0 level, +1 climb
    double length = 0.0;     // m
    double elevation = 0.0;  // signed radians, angle to the horizontal plane
};

inline LinkClass classify_link(int di, int dj, int dk, const GridSpec& g) {
    const int ah = std::abs(di) + std::abs(dj);
    const int av = std::abs(dk);
    const int sign = (dk > 0) - (dk < 0);
    if (ah == 0 && av == 0) throw Error("classify_link: zero offset");
    if (av == 0) {
        if (ah == 1) return {LinkShape::AxisH, 0, g.a, 0.0};
        return {LinkShape::DiagH, 0, std::sqrt(2.0) * g.a, 0.0};
    }
    if (ah == 0)
        return {LinkShape::Vertical, sign, g.h, sign * (std::acos(-1.0) / 2.0)};
    if (ah == 1)
        return {LinkShape::FaceDiag, sign, std::hypot(g.a, g.h),
                sign * std::atan2(g.h, g.a)};
    return {LinkShape::CornerDiag, sign, std::hypot(std::sqrt(2.0) * g.a, g.h),
            sign * std::atan2(g.h, std::sqrt(2.0) * g.a)};
}

// Maps a point to the block containing it. Points on a shared face belong to
// the higher-index block; points on the outer boundary are clamped inward, so
// the map is total on the closed grid box.
inline BlockIndex block_of_point(const Vec3& p, const GridSpec& g) {
    const Vec3 rel = p - g.origin;
    if (rel.x < 0.0 || rel.y < 0.0 || rel.z < 0.0 || rel.x > g.width() ||
        rel.y > g.depth() || rel.z > g.ceiling()) {
        throw PointOutOfBounds("point (" + format_double(p.x) + ", " +
                               format_double(p.y) + ", " + format_double(p.z) +
                               ") outside grid box");
    }
    const auto cell = [](double v, double size, int n) {
        const int idx = static_cast<int>(std::floor(v / size));
        return std::clamp(idx, 0, n - 1);
    };
    return {cell(rel.x, g.a, g.I), cell(rel.y, g.a, g.J), cell(rel.z, g.h, g.K)};
}

inline Vec3 center(const BlockIndex& b, const GridSpec& g) {
    return g.origin + Vec3{(b.i + 0.5) * g.a, (b.j + 0.5) * g.a, (b.k + 0.5) * g.h};
}

// 26-connected neighborhood, in (dk, dj, di) ascending order.
inline std::vector<std::pair<BlockIndex, LinkClass>> neighbors(const BlockIndex& b,
                                                               const GridSpec& g) {
    std::vector<std::pair<BlockIndex, LinkClass>> out;
    out.reserve(26);
    for (int dk = -1; dk <= 1; ++dk)
        for (int dj = -1; dj <= 1; ++dj)
            for (int di = -1; di <= 1; ++di) {
                if (di == 0 && dj == 0 && dk == 0) continue;
                const BlockIndex n{b.i + di, b.j + dj, b.k + dk};
                if (!in_bounds(n, g)) continue;
                out.emplace_back(n, classify_link(di, dj, dk, g));
            }
    return out;
}

// One canonical entry per move type. `elevation` is the magnitude; links of a
// type occur with both vertical signs and the speed model depends only on the
// magnitude.
struct LinkTableEntry {
    int di = 0;
    int dj = 0;
    int dk = 0;
    LinkShape shape = LinkShape::AxisH;
    double length = 0.0;
    double elevation = 0.0;  // |phi|, radians
};

// The seven single-step move types of the grid: x, y, z, xy, xz, yz, xyz.
inline std::array<LinkTableEntry, 7> link_table(const GridSpec& g) {
    constexpr std::array<std::array<int, 3>, 7> patterns{{
        {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1}}};
    std::array<LinkTableEntry, 7> out{};
    for (std::size_t n = 0; n < patterns.size(); ++n) {
        const auto [di, dj, dk] = patterns[n];
        const LinkClass c = classify_link(di, dj, dk, g);
        out[n] = {di, dj, dk, c.shape, c.length, std::abs(c.elevation)};
    }
    return out;
}

}  // namespace airmatrix
