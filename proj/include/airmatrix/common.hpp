#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>

namespace airmatrix {

inline constexpr double kGravity = 9.81;  // m/s^2
inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    bool operator==(const Vec3& o) const = default;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Vec2& o) const = default;
};

// Shortest round-trip decimal form, for deterministic CSV output.
inline std::string format_double(double v) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

// Bounded draws on top of mt19937_64. The standard distributions are
// implementation-defined, so seeded scenarios would not reproduce across
// standard libraries; these helpers pin the exact draw sequence.
inline std::uint64_t rng_below(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t rem = std::numeric_limits<std::uint64_t>::max() % n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - rem;
    for (;;) {
        const std::uint64_t v = rng();
        if (v < limit) return v % n;
    }
}

// Uniform in [0, 1), 53-bit resolution.
inline double rng_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double rng_range(std::mt19937_64& rng, double lo, double hi) {
    return lo + rng_unit(rng) * (hi - lo);
}

}  // namespace airmatrix
