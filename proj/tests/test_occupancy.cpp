#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "airmatrix/occupancy.hpp"
#include "oracles.hpp"

using namespace airmatrix;

namespace {
const GridSpec kGrid{{0.0, 0.0, 0.0}, 20.0, 40.0, 6, 6, 3};

Trajectory4D single_block_traj(int id, BlockIndex b, double t0, double t1) {
    Trajectory4D t;
    t.id = id;
    t.visits = {{b, t0, t1, 0.0}};
    t.flight_time = t1 - t0;
    return t;
}
}  // namespace

TEST_CASE("is_free semantics") {
    OccupancyLedger ledger(kGrid);
    const BlockIndex b{1, 1, 0};
    CHECK(ledger.is_free(b, {0.0, 100.0}));

    REQUIRE(!ledger.reserve(b, {0.0, 10.0}, 7));
    CHECK(ledger.is_free(b, {10.0, 12.0}));   // measure-zero touch
    CHECK(!ledger.is_free(b, {5.0, 15.0}));   // overlap length 5
    CHECK(!ledger.is_free(b, {-1.0, 0.5}));
    CHECK(ledger.is_free(b, {5.0, 5.0}));     // empty query interval
}

TEST_CASE("reserve reports the blocking owner and keeps the ledger unchanged") {
    OccupancyLedger ledger(kGrid);
    const BlockIndex b{0, 0, 0};
    CHECK(!ledger.reserve(b, {0.0, 5.0}, 7));

    const auto conflict = ledger.reserve(b, {3.0, 4.0}, 8);
    REQUIRE(conflict.has_value());
    CHECK(conflict->owner == 7);
    CHECK(conflict->interval == TimeInterval{0.0, 5.0});
    CHECK(ledger.entries(b).size() == 1);

    // Half-open adjacency is allowed.
    CHECK(!ledger.reserve(b, {5.0, 6.0}, 8));
    CHECK(ledger.entries(b).size() == 2);
}

TEST_CASE("earliest_free_after scans gaps") {
    OccupancyLedger ledger(kGrid);
    const BlockIndex b{2, 2, 1};
    CHECK(ledger.earliest_free_after(b, 4.0, 2.0) == 4.0);

    REQUIRE(!ledger.reserve(b, {0.0, 10.0}, 1));
    CHECK(ledger.earliest_free_after(b, 4.0, 2.0) == 10.0);

    REQUIRE(!ledger.reserve(b, {11.0, 20.0}, 2));
    // The [10, 11) gap is too short for a 2 s stay.
    CHECK(ledger.earliest_free_after(b, 4.0, 2.0) == 20.0);
    CHECK(ledger.earliest_free_after(b, 4.0, 1.0) == 10.0);
    CHECK(ledger.earliest_free_after(b, 4.0, 0.5) == 10.0);
}

TEST_CASE("buildings occupy forever") {
    OccupancyLedger ledger(kGrid);
    const BlockIndex b{3, 3, 0};
    const BlockIndex blocks[] = {b};
    ledger.add_buildings(blocks);
    CHECK(ledger.is_building(b));
    CHECK(!ledger.is_free(b, {1e9, 1e9 + 1.0}));
    CHECK(ledger.earliest_free_after(b, 0.0, 1.0) == kInf);
    CHECK(ledger.occupied_at(b, 12345.0));
}

TEST_CASE("occupied_at and next_free_instant") {
    OccupancyLedger ledger(kGrid);
    const BlockIndex b{1, 0, 0};
    REQUIRE(!ledger.reserve(b, {5.0, 8.0}, 3));
    CHECK(!ledger.occupied_at(b, 4.999));
    CHECK(ledger.occupied_at(b, 5.0));
    CHECK(ledger.occupied_at(b, 7.999));
    CHECK(!ledger.occupied_at(b, 8.0));
    CHECK(ledger.next_free_instant(b, 6.0) == 8.0);
    CHECK(ledger.next_free_instant(b, 9.0) == 9.0);
}

TEST_CASE("duplicate occupancy metric on sampled ticks") {
    const BlockIndex b{0, 0, 0};
    SECTION("partial overlap") {
        const Trajectory4D trajs[] = {single_block_traj(1, b, 0.0, 10.0),
                                      single_block_traj(2, b, 5.0, 15.0)};
        CHECK(duplicate_occupancy_time(trajs, 1.0) == 5.0);  // ticks 5..9
    }
    SECTION("disjoint blocks") {
        const Trajectory4D trajs[] = {single_block_traj(1, b, 0.0, 10.0),
                                      single_block_traj(2, {1, 0, 0}, 0.0, 10.0)};
        CHECK(duplicate_occupancy_time(trajs, 1.0) == 0.0);
    }
    SECTION("identical occupancies") {
        const Trajectory4D trajs[] = {single_block_traj(1, b, 0.0, 3.0),
                                      single_block_traj(2, b, 0.0, 3.0)};
        CHECK(duplicate_occupancy_time(trajs, 1.0) == 3.0);  // ticks 0, 1, 2
    }
    SECTION("three-deep overlap counts each tick once") {
        const Trajectory4D trajs[] = {single_block_traj(1, b, 0.0, 4.0),
                                      single_block_traj(2, b, 0.0, 4.0),
                                      single_block_traj(3, b, 0.0, 4.0)};
        CHECK(duplicate_occupancy_time(trajs, 1.0) == 4.0);
    }
}

TEST_CASE("exact overlap agrees with the sampled metric on zero/nonzero") {
    const BlockIndex b{0, 0, 0};
    const Trajectory4D overlapping[] = {single_block_traj(1, b, 0.0, 10.0),
                                        single_block_traj(2, b, 5.0, 15.0)};
    const auto stats = exact_duplicate_overlap(overlapping);
    CHECK(stats.block_seconds == 5.0);
    CHECK(stats.event_pairs == 1);

    const Trajectory4D adjacent[] = {single_block_traj(1, b, 0.0, 5.0),
                                     single_block_traj(2, b, 5.0, 9.0)};
    const auto none = exact_duplicate_overlap(adjacent);
    CHECK(none.block_seconds == 0.0);
    CHECK(none.event_pairs == 0);
    CHECK(duplicate_occupancy_time(adjacent, 1.0) == 0.0);
}

TEST_CASE("rasterize buildings") {
    SECTION("square footprint over one cell, two layers") {
        const BuildingFootprint f{
            {{40.0, 60.0}, {60.0, 60.0}, {60.0, 80.0}, {40.0, 80.0}}, 50.0};
        const BuildingFootprint fs[] = {f};
        const auto blocks = rasterize_buildings(fs, kGrid);
        // The exact-cover square touches the 8 surrounding cells too (closed
        // boundaries), on layers 0 and 1.
        std::set<BlockIndex> got(blocks.begin(), blocks.end());
        CHECK(got.count({2, 3, 0}) == 1);
        CHECK(got.count({2, 3, 1}) == 1);
        CHECK(got.count({2, 3, 2}) == 0);
        for (const auto& b : got) CHECK(b.k <= 1);
    }
    SECTION("empty list") {
        CHECK(rasterize_buildings({}, kGrid).empty());
    }
    SECTION("corner-clipping triangle still occupies the cell") {
        const BuildingFootprint f{{{-5.0, -5.0}, {6.0, -5.0}, {-5.0, 6.0}}, 10.0};
        const BuildingFootprint fs[] = {f};
        const auto blocks = rasterize_buildings(fs, kGrid);
        std::set<BlockIndex> got(blocks.begin(), blocks.end());
        CHECK(got.count({0, 0, 0}) == 1);
    }
    SECTION("malformed polygons are rejected") {
        const BuildingFootprint too_few{{{0.0, 0.0}, {1.0, 0.0}}, 10.0};
        const BuildingFootprint fs1[] = {too_few};
        CHECK_THROWS_AS(rasterize_buildings(fs1, kGrid), MalformedPolygon);

        const BuildingFootprint bowtie{
            {{0.0, 0.0}, {10.0, 10.0}, {10.0, 0.0}, {0.0, 10.0}}, 10.0};
        const BuildingFootprint fs2[] = {bowtie};
        CHECK_THROWS_AS(rasterize_buildings(fs2, kGrid), MalformedPolygon);

        const BuildingFootprint flat{{{0.0, 0.0}, {1.0, 0.0}, {2.0, 1.0}}, 0.0};
        const BuildingFootprint fs3[] = {flat};
        CHECK_THROWS_AS(rasterize_buildings(fs3, kGrid), MalformedPolygon);
    }
}

TEST_CASE("rasterization agrees with a Monte-Carlo membership oracle") {
    std::mt19937_64 rng(99);
    const GridSpec g{{0.0, 0.0, 0.0}, 20.0, 40.0, 10, 10, 3};
    for (int round = 0; round < 10; ++round) {
        const double cx = rng_range(rng, 20.0, 180.0);
        const double cy = rng_range(rng, 20.0, 180.0);
        BuildingFootprint f;
        f.polygon = oracle::random_simple_polygon(
            rng, cx, cy, 5.0, 30.0, 3 + static_cast<int>(rng_below(rng, 6)));
        f.height = rng_range(rng, 10.0, 130.0);
        const BuildingFootprint fs[] = {f};
        const auto blocks = rasterize_buildings(fs, g);
        const std::set<BlockIndex> got(blocks.begin(), blocks.end());
        for (int n = 0; n < 500; ++n) {
            const Vec2 p = oracle::sample_point_in_polygon(rng, f.polygon);
            const double z = rng_range(rng, 0.0, std::min(f.height, g.ceiling()));
            const BlockIndex b = block_of_point({p.x, p.y, z}, g);
            CHECK(got.count(b) == 1);
        }
    }
}

TEST_CASE("randomized ledger operations match the dense-lattice oracle") {
    // All interval endpoints live on the 0.1 s lattice, built as m * 0.1 on
    // both sides so comparisons see identical doubles.
    std::mt19937_64 rng(41);
    const double step = 0.1;
    const long long horizon = 600;  // 60 s
    OccupancyLedger ledger(kGrid);
    oracle::LatticeLedger brute(step);

    int reserve_successes = 0;
    for (int n = 0; n < 1000; ++n) {
        const BlockIndex b{static_cast<int>(rng_below(rng, 2)),
                           static_cast<int>(rng_below(rng, 2)), 0};
        const long long lo = static_cast<long long>(rng_below(rng, horizon));
        const long long len = 1 + static_cast<long long>(rng_below(rng, 80));
        const long long hi = lo + len;
        const TimeInterval iv{lo * step, hi * step};

        const int op = static_cast<int>(rng_below(rng, 3));
        if (op == 0) {
            const bool lib_ok = !ledger.reserve(b, iv, n + 1).has_value();
            const bool brute_ok = brute.reserve(b, lo, hi);
            CHECK(lib_ok == brute_ok);
            reserve_successes += lib_ok;
        } else if (op == 1) {
            CHECK(ledger.is_free(b, iv) == brute.is_free(b, lo, hi));
        } else {
            const double got = ledger.earliest_free_after(b, lo * step, len * step);
            const long long want = brute.earliest_free_after(b, lo, len, horizon * 4);
            CHECK(got == brute.lattice_time(want));
        }
    }
    CHECK(reserve_successes > 0);

    // Full-scan disjointness after the dust settles.
    for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 2; ++i) {
            const auto& entries = ledger.entries({i, j, 0});
            for (std::size_t x = 0; x + 1 < entries.size(); ++x) {
                CHECK(entries[x].interval.start < entries[x + 1].interval.start);
                CHECK(entries[x].interval.end <= entries[x + 1].interval.start);
            }
        }
}

TEST_CASE("reserve succeeds exactly when is_free held") {
    std::mt19937_64 rng(1234);
    OccupancyLedger ledger(kGrid);
    for (int n = 0; n < 500; ++n) {
        const BlockIndex b{static_cast<int>(rng_below(rng, 3)), 0, 0};
        const double lo = rng_range(rng, 0.0, 50.0);
        const TimeInterval iv{lo, lo + rng_range(rng, 0.1, 8.0)};
        const bool free = ledger.is_free(b, iv);
        const bool reserved = !ledger.reserve(b, iv, n).has_value();
        CHECK(free == reserved);
    }
}
