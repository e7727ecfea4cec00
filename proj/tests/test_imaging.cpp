#include <doctest.h>

#include <random>

#include "kpbms/imaging.hpp"
#include "oracles.hpp"

using namespace kpbms;

namespace {

GrayImage image_2x2() {
    return GrayImage::from_data(2, 2, {0.2, 0.8, 0.5, 1.0});
}

BinaryMap map_from(const std::vector<std::vector<int>>& rows) {
    BinaryMap map(static_cast<int>(rows[0].size()), static_cast<int>(rows.size()));
    for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x) map.set(x, y, rows[y][x] != 0);
    return map;
}

}  // namespace

TEST_CASE("intensity_at reads the pixel under the keypoint") {
    const GrayImage img = image_2x2();
    CHECK(intensity_at(img, {1, 1}) == doctest::Approx(1.0));

    GrayImage zero(3, 3, 0.4);
    zero.set(2, 0, 0.0);
    CHECK(intensity_at(zero, {2, 0}) == 0.0);

    GrayImage ramp(3, 3);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 3; ++x) ramp.set(x, y, (y * 3 + x) / 10.0);
    ramp.set(1, 1, 0.5);
    CHECK(intensity_at(ramp, {1, 1}) == doctest::Approx(0.5));

    CHECK_THROWS_AS(intensity_at(img, {2, 0}), std::out_of_range);
    CHECK_THROWS_AS(intensity_at(img, {0, -1}), std::out_of_range);
}

TEST_CASE("threshold compares inclusively") {
    const GrayImage img = image_2x2();
    const BinaryMap t = threshold(img, 0.5);
    CHECK_FALSE(t.at(0, 0));
    CHECK(t.at(1, 0));
    CHECK(t.at(0, 1));  // 0.5 >= 0.5
    CHECK(t.at(1, 1));

    CHECK(threshold(img, 0.0).count() == 4);  // all-ones at theta 0
    CHECK(threshold(GrayImage(4, 3, 0.0), 0.5).count() == 0);

    CHECK_THROWS_AS(threshold(img, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(threshold(img, 1.5), std::invalid_argument);
}

TEST_CASE("flood_fill keeps exactly the seeded component") {
    const BinaryMap map = map_from({{1, 1, 0}, {0, 0, 0}, {0, 1, 1}});
    const BinaryMap filled = flood_fill(map, {0, 0}, Connectivity::four);
    CHECK(filled == map_from({{1, 1, 0}, {0, 0, 0}, {0, 0, 0}}));

    // inactive seed: silently empty
    CHECK(flood_fill(map, {2, 1}, Connectivity::four).count() == 0);

    CHECK_THROWS_AS(flood_fill(map, {3, 0}, Connectivity::four), std::out_of_range);
}

TEST_CASE("flood_fill matches the BFS oracle on random maps") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> coord(0, 31);
    for (int i = 0; i < 300; ++i) {
        const auto conn = (i % 2 == 0) ? Connectivity::four : Connectivity::eight;
        const BinaryMap map = oracles::random_map(rng, 32, 32, 0.55);
        int sx = coord(rng);
        int sy = coord(rng);
        // bias toward active seeds; inactive ones stay as edge cases
        for (int tries = 0; tries < 8 && !map.at(sx, sy); ++tries) {
            sx = coord(rng);
            sy = coord(rng);
        }
        CHECK(flood_fill(map, {sx, sy}, conn) == oracles::flood_bfs(map, sx, sy, conn));
    }
}

TEST_CASE("connected_components splits by connectivity") {
    const BinaryMap diag = map_from({{1, 0}, {0, 1}});
    CHECK(connected_components(diag, Connectivity::four).size() == 2);
    CHECK(connected_components(diag, Connectivity::eight).size() == 1);
    CHECK(connected_components(BinaryMap(5, 4), Connectivity::eight).empty());
}

TEST_CASE("components partition the active set") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 120; ++i) {
        const auto conn = (i % 2 == 0) ? Connectivity::four : Connectivity::eight;
        const BinaryMap map = oracles::random_map(rng, 32, 32, 0.45);
        const auto components = connected_components(map, conn);
        BinaryMap rebuilt(32, 32);
        for (const auto& mask : components) {
            for (int y = 0; y < 32; ++y)
                for (int x = 0; x < 32; ++x)
                    if (mask.at(x, y)) {
                        CHECK_FALSE(rebuilt.at(x, y));  // disjoint
                        rebuilt.set(x, y, true);
                    }
        }
        CHECK(rebuilt == map);
        // each mask is a single connected region
        for (const auto& mask : components) {
            int first_x = -1;
            int first_y = -1;
            for (int y = 0; y < 32 && first_x < 0; ++y)
                for (int x = 0; x < 32; ++x)
                    if (mask.at(x, y)) {
                        first_x = x;
                        first_y = y;
                        break;
                    }
            CHECK(oracles::flood_bfs(mask, first_x, first_y, conn) == mask);
        }
    }
}

TEST_CASE("threshold monotonicity: higher cut shrinks the active set") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> data(16 * 16);
        for (auto& v : data) v = value(rng);
        const GrayImage img = GrayImage::from_data(16, 16, std::move(data));
        double a = value(rng);
        double b = value(rng);
        if (a > b) std::swap(a, b);
        const BinaryMap loose = threshold(img, a);
        const BinaryMap tight = threshold(img, b);
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x)
                if (tight.at(x, y)) CHECK(loose.at(x, y));
    }
}

TEST_CASE("flood nesting and idempotence") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> coord(0, 23);
    for (int i = 0; i < 60; ++i) {
        const auto conn = (i % 2 == 0) ? Connectivity::four : Connectivity::eight;
        const BinaryMap big = oracles::random_map(rng, 24, 24, 0.6);
        BinaryMap small = big;
        for (int y = 0; y < 24; ++y)
            for (int x = 0; x < 24; ++x)
                if (small.at(x, y) && (x + y) % 3 == 0) small.set(x, y, false);
        const int sx = coord(rng);
        const int sy = coord(rng);
        if (!small.at(sx, sy)) continue;  // nesting needs the seed active in both
        const BinaryMap in_small = flood_fill(small, {sx, sy}, conn);
        const BinaryMap in_big = flood_fill(big, {sx, sy}, conn);
        for (int y = 0; y < 24; ++y)
            for (int x = 0; x < 24; ++x)
                if (in_small.at(x, y)) CHECK(in_big.at(x, y));
        CHECK(flood_fill(in_big, {sx, sy}, conn) == in_big);
    }
}

TEST_CASE("GrayImage and KeypointSet enforce their invariants") {
    CHECK_THROWS_AS(GrayImage::from_data(2, 2, {0.0, 0.5, 1.2, 0.1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(GrayImage::from_data(2, 2, {0.0, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(GrayImage(0, 4), std::invalid_argument);

    KeypointSet set;
    set.add({3, 4, LightClass::direct});
    set.add({3, 4, LightClass::indirect});  // same pixel, other class: fine
    CHECK_THROWS_AS(set.add({3, 4, LightClass::direct}), std::invalid_argument);
    CHECK(set.size() == 2);
}
