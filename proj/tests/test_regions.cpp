#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "sschema/errors.hpp"
#include "sschema/regions.hpp"

using namespace sschema;

namespace {

Frame make_frame(int w, int h, std::uint8_t fill) {
    Frame f;
    f.width = w;
    f.height = h;
    f.luma.assign(static_cast<std::size_t>(w) * h, fill);
    return f;
}

double iou(const Rect& a, const Rect& b) {
    int x0 = std::max(a.x, b.x), y0 = std::max(a.y, b.y);
    int x1 = std::min(a.x + a.w, b.x + b.w), y1 = std::min(a.y + a.h, b.y + b.h);
    if (x0 >= x1 || y0 >= y1) return 0.0;
    double inter = static_cast<double>(x1 - x0) * (y1 - y0);
    double uni = static_cast<double>(a.w) * a.h + static_cast<double>(b.w) * b.h - inter;
    return inter / uni;
}

}  // namespace

TEST_CASE("change_mask uses strict inequality") {
    Frame a = make_frame(4, 4, 0);
    Frame b = make_frame(4, 4, 0);

    ChangeMask same = change_mask(a, b, 30);
    CHECK(std::count(same.bits.begin(), same.bits.end(), 1) == 0);

    Frame c = make_frame(4, 4, 100);
    ChangeMask all = change_mask(a, c, 30);
    CHECK(std::count(all.bits.begin(), all.bits.end(), 1) == 16);

    Frame d = make_frame(4, 4, 30);
    ChangeMask none = change_mask(a, d, 30);
    CHECK(std::count(none.bits.begin(), none.bits.end(), 1) == 0);

    Frame e = make_frame(3, 4, 0);
    CHECK_THROWS_AS(change_mask(a, e, 30), DimensionError);
}

TEST_CASE("connected_components labels 8-connected regions") {
    ChangeMask mask;
    mask.width = 8;
    mask.height = 8;
    mask.bits.assign(64, 0);

    CHECK(connected_components(mask, 1).empty());

    // 3x3 block at rows 2-4, cols 3-5
    for (int y = 2; y <= 4; ++y) {
        for (int x = 3; x <= 5; ++x) mask.bits[y * 8 + x] = 1;
    }
    auto rects = connected_components(mask, 9);
    REQUIRE(rects.size() == 1);
    CHECK(rects[0] == Rect{3, 2, 3, 3});

    // below min_area
    CHECK(connected_components(mask, 10).empty());

    // diagonal-touching pixels form one component
    ChangeMask diag;
    diag.width = 4;
    diag.height = 4;
    diag.bits.assign(16, 0);
    diag.bits[0 * 4 + 0] = 1;
    diag.bits[1 * 4 + 1] = 1;
    auto drects = connected_components(diag, 1);
    REQUIRE(drects.size() == 1);
    CHECK(drects[0] == Rect{0, 0, 2, 2});
}

TEST_CASE("connected_components output is sorted by (y, x, w, h)") {
    ChangeMask mask;
    mask.width = 20;
    mask.height = 20;
    mask.bits.assign(400, 0);
    auto fill = [&](int x, int y, int w, int h) {
        for (int yy = y; yy < y + h; ++yy) {
            for (int xx = x; xx < x + w; ++xx) mask.bits[yy * 20 + xx] = 1;
        }
    };
    fill(12, 10, 3, 3);
    fill(2, 10, 3, 3);
    fill(5, 1, 3, 3);
    auto rects = connected_components(mask, 1);
    REQUIRE(rects.size() == 3);
    CHECK(rects[0] == Rect{5, 1, 3, 3});
    CHECK(rects[1] == Rect{2, 10, 3, 3});
    CHECK(rects[2] == Rect{12, 10, 3, 3});
}

TEST_CASE("merge_rects joins boxes whose expanded forms intersect") {
    CHECK(merge_rects({}, 4).empty());

    std::vector<Rect> far = {{0, 0, 4, 4}, {40, 40, 4, 4}};
    CHECK(merge_rects(far, 4) == far);

    auto merged = merge_rects({{0, 0, 4, 4}, {5, 0, 4, 4}}, 4);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0] == Rect{0, 0, 9, 4});
}

TEST_CASE("merge_rects is idempotent and order independent") {
    std::mt19937_64 rng(17);
    for (int it = 0; it < 50; ++it) {
        std::vector<Rect> rects;
        int n = 1 + static_cast<int>(rng() % 10);
        for (int i = 0; i < n; ++i) {
            rects.push_back(Rect{static_cast<int>(rng() % 40), static_cast<int>(rng() % 40),
                                 1 + static_cast<int>(rng() % 10),
                                 1 + static_cast<int>(rng() % 10)});
        }
        auto merged = merge_rects(rects, 4);
        CHECK(merge_rects(merged, 4) == merged);

        auto shuffled = rects;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(merge_rects(shuffled, 4) == merged);
    }
}

TEST_CASE("planted rectangles are recovered with high IoU") {
    std::mt19937_64 rng(31);
    for (int it = 0; it < 10; ++it) {
        Frame prev = make_frame(64, 64, 20);
        Frame cur = prev;
        Rect plant{static_cast<int>(rng() % 40), static_cast<int>(rng() % 40),
                   8 + static_cast<int>(rng() % 12), 8 + static_cast<int>(rng() % 12)};
        for (int y = plant.y; y < plant.y + plant.h; ++y) {
            for (int x = plant.x; x < plant.x + plant.w; ++x) cur.at(x, y) = 200;
        }
        auto rects = merge_rects(connected_components(change_mask(prev, cur, 30), 25), 4);
        REQUIRE(rects.size() == 1);
        CHECK(iou(rects[0], plant) >= 0.9);
    }
}

TEST_CASE("kept component pixels are covered by the output rects") {
    std::mt19937_64 rng(41);
    for (int it = 0; it < 20; ++it) {
        ChangeMask mask;
        mask.width = 32;
        mask.height = 32;
        mask.bits.assign(32 * 32, 0);
        for (auto& b : mask.bits) b = (rng() % 100) < 30 ? 1 : 0;

        int min_area = 5;
        auto kept = connected_components(mask, min_area);
        auto merged = merge_rects(kept, 4);
        auto all = connected_components(mask, 1);

        auto covered = [&](int x, int y, const std::vector<Rect>& rects) {
            for (const auto& r : rects) {
                if (x >= r.x && x < r.x + r.w && y >= r.y && y < r.y + r.h) return true;
            }
            return false;
        };
        // every pixel inside a kept component's bbox that is set must be covered
        for (const auto& comp : kept) {
            for (int y = comp.y; y < comp.y + comp.h; ++y) {
                for (int x = comp.x; x < comp.x + comp.w; ++x) {
                    if (mask.test(x, y)) CHECK(covered(x, y, merged));
                }
            }
        }
        (void)all;
    }
}
