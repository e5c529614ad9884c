#include "doctest.h"

#include <algorithm>
#include <map>
#include <string>

#include "bmc/error.hpp"
#include "bmc/morphology.hpp"
#include "bmc/pnm.hpp"
#include "support.hpp"

using namespace bmc;

namespace {

Mask random_mask(Rng& rng, int w, int h, double p) {
    Mask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (rng.uniform01() < p) m.set(x, y);
    return m;
}

Bytes bytes_of(const std::string& s) { return Bytes(s.begin(), s.end()); }

std::size_t format_offset(const std::string& s) {
    try {
        (void)read_ppm(bytes_of(s));
    } catch (const FormatError& e) {
        return e.offset();
    }
    return std::string::npos;
}

}  // namespace

TEST_CASE("components agree with a flood-fill labelling") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const Mask m = random_mask(rng, rng.uniform_int(1, 24), rng.uniform_int(1, 24), rng.uniform01());
        for (bool eight : {false, true}) {
            const Components cc = connected_components(m, eight ? Connectivity::Eight : Connectivity::Four);
            const auto ref = oracle::components(m, eight);
            REQUIRE(cc.regions.size() == ref.size());
            // Oracle components come out in seed raster order too.
            for (std::size_t i = 0; i < ref.size(); ++i) {
                CHECK(cc.regions[i].pixel_count == static_cast<long long>(ref[i].size()));
                CHECK(cc.regions[i].seed_pixel == Point{ref[i][0].first, ref[i][0].second});
                for (auto [x, y] : ref[i]) CHECK(cc.labels(x, y) == cc.regions[i].id);
            }
        }
    }
}

TEST_CASE("erode and dilate match the 3x3 definition") {
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const Mask m = random_mask(rng, rng.uniform_int(1, 20), rng.uniform_int(1, 20), 0.7);
        CHECK(erode(m, 1) == oracle::erode3(m));
        CHECK(erode(m, 2) == oracle::erode3(oracle::erode3(m)));
        // Dilation is the complement of eroding the complement, with the
        // outside now counting as foreground of the complement.
        Mask d(m.width(), m.height());
        for (int y = 0; y < m.height(); ++y)
            for (int x = 0; x < m.width(); ++x) {
                bool any = false;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) any = any || m.test(x + dx, y + dy);
                if (any) d.set(x, y);
            }
        CHECK(dilate(m, 1) == d);
    }
}

TEST_CASE("fill_holes closes exactly the background not reachable from the border") {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const Mask m = random_mask(rng, rng.uniform_int(1, 20), rng.uniform_int(1, 20), 0.6);
        Mask expect = m;
        for (const auto& comp : oracle::components(~m, false)) {
            bool border = false;
            for (auto [x, y] : comp) border = border || x == 0 || y == 0 || x == m.width() - 1 || y == m.height() - 1;
            if (!border)
                for (auto [x, y] : comp) expect.set(x, y);
        }
        CHECK(fill_holes(m) == expect);
    }
}

TEST_CASE("skeletonize matches a textbook thinning") {
    Rng rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        const Mask m = testkit::random_blob(rng, 40, 40, 3);
        CHECK(skeletonize(m) == oracle::zhang_suen(m));
    }
}

TEST_CASE("outer contour of a filled square") {
    Mask m(10, 10);
    for (int y = 2; y <= 6; ++y)
        for (int x = 3; x <= 7; ++x) m.set(x, y);
    const Components cc = connected_components(m, Connectivity::Eight);
    const Contour c = trace_outer_contour(m, cc.regions[0]);
    CHECK(c.points.front() == Point{3, 2});
    CHECK(c.size() == 16);
    long long shoelace = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const Point a = c.points[i], b = c.points[(i + 1) % c.size()];
        shoelace += static_cast<long long>(a.x) * b.y - static_cast<long long>(b.x) * a.y;
    }
    CHECK(shoelace < 0);
    const ContourMetrics cm = contour_metrics(c, m);
    CHECK(cm.area == 25.0);
    CHECK(cm.perimeter == doctest::Approx(16.0));
    CHECK(circularity(cm.area, cm.perimeter) == doctest::Approx(4 * 3.14159265358979 * 25 / 256));
    CHECK(circularity(5, 0) == 0.0);
}

TEST_CASE("single pixel contour has zero perimeter") {
    Mask m(3, 3);
    m.set(1, 1);
    const Components cc = connected_components(m, Connectivity::Eight);
    const Contour c = trace_outer_contour(m, cc.regions[0]);
    CHECK(contour_metrics(c, m).perimeter == 0.0);
}

TEST_CASE("convex hull and defects of an L shape") {
    const auto hull = convex_hull({{0, 0}, {2, 0}, {1, 1}, {2, 2}, {0, 2}, {1, 0}});
    CHECK(hull.size() == 4);
    Mask m(20, 20);
    for (int y = 2; y <= 17; ++y)
        for (int x = 2; x <= 6; ++x) m.set(x, y);
    for (int y = 13; y <= 17; ++y)
        for (int x = 2; x <= 17; ++x) m.set(x, y);
    const Components cc = connected_components(m, Connectivity::Eight);
    const auto defects = convexity_defects(trace_outer_contour(m, cc.regions[0]));
    double deepest = 0;
    for (const auto& d : defects) deepest = std::max(deepest, d.depth);
    CHECK(deepest > 5.0);
    CHECK(line_distance({0, 5}, {0, 0}, {10, 0}) == doctest::Approx(5.0));
}

TEST_CASE("largest component and small component removal") {
    Mask m(10, 4);
    m.set(0, 0);
    m.set(1, 0);
    m.set(5, 2);
    m.set(6, 2);
    m.set(7, 2);
    Mask big(10, 4);
    big.set(5, 2);
    big.set(6, 2);
    big.set(7, 2);
    CHECK(largest_component(m) == big);
    CHECK(remove_small_components(m, 3) == big);
    Mask anchor(10, 4);
    anchor.set(0, 0);
    CHECK(components_touching(m, anchor).count() == 2);
}

TEST_CASE("ppm and pgm round trip") {
    Rng rng(9);
    const RgbImage img = testkit::random_image(rng, 7, 5);
    CHECK(read_ppm(write_ppm(img)) == img);
    GrayImage g(4, 3);
    for (int i = 0; i < 12; ++i) g(i % 4, i / 4) = static_cast<std::uint8_t>(i * 20);
    CHECK(read_pgm(write_pgm(g)) == g);
    Mask m(5, 5);
    m.set(2, 3);
    CHECK(read_mask_pgm(write_mask_pgm(m)) == m);
    // Comments and whitespace runs are accepted in the header.
    CHECK(read_ppm(bytes_of(std::string("P6 # c\n 1\t1\n255\n") + "abc")) == RgbImage(1, 1, Rgb{'a', 'b', 'c'}));
}

TEST_CASE("pnm errors carry byte offsets") {
    CHECK(format_offset("P5\n1 1\n255\nx") == 0);
    CHECK(format_offset("P6\n1 1\n200\nabc") == 7);
    CHECK(format_offset("P6\n0 1\n255\n") == 3);
    CHECK(format_offset("P6\nx 1\n255\n") == 3);
    CHECK(format_offset("P6\n2 1\n255\nabc") != std::string::npos);
    std::string bad = "P5\n2 1\n255\n";
    bad += static_cast<char>(0);
    bad += static_cast<char>(7);
    try {
        (void)read_mask_pgm(bytes_of(bad));
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.offset() == 12);
    }
}

TEST_CASE("roi helpers") {
    const Roi a{0, 0, 9, 9}, b{5, 5, 14, 14};
    CHECK(bounding_union(a, b) == Roi{0, 0, 14, 14});
    CHECK(*intersect(a, b) == Roi{5, 5, 9, 9});
    CHECK_FALSE(intersect(a, Roi{20, 20, 21, 21}).has_value());
    CHECK(clip_roi(Roi{-3, -3, 30, 4}, 10, 10) == Roi{0, 0, 9, 4});
    CHECK(a.area() == 100);
}

TEST_CASE("mask from gray rejects values other than 0 and 255") {
    GrayImage g(2, 1);
    g(0, 0) = 255;
    CHECK(Mask::from_gray(g).count() == 1);
    g(1, 0) = 3;
    CHECK_THROWS(Mask::from_gray(g));
    CHECK(Mask::nonzero(g).count() == 2);
}
