#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pet/demosaic.hpp"
#include "pet/rng.hpp"

using namespace pet;

namespace {

RawMosaicFrame make_frame(int w, int h, std::vector<uint16_t> data) {
    RawMosaicFrame f;
    f.width = w;
    f.height = h;
    f.data = std::move(data);
    return f;
}

RawMosaicFrame random_frame(int w, int h, uint64_t seed) {
    RawMosaicFrame f;
    f.width = w;
    f.height = h;
    f.data.resize(static_cast<size_t>(w) * h);
    Rng rng(seed);
    for (auto& v : f.data) v = static_cast<uint16_t>(rng.next_below(65536));
    return f;
}

}  // namespace

TEST_CASE("split_superpixels relabels the 2x2 cell", "[demosaic]") {
    // default layout: 90 45 / 135 0
    auto frame = make_frame(2, 2, {10, 20, 30, 40});
    auto ch = split_superpixels(frame);
    CHECK(ch.provenance == ChannelProvenance::superpixel_half_res);
    CHECK(ch.i90.width() == 1);
    CHECK(ch.i90.at(0, 0) == 10.0);
    CHECK(ch.i45.at(0, 0) == 20.0);
    CHECK(ch.i135.at(0, 0) == 30.0);
    CHECK(ch.i0.at(0, 0) == 40.0);
}

TEST_CASE("split_superpixels on constant frame", "[demosaic]") {
    auto frame = make_frame(6, 4, std::vector<uint16_t>(24, 777));
    auto ch = split_superpixels(frame);
    for (int angle : {0, 45, 90, 135})
        for (double v : ch.plane(angle)) CHECK(v == 777.0);
}

TEST_CASE("split_superpixels per-cell values on 4x4", "[demosaic]") {
    // two distinct value sets per 2x2 cell; index-arithmetic oracle
    // cell (cx,cy) carries value base = 100*cy + 10*cx + position code
    std::vector<uint16_t> data(16);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
            data[y * 4 + x] = static_cast<uint16_t>(100 * (y / 2) + 10 * (x / 2) + (y % 2) * 2 + (x % 2));
    auto frame = make_frame(4, 4, data);
    auto ch = split_superpixels(frame);
    for (int cy = 0; cy < 2; ++cy)
        for (int cx = 0; cx < 2; ++cx) {
            double base = 100.0 * cy + 10.0 * cx;
            CHECK(ch.i90.at(cx, cy) == base + 0);   // position (0,0)
            CHECK(ch.i45.at(cx, cy) == base + 1);   // position (0,1)
            CHECK(ch.i135.at(cx, cy) == base + 2);  // position (1,0)
            CHECK(ch.i0.at(cx, cy) == base + 3);    // position (1,1)
        }
}

TEST_CASE("bilinear demosaic preserves constants", "[demosaic]") {
    auto frame = make_frame(8, 6, std::vector<uint16_t>(48, 1234));
    auto ch = demosaic_bilinear(frame);
    CHECK(ch.provenance == ChannelProvenance::full_res_interpolated);
    for (int angle : {0, 45, 90, 135}) {
        CHECK(ch.plane(angle).width() == 8);
        CHECK(ch.plane(angle).height() == 6);
        for (double v : ch.plane(angle)) CHECK(v == 1234.0);
    }
}

TEST_CASE("bilinear demosaic is exact at carrier pixels", "[demosaic]") {
    auto frame = random_frame(16, 12, 42);
    auto ch = demosaic_bilinear(frame);
    for (int angle : {0, 45, 90, 135}) {
        auto [r, c] = frame.layout.position_of(angle);
        const PlaneD& plane = ch.plane(angle);
        for (int y = r; y < frame.height; y += 2)
            for (int x = c; x < frame.width; x += 2)
                CHECK(plane.at(x, y) == static_cast<double>(frame.at(x, y)));
    }
}

TEST_CASE("bilinear demosaic reproduces affine ramps at interior pixels", "[demosaic]") {
    // closed-form oracle: bilinear interpolation of symmetric neighbors
    // reproduces any affine function f(x,y) = a x + b y + c exactly
    const int w = 16, h = 14;
    const double a = 3.0, b = 7.0, c = 11.0;
    RealMosaic mosaic{PlaneD(w, h), SuperpixelLayout::standard()};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) mosaic.samples.at(x, y) = a * x + b * y + c;

    auto ch = demosaic_bilinear(mosaic);
    for (int angle : {0, 45, 90, 135}) {
        const PlaneD& plane = ch.plane(angle);
        for (int y = 1; y < h - 1; ++y)
            for (int x = 1; x < w - 1; ++x)
                CHECK(plane.at(x, y) == Catch::Approx(a * x + b * y + c).margin(1e-12));
    }
}

TEST_CASE("bilinear demosaic on a single 2x2 frame broadcasts the cell", "[demosaic]") {
    auto frame = make_frame(2, 2, {10, 20, 30, 40});
    auto full = demosaic_bilinear(frame);
    auto half = split_superpixels(frame);
    for (int angle : {0, 45, 90, 135}) {
        double expected = half.plane(angle).at(0, 0);
        for (double v : full.plane(angle)) CHECK(v == expected);
    }
}

TEST_CASE("demosaic outputs stay non-negative", "[demosaic]") {
    auto frame = random_frame(20, 18, 7);
    auto full = demosaic_bilinear(frame);
    auto half = split_superpixels(frame);
    for (int angle : {0, 45, 90, 135}) {
        for (double v : full.plane(angle)) CHECK(v >= 0.0);
        for (double v : half.plane(angle)) CHECK(v >= 0.0);
    }
}

TEST_CASE("demosaic is independent of thread count", "[demosaic]") {
    auto frame = random_frame(32, 24, 99);
    auto single = demosaic_bilinear(frame, 1);
    auto multi = demosaic_bilinear(frame, 4);
    for (int angle : {0, 45, 90, 135}) CHECK(single.plane(angle) == multi.plane(angle));
}

TEST_CASE("gaussian kernel sums to one", "[demosaic]") {
    for (double sigma : {0.5, 1.0, 2.0, 3.7}) {
        auto taps = gaussian_kernel(sigma);
        CHECK(taps.size() == 2 * static_cast<size_t>(std::ceil(3.0 * sigma)) + 1);
        double sum = 0.0;
        for (double t : taps) sum += t;
        CHECK(sum == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("gaussian smoothing leaves constants unchanged", "[demosaic]") {
    PlaneD plane(24, 16, 5.0);
    auto out = gaussian_smooth(plane, 1.0);
    for (double v : out) CHECK(v == Catch::Approx(5.0).margin(1e-12));
}

TEST_CASE("gaussian impulse response matches the sampled gaussian", "[demosaic]") {
    // closed-form oracle: response at offset (dx,dy) is the product of the
    // normalized 1D taps
    const double sigma = 1.0;
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    PlaneD plane(33, 33, 0.0);
    plane.at(16, 16) = 1.0;
    auto out = gaussian_smooth(plane, sigma);

    // oracle: sampled gaussian normalized over the truncated square support
    std::vector<double> g(2 * radius + 1);
    double z = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        g[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        z += g[i + radius];
    }
    for (auto& v : g) v /= z;

    for (int dy = -radius - 2; dy <= radius + 2; ++dy) {
        for (int dx = -radius - 2; dx <= radius + 2; ++dx) {
            double expected = 0.0;
            if (std::abs(dx) <= radius && std::abs(dy) <= radius)
                expected = g[dx + radius] * g[dy + radius];
            CHECK(out.at(16 + dx, 16 + dy) == Catch::Approx(expected).margin(1e-6));
        }
    }
}

TEST_CASE("gaussian semigroup: twice sigma 1 approximates once sqrt(2)", "[demosaic]") {
    // smooth random field so the comparison is not dominated by noise
    PlaneD plane(64, 64);
    Rng rng(3);
    for (auto& v : plane) v = rng.next_double();
    plane = gaussian_smooth(plane, 2.0);

    auto twice = gaussian_smooth(gaussian_smooth(plane, 1.0), 1.0);
    auto once = gaussian_smooth(plane, std::sqrt(2.0));
    // interior only: border replication differs between the two routes
    for (int y = 12; y < 52; ++y)
        for (int x = 12; x < 52; ++x)
            CHECK(twice.at(x, y) == Catch::Approx(once.at(x, y)).margin(1e-3));
}

TEST_CASE("gaussian rejects non-positive sigma", "[demosaic]") {
    PlaneD plane(4, 4, 1.0);
    try {
        gaussian_smooth(plane, 0.0);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::non_positive_sigma);
    }
}
