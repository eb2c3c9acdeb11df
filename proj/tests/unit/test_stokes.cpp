#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pet/rng.hpp"
#include "pet/stokes.hpp"

using namespace pet;

namespace {

constexpr double kPi = 3.14159265358979323846;

PolarizationChannels constant_channels(double v0, double v45, double v90, double v135, int w = 4,
                                       int h = 4) {
    return PolarizationChannels{PlaneD(w, h, v0), PlaneD(w, h, v45), PlaneD(w, h, v90),
                                PlaneD(w, h, v135), ChannelProvenance::full_res_interpolated};
}

ProductConfig test_config(DolpConvention conv = DolpConvention::paper_literal) {
    ProductConfig cfg;
    cfg.epsilon = 1e-6;
    cfg.mask_threshold_rel = 0.0;  // no masking unless the test asks for it
    cfg.dolp_convention = conv;
    return cfg;
}

/// reference HSV->RGB used as an independent oracle (different formulation:
/// piecewise hue/chroma construction instead of sector tables)
void oracle_hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
    h = h - std::floor(h);
    double c = v * s;
    double hp = h * 6.0;
    double xx = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r1 = 0, g1 = 0, b1 = 0;
    if (hp < 1) { r1 = c; g1 = xx; }
    else if (hp < 2) { r1 = xx; g1 = c; }
    else if (hp < 3) { g1 = c; b1 = xx; }
    else if (hp < 4) { g1 = xx; b1 = c; }
    else if (hp < 5) { r1 = xx; b1 = c; }
    else { r1 = c; b1 = xx; }
    double m = v - c;
    r = r1 + m;
    g = g1 + m;
    b = b1 + m;
}

}  // namespace

TEST_CASE("stokes formulas on hand-evaluated triples", "[stokes]") {
    auto ch = constant_channels(4.0, 3.0, 2.0, 1.0);
    auto maps = compute_stokes(ch);
    CHECK(maps.s0.at(1, 1) == 10.0);
    CHECK(maps.s1.at(1, 1) == 2.0);
    CHECK(maps.s2.at(1, 1) == 2.0);

    auto products = compute_products(maps, test_config());
    CHECK(products.intensity.at(0, 0) == Catch::Approx(2.5).margin(1e-9));
    CHECK(products.dolp.at(0, 0) == Catch::Approx(0.28284).margin(1e-5));
    // exact: sqrt(8)/(10 + 1e-6)
    CHECK(products.dolp.at(0, 0) ==
          Catch::Approx(std::sqrt(8.0) / (10.0 + 1e-6)).margin(1e-12));
    CHECK(products.aolp.at(0, 0) == Catch::Approx(kPi / 8.0).margin(1e-9));
}

TEST_CASE("unpolarized channels give zero dolp and aolp", "[stokes]") {
    auto ch = constant_channels(7.0, 7.0, 7.0, 7.0);
    auto maps = compute_stokes(ch);
    CHECK(maps.s0.at(0, 0) == 28.0);
    CHECK(maps.s1.at(0, 0) == 0.0);
    CHECK(maps.s2.at(0, 0) == 0.0);
    auto products = compute_products(maps, test_config());
    CHECK(products.dolp.at(0, 0) == 0.0);
    CHECK(products.aolp.at(0, 0) == 0.0);  // atan2(0,0) defined as 0
}

TEST_CASE("fully zero-degree polarized sampling", "[stokes]") {
    auto ch = constant_channels(1.0, 0.5, 0.0, 0.5);
    auto maps = compute_stokes(ch);
    CHECK(maps.s0.at(0, 0) == 2.0);
    CHECK(maps.s1.at(0, 0) == 1.0);
    CHECK(maps.s2.at(0, 0) == 0.0);
}

TEST_CASE("low-s0 pixels are masked and zeroed", "[stokes]") {
    PolarizationChannels ch = constant_channels(100.0, 90.0, 80.0, 70.0, 8, 8);
    // one dim pixel
    ch.i0.at(2, 3) = 0.1;
    ch.i45.at(2, 3) = 0.1;
    ch.i90.at(2, 3) = 0.05;
    ch.i135.at(2, 3) = 0.05;
    ProductConfig cfg = test_config();
    cfg.mask_threshold_rel = 0.01;
    auto products = compute_products(compute_stokes(ch), cfg);
    CHECK(products.mask.at(2, 3) == 0);
    CHECK(products.dolp.at(2, 3) == 0.0);
    CHECK(products.aolp.at(2, 3) == 0.0);
    CHECK(products.mask.at(0, 0) == 1);
    CHECK(products.dolp.at(0, 0) > 0.0);
    // intensity is never masked out
    CHECK(products.intensity.at(2, 3) == Catch::Approx(0.3 / 4.0));
}

TEST_CASE("normalize_intensity", "[stokes]") {
    SECTION("constant plane maps to all ones") {
        PlaneD plane(5, 5, 5.0);
        auto out = normalize_intensity(plane);
        for (double v : out) CHECK(v == 1.0);
    }
    SECTION("1..100 plane: p99 interpolates to 99.01") {
        PlaneD plane(10, 10);
        for (int i = 0; i < 100; ++i) plane.data()[i] = static_cast<double>(i + 1);
        auto out = normalize_intensity(plane);
        // oracle: p99 of 1..100 under the (n-1)p/100 rule is 99.01
        const double p99 = 99.01;
        CHECK(out.data()[98] == Catch::Approx(99.0 / p99).margin(1e-12));
        CHECK(out.data()[99] == 1.0);  // 100 clamps
    }
    SECTION("all-zero plane stays zero without errors") {
        PlaneD plane(4, 4, 0.0);
        auto out = normalize_intensity(plane);
        for (double v : out) CHECK(v == 0.0);
    }
}

TEST_CASE("dolp bounded and aolp in principal range on random channels", "[stokes]") {
    Rng rng(11);
    PolarizationChannels ch = constant_channels(0, 0, 0, 0, 16, 16);
    for (int angle : {0, 45, 90, 135})
        for (auto& v : ch.plane(angle)) v = 1000.0 * rng.next_double();
    auto products = compute_products(compute_stokes(ch), test_config());
    for (double v : products.dolp) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    for (double v : products.aolp) {
        CHECK(v > -kPi / 2.0 - 1e-15);
        CHECK(v <= kPi / 2.0 + 1e-15);
    }
}

TEST_CASE("channel swap shifts aolp by pi/2 modulo pi", "[stokes]") {
    auto ch = constant_channels(5.0, 4.0, 2.0, 1.0);
    auto swapped = constant_channels(2.0, 1.0, 5.0, 4.0);  // i0<->i90, i45<->i135
    auto a = compute_products(compute_stokes(ch), test_config());
    auto b = compute_products(compute_stokes(swapped), test_config());
    double delta = std::fmod(std::abs(a.aolp.at(0, 0) - b.aolp.at(0, 0)), kPi);
    CHECK(std::min(delta, kPi - delta) == Catch::Approx(kPi / 2.0).margin(1e-9));
    // s1, s2 negate
    auto ma = compute_stokes(ch);
    auto mb = compute_stokes(swapped);
    CHECK(mb.s1.at(0, 0) == -ma.s1.at(0, 0));
    CHECK(mb.s2.at(0, 0) == -ma.s2.at(0, 0));
}

TEST_CASE("channel scaling leaves aolp fixed and scales intensity", "[stokes]") {
    const double k = 3.5;
    auto ch = constant_channels(400.0, 300.0, 200.0, 100.0);
    auto scaled = constant_channels(400.0 * k, 300.0 * k, 200.0 * k, 100.0 * k);
    auto a = compute_products(compute_stokes(ch), test_config());
    auto b = compute_products(compute_stokes(scaled), test_config());
    CHECK(b.aolp.at(0, 0) == Catch::Approx(a.aolp.at(0, 0)).margin(1e-12));
    CHECK(b.intensity.at(0, 0) == Catch::Approx(k * a.intensity.at(0, 0)).margin(1e-9));
    // s0 >> epsilon here, so dolp is scale-invariant to 1e-9
    CHECK(b.dolp.at(0, 0) == Catch::Approx(a.dolp.at(0, 0)).margin(1e-9));
}

TEST_CASE("physical_x2 doubles the literal dolp", "[stokes]") {
    auto ch = constant_channels(4.0, 3.0, 2.0, 1.0);
    auto lit = compute_products(compute_stokes(ch), test_config(DolpConvention::paper_literal));
    auto phys = compute_products(compute_stokes(ch), test_config(DolpConvention::physical_x2));
    CHECK(phys.dolp.at(0, 0) == Catch::Approx(2.0 * lit.dolp.at(0, 0)).margin(1e-12));
}

TEST_CASE("hsv conversion matches an independent oracle", "[stokes]") {
    for (int hi = 0; hi <= 20; ++hi)
        for (int si = 0; si <= 4; ++si)
            for (int vi = 0; vi <= 4; ++vi) {
                double h = hi / 20.0, s = si / 4.0, v = vi / 4.0;
                double r1, g1, b1, r2, g2, b2;
                hsv_to_rgb(h, s, v, r1, g1, b1);
                oracle_hsv_to_rgb(h, s, v, r2, g2, b2);
                CHECK(r1 == Catch::Approx(r2).margin(1e-12));
                CHECK(g1 == Catch::Approx(g2).margin(1e-12));
                CHECK(b1 == Catch::Approx(b2).margin(1e-12));
            }
}

TEST_CASE("composite rendering", "[stokes]") {
    SECTION("figure mode with zero dolp is grayscale") {
        PolarizationProducts p{PlaneD(4, 4, 10.0), PlaneD(4, 4, 0.0), PlaneD(4, 4, 0.3),
                               MaskPlane(4, 4, 1)};
        auto img = render_composite(p, CompositeMode::figure_hsv, 2.2);
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x) {
                const uint8_t* px = img.pixel(x, y);
                CHECK(px[0] == px[1]);
                CHECK(px[1] == px[2]);
            }
    }
    SECTION("methods mode with zero dolp is black") {
        PolarizationProducts p{PlaneD(4, 4, 10.0), PlaneD(4, 4, 0.0), PlaneD(4, 4, 0.3),
                               MaskPlane(4, 4, 1)};
        auto img = render_composite(p, CompositeMode::methods_hsv, 2.2);
        for (uint8_t b : img.rgb) CHECK(b == 0);
    }
    SECTION("single pixel aolp=pi/4 dolp=1 renders (128, 0, 255) +- 1") {
        PolarizationProducts p{PlaneD(2, 2, 10.0), PlaneD(2, 2, 1.0), PlaneD(2, 2, kPi / 4.0),
                               MaskPlane(2, 2, 1)};
        auto img = render_composite(p, CompositeMode::methods_hsv, 2.2);
        const uint8_t* px = img.pixel(0, 0);
        CHECK(std::abs(static_cast<int>(px[0]) - 128) <= 1);
        CHECK(std::abs(static_cast<int>(px[1]) - 0) <= 1);
        CHECK(std::abs(static_cast<int>(px[2]) - 255) <= 1);
    }
    SECTION("masked pixels render black in both modes") {
        PolarizationProducts p{PlaneD(2, 2, 10.0), PlaneD(2, 2, 0.8), PlaneD(2, 2, 0.3),
                               MaskPlane(2, 2, 1)};
        p.mask.at(1, 1) = 0;
        for (auto mode : {CompositeMode::methods_hsv, CompositeMode::figure_hsv}) {
            auto img = render_composite(p, mode, 2.2);
            const uint8_t* px = img.pixel(1, 1);
            CHECK(px[0] == 0);
            CHECK(px[1] == 0);
            CHECK(px[2] == 0);
        }
    }
    SECTION("non-positive gamma rejected") {
        PolarizationProducts p{PlaneD(2, 2, 1.0), PlaneD(2, 2, 0.0), PlaneD(2, 2, 0.0),
                               MaskPlane(2, 2, 1)};
        try {
            render_composite(p, CompositeMode::figure_hsv, 0.0);
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::non_positive_gamma);
        }
    }
}

TEST_CASE("products are independent of thread count", "[stokes]") {
    Rng rng(5);
    PolarizationChannels ch = constant_channels(0, 0, 0, 0, 32, 24);
    for (int angle : {0, 45, 90, 135})
        for (auto& v : ch.plane(angle)) v = 5000.0 * rng.next_double();
    ProductConfig cfg;
    auto a = compute_products(compute_stokes(ch, 1), cfg, 1);
    auto b = compute_products(compute_stokes(ch, 4), cfg, 4);
    CHECK(a.intensity == b.intensity);
    CHECK(a.dolp == b.dolp);
    CHECK(a.aolp == b.aolp);
    CHECK(a.mask == b.mask);
}
