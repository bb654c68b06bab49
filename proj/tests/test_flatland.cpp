// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "cmlt/core/image_io.hpp"
#include "cmlt/flatland/charts.hpp"
#include "cmlt/flatland/run.hpp"
#include "cmlt/flatland/scene.hpp"
#include "oracle.hpp"

using namespace cmlt;
using namespace cmlt::flatland;

namespace {

// Quadrature oracle for the scene integral, independent of the charts: for
// each ground point, the light-A inner integral is split analytically at the
// strip-shadow boundaries (z integrated innermost), and light B is
// integrated in polar coordinates over the visible disc behind the hole.
double geometric_kernel(const Vec3& x1, const Vec3& x2) {
    const double d2 = length_squared(x2 - x1);
    const double dy = x2.y - x1.y;
    return dy * dy / (d2 * d2);
}

RGB inner_integral(const FlatScene& scene, const Vec3& x1, int panels = 4) {
    const FlatConfig& c = scene.config();
    RGB total{};
    if (c.light_a_enabled) {
        const double amin = scene.light_a_min(), amax = scene.light_a_max();
        std::vector<double> cuts{amin, amax};
        if (c.occluders_enabled) {
            const double t = c.strip_y / c.light_a_y;
            const double lo = (c.strip_x0 - (1.0 - t) * x1.x) / t;
            const double hi = (c.strip_x1 - (1.0 - t) * x1.x) / t;
            if (lo > amin && lo < amax) cuts.push_back(lo);
            if (hi > amin && hi < amax) cuts.push_back(hi);
        }
        std::sort(cuts.begin(), cuts.end());
        for (size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
            const double hx = (cuts[seg + 1] - cuts[seg]) / panels;
            for (int px = 0; px < panels; ++px) {
                const double midx = cuts[seg] + (px + 0.5) * hx;
                for (int kx = 0; kx < 8; ++kx) {
                    const double x = midx + 0.5 * hx * oracle::kGlNodes[kx];
                    const double gz = oracle::integrate(
                        [&](double z) {
                            const Vec3 x2{x, c.light_a_y, z};
                            return scene.visible(x1, x2) ? geometric_kernel(x1, x2) : 0.0;
                        },
                        0.0, 1.0, panels);
                    const FlatPath probe{x1, Vec3{x, c.light_a_y, 0.0}, kLightA};
                    total += scene.emission(probe) *
                             (gz * oracle::kGlWeights[kx] * 0.5 * hx);
                }
            }
        }
    }
    if (c.light_b_enabled) {
        const double t = c.hole_y / c.light_b_y;
        const Vec2 center{(c.hole_cx - (1.0 - t) * x1.x) / t, (c.hole_cz - (1.0 - t) * x1.z) / t};
        const double radius = c.hole_radius / t * 1.0000001;
        const double scalar = oracle::integrate2d(
            [&](double rho, double ang) {
                const double x = center.x + rho * std::cos(ang);
                const double z = center.y + rho * std::sin(ang);
                if (x < 0.0 || x > 1.0 || z < 0.0 || z > 1.0) return 0.0;
                const Vec3 x2{x, c.light_b_y, z};
                if (!scene.visible(x1, x2)) return 0.0;
                return geometric_kernel(x1, x2) * rho;
            },
            0.0, radius, 0.0, kTwoPi, panels);
        total += c.light_b_emission * scalar;  // emission is uniform over light B
    }
    return total;
}

RGB quadrature_total(const FlatScene& scene, int outer_panels = 10) {
    RGB total{};
    const double h = 1.0 / outer_panels;
    for (int px = 0; px < outer_panels; ++px)
        for (int kx = 0; kx < 8; ++kx) {
            const double x = (px + 0.5) * h + 0.5 * h * oracle::kGlNodes[kx];
            for (int pz = 0; pz < outer_panels; ++pz)
                for (int kz = 0; kz < 8; ++kz) {
                    const double z = (pz + 0.5) * h + 0.5 * h * oracle::kGlNodes[kz];
                    const double w =
                        0.25 * h * h * oracle::kGlWeights[kx] * oracle::kGlWeights[kz];
                    total += inner_integral(scene, Vec3{x, 0.0, z}) * w;
                }
        }
    return total;
}

RGB image_mean(const Image& img) {
    RGB sum{};
    for (size_t i = 0; i < img.pixels.size(); i += 3)
        sum += RGB{img.pixels[i], img.pixels[i + 1], img.pixels[i + 2]};
    return sum / static_cast<double>(img.pixel_count());
}

}  // namespace

TEST_CASE("nee chart: round trip, selection normalization, uniform case") {
    FlatConfig config;
    const FlatScene scene(config);
    const NeeChart nee(scene);

    RandomStream rng(21, 0);
    double worst = 0.0;
    for (int i = 0; i < 100000; ++i) {
        std::vector<double> u{rng.next(), rng.next(), rng.next(), rng.next()};
        const FlatPath p = nee.forward(u);
        const auto back = nee.invert(p, {});
        REQUIRE(back);
        for (int k = 0; k < 4; ++k) worst = std::fmax(worst, std::abs((*back)[k] - u[k]));
    }
    CHECK(worst < 1e-9);

    // density integrates to 1 over both emitters (selection CDF is normalized)
    const double mass_a = oracle::integrate2d(
        [&](double x, double z) {
            return nee.density(FlatPath{Vec3{}, Vec3{x, config.light_a_y, z}, kLightA});
        },
        0.0, 1.0, 0.0, 1.0);
    const double mass_b = oracle::integrate2d(
        [&](double x, double z) {
            return nee.density(FlatPath{Vec3{}, Vec3{x, config.light_b_y, z}, kLightB});
        },
        0.0, 1.0, 0.0, 1.0);
    CHECK(mass_a + mass_b == doctest::Approx(1.0).epsilon(1e-9));

    // uniform-emission restricted case: emission pdf is constant 1/area
    FlatConfig uni;
    uni.light_a_gradient = 0.0;
    uni.light_b_enabled = false;
    const FlatScene uscene(uni);
    const NeeChart unee(uscene);
    const FlatPath p{Vec3{0.5, 0, 0.5}, Vec3{0.25, uni.light_a_y, 0.75}, kLightA};
    CHECK(unee.density(p) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pt chart: straight-up geometry and round trip") {
    FlatConfig config;
    const FlatScene scene(config);
    const PtChart pt(scene);

    // straight up from a point not under the strip hits light A directly above
    const FlatPath up = scene.trace(Vec3{0.3, 0.0, 0.4}, Vec3{0.0, 1.0, 0.0});
    CHECK(up.surface == kLightA);
    CHECK(up.x2.x == doctest::Approx(0.3));
    CHECK(up.x2.z == doctest::Approx(0.4));
    CHECK(up.x2.y == doctest::Approx(config.light_a_y));

    RandomStream rng(22, 0);
    double worst = 0.0;
    int emitter_hits = 0;
    for (int i = 0; i < 100000; ++i) {
        std::vector<double> u{rng.next(), rng.next(), rng.next(), rng.next()};
        const FlatPath p = pt.forward(u);
        if (p.surface != kLightA && p.surface != kLightB) continue;
        ++emitter_hits;
        const auto back = pt.invert(p, {});
        REQUIRE(back);
        for (int k = 0; k < 4; ++k) worst = std::fmax(worst, std::abs((*back)[k] - u[k]));
    }
    CHECK(worst < 1e-6);
    CHECK(emitter_hits > 15000);
}

TEST_CASE("pt chart density matches a sampled histogram") {
    FlatConfig config;
    const FlatScene scene(config);
    const PtChart pt(scene);

    // fix the ground point; its strip shadow misses light A entirely
    const Vec3 x1{0.2, 0.0, 0.5};
    RandomStream rng(23, 0);
    const int n = 1000000, nb = 8;
    std::vector<double> observed(nb * nb + 1, 0.0);
    for (int i = 0; i < n; ++i) {
        std::vector<double> u{x1.x, x1.z, rng.next(), rng.next()};
        const FlatPath p = pt.forward(u);
        if (p.surface == kLightA) {
            const int bx = std::min(nb - 1, static_cast<int>(p.x2.x * nb));
            const int bz = std::min(nb - 1, static_cast<int>(p.x2.z * nb));
            observed[bx * nb + bz] += 1.0;
        } else {
            observed[nb * nb] += 1.0;
        }
    }
    std::vector<double> expected(nb * nb + 1, 0.0);
    double covered = 0.0;
    for (int bx = 0; bx < nb; ++bx)
        for (int bz = 0; bz < nb; ++bz) {
            const double e =
                n * oracle::integrate2d(
                        [&](double x, double z) {
                            return pt.density(
                                FlatPath{x1, Vec3{x, config.light_a_y, z}, kLightA});
                        },
                        bx / double(nb), (bx + 1) / double(nb), bz / double(nb),
                        (bz + 1) / double(nb));
            expected[bx * nb + bz] = e;
            covered += e;
        }
    expected[nb * nb] = n - covered;
    CHECK(oracle::chi_square_p(observed, expected) > 0.01);
}

TEST_CASE("weighted target is chart-invariant under inversion") {
    FlatConfig config;
    const FlatScene scene(config);
    const NeeChart nee(scene);
    const PtChart pt(scene);
    cmh::Atlas<FlatPath> atlas({&nee, &pt});
    auto fstar = [&scene](const FlatPath& p) { return scene.scalar_contribution(p); };
    auto target = cmh::make_weighted_target<FlatPath>(atlas, fstar);

    RandomStream rng(24, 0);
    int checked = 0;
    for (int i = 0; i < 400000 && checked < 10000; ++i) {
        std::vector<double> u{rng.next(), rng.next(), rng.next(), rng.next()};
        const FlatPath p = pt.forward(u);
        if (!(fstar(p) > 0.0)) continue;
        ++checked;
        const double pi_2 = target(1, p);
        const auto u1 = nee.invert(p, {});
        REQUIRE(u1);
        const FlatPath p1 = nee.forward(*u1);
        const double pi_1 = target(0, p1);
        CHECK(std::abs(pi_1 - pi_2) <= 1e-6 * pi_2);
    }
    CHECK(checked == 10000);
}

TEST_CASE("swap ratio formulas agree on flatland proposals") {
    FlatConfig config;
    const FlatScene scene(config);
    const NeeChart nee(scene);
    const PtChart pt(scene);
    cmh::Atlas<FlatPath> atlas({&nee, &pt});
    auto fstar = [&scene](const FlatPath& p) { return scene.scalar_contribution(p); };
    auto target = cmh::make_weighted_target<FlatPath>(atlas, fstar);

    RandomStream rng(25, 0);
    int checked = 0;
    while (checked < 10000) {
        std::vector<double> ua{rng.next(), rng.next(), rng.next(), rng.next()};
        std::vector<double> ub{rng.next(), rng.next(), rng.next(), rng.next()};
        const FlatPath a = pt.forward(ua);
        const FlatPath b = pt.forward(ub);
        if (!(fstar(a) > 0.0) || !(fstar(b) > 0.0)) continue;
        if (!(pt.density(a) > 0.0) || !(nee.density(b) > 0.0)) continue;
        ++checked;
        const double s = cmh::swap_ratio_simplified(atlas, 0, 1, a, b);
        const double g = cmh::swap_ratio_general(atlas, target, 0, 1, a, b);
        CHECK(std::abs(g - s) <= 1e-9 * std::abs(s));
    }
}

TEST_CASE("right-inverse law holds for both charts") {
    FlatConfig config;
    const FlatScene scene(config);
    const NeeChart nee(scene);
    const PtChart pt(scene);
    RandomStream rng(26, 0);
    double worst = 0.0;
    for (int i = 0; i < 100000; ++i) {
        std::vector<double> u{rng.next(), rng.next(), rng.next(), rng.next()};
        const FlatPath p = nee.forward(u);
        const auto back = nee.invert(p, {});
        REQUIRE(back);
        const FlatPath again = nee.forward(*back);
        worst = std::fmax(worst, length(again.x1 - p.x1) + length(again.x2 - p.x2));

        const FlatPath q = pt.forward(u);
        if (pt.density(q) > 0.0) {
            const auto back2 = pt.invert(q, {});
            REQUIRE(back2);
            const FlatPath again2 = pt.forward(*back2);
            worst = std::fmax(worst, length(again2.x1 - q.x1) + length(again2.x2 - q.x2));
        }
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("reference image: occlusion, brightness, self-consistency") {
    FlatConfig config;
    config.image_res = 32;
    const FlatScene scene(config);

    const Image ref = reference_image(scene, 2000000, 99);

    // total brightness vs the quadrature oracle, within 1 percent
    const RGB total = quadrature_total(scene);
    const RGB mean = image_mean(ref);
    CHECK(mean.r == doctest::Approx(total.r).epsilon(0.01));
    CHECK(mean.g == doctest::Approx(total.g).epsilon(0.01));
    CHECK(mean.b == doctest::Approx(total.b).epsilon(0.01));

    // two independent half-size runs agree within 3 sigma of pooled variance
    const Image h1 = reference_image(scene, 500000, 7);
    const Image h2 = reference_image(scene, 500000, 8);
    double diff_mean = 0.0, diff_var = 0.0;
    const size_t npix = h1.pixel_count();
    std::vector<double> diffs(npix);
    for (size_t i = 0; i < npix; ++i)
        diffs[i] = static_cast<double>(h1.pixels[3 * i + 1]) - h2.pixels[3 * i + 1];
    for (double d : diffs) diff_mean += d;
    diff_mean /= static_cast<double>(npix);
    for (double d : diffs) diff_var += (d - diff_mean) * (d - diff_mean);
    diff_var /= static_cast<double>(npix - 1);
    CHECK(std::abs(diff_mean) <= 3.0 * std::sqrt(diff_var / static_cast<double>(npix)));
}

TEST_CASE("region outside the hole's reach renders black") {
    FlatConfig config;
    config.light_a_enabled = false;
    config.hole_cx = 0.05;
    config.hole_cz = 0.05;
    config.image_res = 16;
    const FlatScene scene(config);
    const Image ref = reference_image(scene, 400000, 4);

    // ground corner far from the hole cannot see light B at all
    const RGB far = ref.rgb(15, 15);
    CHECK(far.r == 0.0);
    CHECK(far.g == 0.0);
    CHECK(far.b == 0.0);
    // while some pixel near the hole is lit
    double max_g = 0.0;
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) max_g = std::fmax(max_g, ref.rgb(x, y).g);
    CHECK(max_g > 0.0);
}

TEST_CASE("perfectly importance sampled chart gives unit acceptance and a flat field") {
    FlatConfig config;
    config.light_a_gradient = 0.0;
    config.light_a_red = RGB{1.0, 1.0, 1.0};
    config.light_b_enabled = false;
    config.occluders_enabled = false;
    config.light_a_extent = 1e4;
    config.image_res = 16;
    const FlatScene scene(config);

    RunSettings settings;
    settings.n_samples = 1 << 18;
    settings.n_brightness = 1 << 16;
    settings.seed = 5;
    const RunResult run = run_variant(Variant::pssmlt2, scene, settings);

    CHECK(run.perturbations.accept_rate() == doctest::Approx(1.0).epsilon(1e-4));

    const RGB mean = image_mean(run.image);
    double worst_rel = 0.0;
    for (size_t i = 0; i < run.image.pixels.size(); i += 3)
        worst_rel = std::fmax(worst_rel, std::abs(run.image.pixels[i] - mean.r) / mean.r);
    CHECK(worst_rel < 0.25);  // flat up to chain noise
    // and the flat level is the scene brightness
    CHECK(mean.r == doctest::Approx(run.estimates.b_star_chart[1]).epsilon(0.02));
}

TEST_CASE("variants are deterministic given the seed") {
    FlatConfig config;
    config.image_res = 24;
    const FlatScene scene(config);
    RunSettings settings;
    settings.n_samples = 50000;
    settings.n_brightness = 20000;
    settings.seed = 31;
    for (Variant v : {Variant::pssmlt1, Variant::pssmlt_mix, Variant::cmlt, Variant::cmlt_ipsm}) {
        const RunResult a = run_variant(v, scene, settings);
        const RunResult b = run_variant(v, scene, settings);
        REQUIRE(a.image.pixels.size() == b.image.pixels.size());
        CHECK(std::memcmp(a.image.pixels.data(), b.image.pixels.data(),
                          a.image.pixels.size() * sizeof(float)) == 0);
    }
}

TEST_CASE("all variants converge toward the reference as samples grow") {
    FlatConfig config;
    config.image_res = 32;
    const FlatScene scene(config);
    const Image ref = reference_image(scene, 4000000, 77);

    for (Variant v : {Variant::pssmlt1, Variant::pssmlt_mix, Variant::cmlt, Variant::cmlt_ipsm}) {
        std::vector<double> errs;
        for (std::uint64_t n : {std::uint64_t(1) << 14, std::uint64_t(1) << 17,
                                std::uint64_t(1) << 20}) {
            double median_err;
            std::vector<double> per_seed;
            for (std::uint64_t seed : {101, 202, 303}) {
                RunSettings settings;
                settings.n_samples = n;
                settings.n_brightness = 1 << 16;
                settings.seed = seed;
                per_seed.push_back(rmse(run_variant(v, scene, settings).image, ref));
            }
            std::sort(per_seed.begin(), per_seed.end());
            median_err = per_seed[1];
            errs.push_back(median_err);
        }
        CHECK(errs[1] < errs[0]);
        CHECK(errs[2] < errs[1]);
    }
}

TEST_CASE("seeding failure is reported by stage") {
    FlatConfig config;
    config.light_a_enabled = false;
    config.hole_cx = 5.0;  // hole far outside light B: nothing is visible
    config.hole_cz = 5.0;
    const FlatScene scene(config);
    RunSettings settings;
    settings.n_samples = 1000;
    settings.n_brightness = 2000;
    CHECK_THROWS_AS(run_variant(Variant::cmlt, scene, settings), SeedingError);
}
