// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "cmlt/cmh/chart.hpp"
#include "cmlt/cmh/kernel.hpp"
#include "cmlt/cmh/stepping.hpp"
#include "oracle.hpp"

using namespace cmlt;
using cmh::ChainState;
using cmh::ChartPoint;
using cmh::MoveStats;

namespace {

// 1-D toy chart defined by lambdas over a double-valued target space.
struct ToyChart final : cmh::Chart<double> {
    std::function<double(double)> fwd;
    std::function<double(double)> dens;
    std::function<double(double)> inv;  // classical inverse

    ToyChart(std::function<double(double)> f, std::function<double(double)> d,
             std::function<double(double)> i)
        : fwd(std::move(f)), dens(std::move(d)), inv(std::move(i)) {}

    int dim() const override { return 1; }
    int reverse_dim() const override { return 0; }
    double forward(std::span<const double> u) const override { return fwd(u[0]); }
    double density(const double& x) const override { return dens(x); }
    std::optional<std::vector<double>> invert(const double& x,
                                              std::span<const double>) const override {
        if (!(dens(x) > 0.0)) return std::nullopt;
        return std::vector<double>{inv(x)};
    }
};

ToyChart identity_chart() {
    return ToyChart([](double u) { return u; }, [](double x) { return x >= 0.0 && x <= 1.0 ? 1.0 : 0.0; },
                    [](double x) { return x; });
}

// T(u) = u^2: density 1/(2 sqrt(x)) on (0,1].
ToyChart square_chart() {
    return ToyChart([](double u) { return u * u; },
                    [](double x) { return x > 0.0 && x <= 1.0 ? 0.5 / std::sqrt(x) : 0.0; },
                    [](double x) { return std::sqrt(x); });
}

cmh::PerturbationKernel null_kernel() {
    cmh::KernelSettings s;
    s.sigma = 0.0;
    s.large_step_prob = 0.0;
    return cmh::PerturbationKernel(s);
}

}  // namespace

TEST_CASE("mh_step accepts identity proposals with probability 1") {
    ToyChart chart = identity_chart();
    cmh::Atlas<double> atlas({&chart});
    auto target = cmh::make_importance_sampled_target<double>(
        atlas, [](double x) { return 0.3 + x; });

    ChainState<double> state;
    state.point = {0, {0.37}};
    state.x = chart.forward(state.point.u);
    state.target = target(0, state.x);

    RandomStream rng(1, 0);
    MoveStats stats;
    for (int i = 0; i < 100; ++i) {
        const auto out = cmh::mh_step(state, chart, null_kernel(), target, rng, stats);
        CHECK(out.a == 1.0);
        CHECK(out.accepted);
    }
    CHECK(stats.accepts == stats.proposals);
}

TEST_CASE("mh_step always rejects zero-target proposals") {
    ToyChart chart = identity_chart();
    cmh::Atlas<double> atlas({&chart});
    auto target = cmh::make_weighted_target<double>(
        atlas, [](double x) { return x <= 0.2 ? 1.0 : 0.0; });

    ChainState<double> state;
    state.point = {0, {0.1}};
    state.x = 0.1;
    state.target = target(0, state.x);

    cmh::KernelSettings s;
    s.large_step_prob = 1.0;  // uniform independence proposals
    cmh::PerturbationKernel kernel(s);
    RandomStream rng(2, 0);
    MoveStats stats;
    for (int i = 0; i < 2000; ++i) {
        const auto out = cmh::mh_step(state, chart, kernel, target, rng, stats);
        CHECK(out.a >= 0.0);
        CHECK(out.a <= 1.0);
        if (out.proposal_target == 0.0) CHECK(!out.accepted);
        CHECK(state.x <= 0.2);
    }
}

TEST_CASE("mh_step chain matches a quadrature-normalized piecewise target") {
    ToyChart chart = identity_chart();
    cmh::Atlas<double> atlas({&chart});
    auto piecewise = [](double x) {
        if (x < 0.25) return 1.0;
        if (x < 0.5) return 3.0;
        if (x < 0.75) return 0.5;
        return 2.0;
    };
    auto target = cmh::make_importance_sampled_target<double>(atlas, piecewise);

    ChainState<double> state;
    state.point = {0, {0.1}};
    state.x = 0.1;
    state.target = target(0, state.x);

    cmh::PerturbationKernel kernel;  // default sigma, 0.3 large steps
    RandomStream rng(3, 0);
    MoveStats stats;

    const int bins = 16;
    std::vector<double> observed(bins, 0.0);
    const int steps = 400000, thin = 16;
    int kept = 0;
    for (int i = 0; i < steps; ++i) {
        cmh::mh_step(state, chart, kernel, target, rng, stats);
        if (i % thin == 0) {
            observed[std::min(bins - 1, static_cast<int>(state.x * bins))] += 1.0;
            ++kept;
        }
    }

    const double total = oracle::integrate(piecewise, 0.0, 1.0);
    std::vector<double> expected(bins);
    for (int b = 0; b < bins; ++b)
        expected[b] = kept * oracle::integrate(piecewise, b / double(bins), (b + 1) / double(bins)) /
                      total;
    CHECK(oracle::chi_square_p(observed, expected) > 0.01);
    CHECK(stats.accept_rate() > 0.0);
    CHECK(stats.accept_rate() < 1.0);
}

TEST_CASE("replica swap between two identity charts always accepts") {
    ToyChart a = identity_chart(), b = identity_chart();
    cmh::Atlas<double> atlas({&a, &b});
    auto target = cmh::make_weighted_target<double>(atlas, [](double x) { return 1.0 + x; });

    ChainState<double> s1{{0, {0.2}}, 0.2, target(0, 0.2)};
    ChainState<double> s2{{1, {0.8}}, 0.8, target(1, 0.8)};

    RandomStream rng(4, 0);
    MoveStats stats;
    const auto out = cmh::replica_swap(s1, s2, atlas, target, rng, stats);
    CHECK(out.a == 1.0);
    CHECK(out.accepted);
    CHECK(s1.x == 0.8);
    CHECK(s2.x == 0.2);
    CHECK(s1.point.chart == 0);
    CHECK(s2.point.chart == 1);
}

TEST_CASE("general and simplified swap ratios agree for weighted targets") {
    ToyChart a = identity_chart(), b = square_chart();
    cmh::Atlas<double> atlas({&a, &b});
    auto target = cmh::make_weighted_target<double>(
        atlas, [](double x) { return 0.1 + std::sin(3.0 * x) * std::sin(3.0 * x); });

    RandomStream rng(5, 0);
    for (int i = 0; i < 10000; ++i) {
        const double x1 = 0.001 + 0.998 * rng.next();
        const double x2 = 0.001 + 0.998 * rng.next();
        const double simplified = cmh::swap_ratio_simplified(atlas, 0, 1, x1, x2);
        const double general = cmh::swap_ratio_general(atlas, target, 0, 1, x1, x2);
        CHECK(std::abs(general - simplified) <= 1e-9 * std::abs(simplified));
    }
}

TEST_CASE("tempering swap accepts equal-density chart changes") {
    ToyChart a = identity_chart(), b = identity_chart();
    cmh::Atlas<double> atlas({&a, &b});

    ChainState<double> s{{0, {0.4}}, 0.4, 1.0};
    RandomStream rng(6, 0);
    MoveStats stats;
    const auto out = cmh::tempering_swap(s, 1, atlas, rng, stats);
    CHECK(out.a == 1.0);
    CHECK(out.accepted);
    CHECK(s.point.chart == 1);
    // the represented point is unchanged
    CHECK(atlas.chart(1).forward(s.point.u) == 0.4);
}

TEST_CASE("tempering swap acceptance is the density ratio") {
    // chart 0 maps [0,1] onto [0,0.5] with density 2; chart 1 is the identity
    ToyChart half([](double u) { return 0.5 * u; },
                  [](double x) { return x >= 0.0 && x <= 0.5 ? 2.0 : 0.0; },
                  [](double x) { return 2.0 * x; });
    ToyChart ident = identity_chart();
    cmh::Atlas<double> atlas({&half, &ident});

    ChainState<double> s{{0, {0.5}}, 0.25, 1.0};  // x = 0.25: p0 = 2, p1 = 1
    RandomStream rng(7, 0);
    MoveStats stats;
    const auto out = cmh::tempering_swap(s, 1, atlas, rng, stats);
    CHECK(out.a == doctest::Approx(0.5).epsilon(1e-12));

    // swapping back from the identity chart is uphill: accepted with A = 1
    ChainState<double> s2{{1, {0.25}}, 0.25, 1.0};
    const auto back = cmh::tempering_swap(s2, 0, atlas, rng, stats);
    CHECK(back.a == 1.0);
}

TEST_CASE("chart swaps with deterministic inverses are involutions") {
    ToyChart a = identity_chart(), b = square_chart();
    RandomStream rng(8, 0);
    for (int i = 0; i < 1000; ++i) {
        const double u0 = 0.001 + 0.998 * rng.next();
        const double x = a.forward(std::vector<double>{u0});
        const auto u_b = b.invert(x, {});
        REQUIRE(u_b);
        const double x_back = b.forward(*u_b);
        const auto u_a = a.invert(x_back, {});
        REQUIRE(u_a);
        CHECK((*u_a)[0] == doctest::Approx(u0).epsilon(1e-12));
    }
}

TEST_CASE("inverse primary perturbation accepts null moves and matched targets") {
    ToyChart b = square_chart();
    RandomStream rng(9, 0);
    MoveStats stats;

    // null perturbation: y = x, A = 1
    double x = 0.49;
    auto flat_target = [](const double&) { return 1.0; };
    double value = 1.0;
    const auto out = cmh::inverse_primary_perturbation<double>(
        x, value, b, null_kernel(), flat_target, rng, stats);
    CHECK(out.a == 1.0);

    // target proportional to the chart density: every proposal accepted
    std::function<double(const double&)> prop_target = [&b](const double& y) {
        return 3.0 * b.density(y);
    };
    double xv = 0.3;
    double val = prop_target(xv);
    cmh::PerturbationKernel kernel;  // includes large steps
    MoveStats stats2;
    for (int i = 0; i < 5000; ++i) {
        const auto o =
            cmh::inverse_primary_perturbation<double>(xv, val, b, kernel, prop_target, rng, stats2);
        CHECK(o.a == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(stats2.accepts == stats2.proposals);
}

TEST_CASE("independence sampler acceptance ratios") {
    // sampler proportional to the target: always accepted
    cmh::IndependenceSampler<double> prop;
    prop.draw = [](RandomStream& rng) { return std::sqrt(rng.next()); };
    prop.density = [](const double& x) { return x > 0.0 && x <= 1.0 ? 2.0 * x : 0.0; };
    std::function<double(const double&)> target = [](const double& x) {
        return x > 0.0 && x <= 1.0 ? 5.0 * x : 0.0;
    };
    RandomStream rng(10, 0);
    MoveStats stats;
    double x = 0.5, value = target(x);
    for (int i = 0; i < 2000; ++i) {
        const auto out = cmh::independence_step(x, value, prop, target, rng, stats);
        CHECK(out.a == doctest::Approx(1.0).epsilon(1e-12));
    }

    // two-bin discrete target with masses 0.75 / 0.25 under a uniform sampler:
    // acceptance from the heavy bin into the light bin is exactly 1/3
    cmh::IndependenceSampler<double> uniform;
    uniform.draw = [](RandomStream& rng) { return rng.next(); };
    uniform.density = [](const double&) { return 1.0; };
    std::function<double(const double&)> bins = [](const double& x) {
        return x < 0.5 ? 1.5 : 0.5;  // densities integrating to 0.75 / 0.25
    };
    double y = 0.25;  // in bin A
    double yv = bins(y);
    MoveStats stats2;
    bool saw_cross = false;
    for (int i = 0; i < 200; ++i) {
        const double before = y;
        const auto out = cmh::independence_step(y, yv, uniform, bins, rng, stats2);
        if (before < 0.5 && out.proposal >= 0.5) {
            CHECK(out.a == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
            saw_cross = true;
        }
        if (out.proposal_target == 0.0) CHECK(!out.accepted);
    }
    CHECK(saw_cross);
}

TEST_CASE("atlas identity chart contributes to the weighted denominator") {
    ToyChart a = identity_chart();
    cmh::Atlas<double> atlas({&a});
    CHECK(atlas.density_sum(0.5) == 1.0);
    atlas.set_identity_chart(true);
    CHECK(atlas.density_sum(0.5) == 2.0);
}
