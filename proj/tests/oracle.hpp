// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0
//
// Test-side oracles: quadrature, chi-square and sign-test statistics.
// Independent of the library's sampling paths by construction. Quadrature is
// composite fixed-order Gauss-Legendre so its cost is deterministic even on
// discontinuous integrands; tests validate accuracy by comparing two panel
// counts where it matters.

#pragma once

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>

#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
inline constexpr double kGlNodes[8] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
inline constexpr double kGlWeights[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

template <class F>
double integrate(F&& f, double a, double b, int panels = 32) {
    const double h = (b - a) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        for (int k = 0; k < 8; ++k)
            sum += kGlWeights[k] * f(mid + 0.5 * h * kGlNodes[k]);
    }
    return sum * 0.5 * h;
}

template <class F>
double integrate2d(F&& f, double ax, double bx, double ay, double by, int panels = 8) {
    return integrate([&](double x) { return integrate([&](double y) { return f(x, y); },
                                                      ay, by, panels); },
                     ax, bx, panels);
}

// Pearson chi-square p-value of observed counts against expected counts.
// Bins with expected count below `min_expected` are pooled together.
inline double chi_square_p(const std::vector<double>& observed,
                           const std::vector<double>& expected, double min_expected = 5.0) {
    double stat = 0.0;
    int dof = -1;  // one constraint: totals match
    double pooled_obs = 0.0, pooled_exp = 0.0;
    for (size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] < min_expected) {
            pooled_obs += observed[i];
            pooled_exp += expected[i];
            continue;
        }
        const double d = observed[i] - expected[i];
        stat += d * d / expected[i];
        ++dof;
    }
    if (pooled_exp >= min_expected) {
        const double d = pooled_obs - pooled_exp;
        stat += d * d / pooled_exp;
        ++dof;
    }
    if (dof < 1) return 1.0;
    boost::math::chi_squared dist(static_cast<double>(dof));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

// One-sided sign test for the hypothesis "A tends to be smaller than B":
// p-value of seeing at least `wins` out of `n` under a fair coin.
inline double sign_test_p(int wins, int n) {
    if (n == 0) return 1.0;
    boost::math::binomial dist(n, 0.5);
    return boost::math::cdf(boost::math::complement(dist, wins - 1));
}

}  // namespace oracle
