// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cmlt/cmh/chart.hpp"
#include "cmlt/cmh/kernel.hpp"
#include "cmlt/core/rng.hpp"

namespace cmlt::cmh {

// Per-move-type diagnostics, exposed through the CLI.
struct MoveStats {
    std::uint64_t proposals = 0;
    std::uint64_t accepts = 0;
    std::uint64_t inversion_failures = 0;
    std::uint64_t zero_density_accepts = 0;  // independence-sampler limit case
    double acceptance_weight = 0.0;          // sum of acceptance probabilities

    double accept_rate() const {
        return proposals ? static_cast<double>(accepts) / static_cast<double>(proposals) : 0.0;
    }
    double mean_acceptance() const {
        return proposals ? acceptance_weight / static_cast<double>(proposals) : 0.0;
    }
    void merge(const MoveStats& o) {
        proposals += o.proposals;
        accepts += o.accepts;
        inversion_failures += o.inversion_failures;
        zero_density_accepts += o.zero_density_accepts;
        acceptance_weight += o.acceptance_weight;
    }
};

// Chain state with cached forward image and target value; the caches are
// re-derivable from (chart, u) and are spot-checked in tests.
template <class X>
struct ChainState {
    ChartPoint point;
    X x{};
    double target = 0.0;
};

template <class X>
struct StepOutcome {
    bool accepted = false;
    double a = 0.0;  // acceptance probability of the proposal
    X proposal{};
    double proposal_target = 0.0;
};

inline double clamp_acceptance(double ratio) {
    if (!(ratio > 0.0)) return 0.0;  // rejects NaN and non-positive ratios
    return std::min(1.0, ratio);
}

inline std::vector<double> draw_reverse_samples(int n, RandomStream& rng) {
    std::vector<double> v(static_cast<size_t>(n));
    for (double& x : v) x = rng.next();
    return v;
}

// One Metropolis-Hastings step within the current chart. The kernel must be
// symmetric (all kernels in this project are). A failed target evaluation
// counts as a zero-density proposal and is always rejected.
template <class X>
StepOutcome<X> mh_step(ChainState<X>& state, const Chart<X>& chart,
                       const PerturbationKernel& kernel, const Target<X>& target,
                       RandomStream& rng, MoveStats& stats) {
    StepOutcome<X> out;
    stats.proposals++;

    std::vector<double> u_new = kernel.propose(state.point.u, rng);
    out.proposal = chart.forward(u_new);
    out.proposal_target = target(state.point.chart, out.proposal);
    if (!std::isfinite(out.proposal_target) || out.proposal_target < 0.0)
        out.proposal_target = 0.0;

    out.a = clamp_acceptance(out.proposal_target / state.target);
    stats.acceptance_weight += out.a;
    const double xi = rng.next();  // always consumed
    if (xi < out.a) {
        state.point.u = std::move(u_new);
        state.x = out.proposal;
        state.target = out.proposal_target;
        out.accepted = true;
        stats.accepts++;
    }
    return out;
}

// r_i(u) = 1 / p_i(T_i(u)); both swap ratios below only ever touch the
// densities of the two mapped points.
template <class X>
double swap_ratio_simplified(const Atlas<X>& atlas, int chart_i, int chart_j, const X& x1,
                             const X& x2) {
    const double pi_x1 = atlas.density(chart_i, x1);
    const double pj_x2 = atlas.density(chart_j, x2);
    const double pi_x2 = atlas.density(chart_i, x2);
    const double pj_x1 = atlas.density(chart_j, x1);
    if (!(pi_x2 > 0.0) || !(pj_x1 > 0.0)) return 0.0;
    return (pi_x2 * pj_x1) / (pi_x1 * pj_x2);
}

// Full ratio including the four target evaluations; for weighted targets it
// reduces to the simplified form, which the tests verify to 1e-9.
template <class X>
double swap_ratio_general(const Atlas<X>& atlas, const Target<X>& target, int chart_i,
                          int chart_j, const X& x1, const X& x2) {
    const double pi_x1 = atlas.density(chart_i, x1);
    const double pj_x2 = atlas.density(chart_j, x2);
    const double pi_x2 = atlas.density(chart_i, x2);
    const double pj_x1 = atlas.density(chart_j, x1);
    if (!(pi_x2 > 0.0) || !(pj_x1 > 0.0)) return 0.0;
    const double num = target(chart_i, x2) * target(chart_j, x1) * (1.0 / pi_x1) * (1.0 / pj_x2);
    const double den = target(chart_i, x1) * target(chart_j, x2) * (1.0 / pi_x2) * (1.0 / pj_x1);
    return num / den;
}

struct SwapOutcome {
    bool accepted = false;
    double a = 0.0;
};

// Replica-exchange swap between two chains pinned to distinct charts. On
// acceptance the chains exchange target points, each re-expressed in the
// other's chart through the stochastic right inverses.
template <class X>
SwapOutcome replica_swap(ChainState<X>& state_i, ChainState<X>& state_j, const Atlas<X>& atlas,
                         const Target<X>& target, RandomStream& rng, MoveStats& stats) {
    SwapOutcome out;
    stats.proposals++;
    const int i = state_i.point.chart;
    const int j = state_j.point.chart;
    const X& x1 = state_i.x;
    const X& x2 = state_j.x;

    const std::vector<double> v1 = draw_reverse_samples(atlas.chart(j).reverse_dim(), rng);
    const std::vector<double> v2 = draw_reverse_samples(atlas.chart(i).reverse_dim(), rng);
    auto u1_j = atlas.chart(j).invert(x1, v1);
    auto u2_i = atlas.chart(i).invert(x2, v2);
    if (!u1_j || !u2_i) {
        stats.inversion_failures++;
        return out;
    }

    out.a = clamp_acceptance(swap_ratio_simplified(atlas, i, j, x1, x2));
    stats.acceptance_weight += out.a;
    const double xi = rng.next();
    if (xi < out.a) {
        const X x1_copy = x1;
        state_i.point.u = std::move(*u2_i);
        state_i.x = x2;
        state_i.target = target(i, state_i.x);
        state_j.point.u = std::move(*u1_j);
        state_j.x = x1_copy;
        state_j.target = target(j, state_j.x);
        out.accepted = true;
        stats.accepts++;
    }
    return out;
}

// Serial-tempering chart swap: re-expresses the current target point in
// chart j, accepted with min(1, q_ratio * r_i/r_j). The represented point is
// unchanged, so the cached target value stays valid for chart-invariant
// (weighted) targets. q_ratio = q(j->i)/q(i->j) for the caller's chart
// proposal distribution; 1 for symmetric proposals.
template <class X>
SwapOutcome tempering_swap(ChainState<X>& state, int j, const Atlas<X>& atlas, RandomStream& rng,
                           MoveStats& stats, double q_ratio = 1.0) {
    SwapOutcome out;
    stats.proposals++;
    const int i = state.point.chart;
    const double p_i = atlas.density(i, state.x);
    const double p_j = atlas.density(j, state.x);
    if (!(p_j > 0.0)) {
        stats.inversion_failures++;
        return out;
    }

    const std::vector<double> v = draw_reverse_samples(atlas.chart(j).reverse_dim(), rng);
    auto u_j = atlas.chart(j).invert(state.x, v);
    if (!u_j) {
        stats.inversion_failures++;
        return out;
    }

    out.a = clamp_acceptance(q_ratio * p_j / p_i);  // r_i/r_j = p_j(x)/p_i(x)
    stats.acceptance_weight += out.a;
    const double xi = rng.next();
    if (xi < out.a) {
        state.point.chart = j;
        state.point.u = std::move(*u_j);
        out.accepted = true;
        stats.accepts++;
    }
    return out;
}

// Inverse primary-space perturbation: drop from the target space into chart
// i, perturb there, and map back. For symmetric kernels the acceptance is
// min(1, (pi(y)/p_i(y)) * (p_i(x)/pi(x))).
template <class X>
StepOutcome<X> inverse_primary_perturbation(X& x, double& target_value, const Chart<X>& chart,
                                            const PerturbationKernel& kernel,
                                            const std::function<double(const X&)>& target_on_omega,
                                            RandomStream& rng, MoveStats& stats) {
    StepOutcome<X> out;
    stats.proposals++;

    const std::vector<double> v = draw_reverse_samples(chart.reverse_dim(), rng);
    auto u = chart.invert(x, v);
    if (!u) {
        stats.inversion_failures++;
        return out;
    }
    std::vector<double> u_new = kernel.propose(*u, rng);
    out.proposal = chart.forward(u_new);
    out.proposal_target = target_on_omega(out.proposal);
    if (!std::isfinite(out.proposal_target) || out.proposal_target < 0.0)
        out.proposal_target = 0.0;

    const double p_x = chart.density(x);
    const double p_y = chart.density(out.proposal);
    if (out.proposal_target > 0.0 && p_y > 0.0)
        out.a = clamp_acceptance((out.proposal_target / p_y) * (p_x / target_value));
    stats.acceptance_weight += out.a;
    const double xi = rng.next();
    if (xi < out.a) {
        x = out.proposal;
        target_value = out.proposal_target;
        out.accepted = true;
        stats.accepts++;
    }
    return out;
}

template <class X>
struct IndependenceSampler {
    std::function<X(RandomStream&)> draw;
    std::function<double(const X&)> density;
};

// Independence sampler: acceptance min(1, pi(Y) p(X) / (pi(X) p(Y))). A zero
// sampler density at the current state is the limit case: accept whenever the
// proposal has positive target, and count it in the diagnostics.
template <class X>
StepOutcome<X> independence_step(X& x, double& target_value,
                                 const IndependenceSampler<X>& sampler,
                                 const std::function<double(const X&)>& target, RandomStream& rng,
                                 MoveStats& stats) {
    StepOutcome<X> out;
    stats.proposals++;

    out.proposal = sampler.draw(rng);
    out.proposal_target = target(out.proposal);
    if (!std::isfinite(out.proposal_target) || out.proposal_target < 0.0)
        out.proposal_target = 0.0;

    const double p_x = sampler.density(x);
    const double p_y = sampler.density(out.proposal);
    if (out.proposal_target > 0.0) {
        if (!(p_x > 0.0)) {
            out.a = 1.0;
            stats.zero_density_accepts++;
        } else if (p_y > 0.0) {
            out.a = clamp_acceptance((out.proposal_target * p_x) / (target_value * p_y));
        }
    }
    stats.acceptance_weight += out.a;
    const double xi = rng.next();
    if (xi < out.a) {
        x = out.proposal;
        target_value = out.proposal_target;
        out.accepted = true;
        stats.accepts++;
    }
    return out;
}

}  // namespace cmlt::cmh
