// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace cmlt::cmh {

// Extended MCMC state: which chart, plus coordinates in that chart's
// unit hypercube.
struct ChartPoint {
    int chart = 0;
    std::vector<double> u;
};

// A sampling chart over target space X: forward map T from [0,1]^dim,
// the pdf of T(U) for uniform U, and a stochastic right inverse R with
// T(R(x,v)) = x for every v in [0,1]^reverse_dim.
//
// Charts are immutable after construction and safe to share across workers.
template <class X>
class Chart {
  public:
    virtual ~Chart() = default;

    virtual int dim() const = 0;
    virtual int reverse_dim() const = 0;

    // Total: every in-range u maps to some target point (possibly one the
    // target function vanishes on, e.g. an escaped ray).
    virtual X forward(std::span<const double> u) const = 0;

    // Density of the forward image w.r.t. the target measure. Exactly zero
    // means "unrepresentable in this chart" and forces swap rejection.
    virtual double density(const X& x) const = 0;

    // Empty when the point cannot be inverted (zero-density layer, dead path).
    virtual std::optional<std::vector<double>> invert(const X& x,
                                                      std::span<const double> v) const = 0;
};

template <class X>
class Atlas {
  public:
    Atlas() = default;
    explicit Atlas(std::vector<const Chart<X>*> charts, bool identity_chart = false)
        : charts_(std::move(charts)), identity_chart_(identity_chart) {}

    void add(const Chart<X>* chart) { charts_.push_back(chart); }
    void set_identity_chart(bool present) { identity_chart_ = present; }
    bool has_identity_chart() const { return identity_chart_; }

    int size() const { return static_cast<int>(charts_.size()); }
    const Chart<X>& chart(int i) const { return *charts_[i]; }

    double density(int i, const X& x) const { return charts_[i]->density(x); }

    // Denominator of the weighted target. The identity chart, when present,
    // contributes its constant density of 1.
    double density_sum(const X& x) const {
        double sum = identity_chart_ ? 1.0 : 0.0;
        for (const Chart<X>* c : charts_) sum += c->density(x);
        return sum;
    }

  private:
    std::vector<const Chart<X>*> charts_;
    bool identity_chart_ = false;
};

enum class TargetMode { importance_sampled, weighted, auxiliary, custom };

// Target distribution over the extended (chart, u) state, evaluated at the
// forward image so callers never map twice.
template <class X>
struct Target {
    TargetMode mode = TargetMode::custom;
    std::function<double(int chart, const X& x)> value;

    double operator()(int chart, const X& x) const { return value(chart, x); }
};

// pi_i(u) = f(T_i(u)) / p_i(T_i(u)). The atlas must outlive the target.
template <class X>
Target<X> make_importance_sampled_target(const Atlas<X>& atlas,
                                         std::function<double(const X&)> f) {
    Target<X> t;
    t.mode = TargetMode::importance_sampled;
    t.value = [&atlas, f = std::move(f)](int chart, const X& x) {
        const double fx = f(x);
        if (!(fx > 0.0)) return 0.0;
        const double p = atlas.density(chart, x);
        return p > 0.0 ? fx / p : 0.0;
    };
    return t;
}

// pi_i(u) = f(T_i(u)) / sum_j p_j(T_i(u)); chart-invariant by construction.
template <class X>
Target<X> make_weighted_target(const Atlas<X>& atlas, std::function<double(const X&)> f) {
    Target<X> t;
    t.mode = TargetMode::weighted;
    t.value = [&atlas, f = std::move(f)](int /*chart*/, const X& x) {
        const double fx = f(x);
        if (!(fx > 0.0)) return 0.0;
        const double p = atlas.density_sum(x);
        return p > 0.0 ? fx / p : 0.0;
    };
    return t;
}

}  // namespace cmlt::cmh
