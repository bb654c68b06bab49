// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "cmlt/core/rng.hpp"
#include "cmlt/core/vec.hpp"

namespace cmlt::cmh {

struct KernelSettings {
    double sigma = 1.0 / 64.0;     // scale of small-step offsets
    double gaussian_frac = 0.5;    // Gaussian vs two-sided exponential mix
    double large_step_prob = 0.3;  // full independence redraw
};

// Symmetric perturbation kernel on the unit torus. Small steps offset each
// coordinate by a Gaussian/Laplace mixture wrapped modulo 1; large steps
// redraw every coordinate uniformly. Both components are symmetric, so
// K(u'|u) = K(u|u') and the Metropolis ratio needs no kernel terms.
class PerturbationKernel {
  public:
    PerturbationKernel() = default;
    explicit PerturbationKernel(KernelSettings s) : settings_(s) {}

    bool symmetric() const { return true; }
    const KernelSettings& settings() const { return settings_; }

    std::vector<double> propose(std::span<const double> u, RandomStream& rng,
                                bool* was_large_step = nullptr) const {
        std::vector<double> out(u.size());
        const bool large = rng.next() < settings_.large_step_prob;
        if (was_large_step) *was_large_step = large;
        if (large) {
            for (double& v : out) v = rng.next();
            return out;
        }
        for (size_t k = 0; k < u.size(); ++k)
            out[k] = wrap_unit(u[k] + sample_offset(rng));
        return out;
    }

  private:
    double sample_offset(RandomStream& rng) const {
        if (rng.next() < settings_.gaussian_frac) {
            const double a = 1.0 - rng.next();  // (0,1]
            const double b = rng.next();
            return settings_.sigma * std::sqrt(-2.0 * std::log(a)) * std::cos(kTwoPi * b);
        }
        const double xi = rng.next();
        return xi < 0.5 ? settings_.sigma * std::log(2.0 * std::fmax(xi, 1e-300))
                        : -settings_.sigma * std::log(2.0 * std::fmax(1.0 - xi, 1e-300));
    }

    KernelSettings settings_;
};

}  // namespace cmlt::cmh
