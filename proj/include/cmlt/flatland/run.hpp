// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cmlt/cmh/kernel.hpp"
#include "cmlt/cmh/stepping.hpp"
#include "cmlt/core/image.hpp"
#include "cmlt/flatland/charts.hpp"
#include "cmlt/flatland/scene.hpp"

namespace cmlt::flatland {

enum class Variant {
    pssmlt1,    // single chain, chart 1 (NEE), importance-sampled target
    pssmlt2,    // single chain, chart 2 (PT), importance-sampled target
    pssmlt_avg, // two IS chains, images combined by balance-heuristic MIS
    pssmlt_mix, // two chains on the weighted target
    cmlt_ipsm,  // one path-space chain, alternating inverse primary mutations
    cmlt,       // two weighted chains plus replica-exchange swaps
};

const char* variant_name(Variant v);
bool variant_from_name(const std::string& name, Variant* out);

// Integral estimates from the plain Monte Carlo brightness pass.
struct Estimates {
    double b_star = 0.0;          // integral of the scalar contribution
    RGB b_rgb{};                  // integral of the RGB contribution
    double b_star_chart[2] = {};  // per-chart pull-back brightness
    double c_star_chart[2] = {};  // weighted-target normalization constants
};

struct RunSettings {
    std::uint64_t n_samples = 1u << 20;  // total target evaluations
    std::uint64_t seed = 0;
    std::uint64_t n_brightness = 1u << 20;  // plain MC samples for b and seeds
    cmh::KernelSettings kernel;
    int swap_period = 4;  // replica-exchange cadence for the CMLT variant
};

struct RunResult {
    Image image;
    Estimates estimates;
    cmh::MoveStats perturbations;
    cmh::MoveStats swaps;
};

// Thrown when the seeding pass finds no path with positive contribution.
struct SeedingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

RunResult run_variant(Variant variant, const FlatScene& scene, const RunSettings& settings);

// Unbiased MIS-combined plain Monte Carlo baseline at the same resolution.
Image reference_image(const FlatScene& scene, std::uint64_t n_samples, std::uint64_t seed);

}  // namespace cmlt::flatland
