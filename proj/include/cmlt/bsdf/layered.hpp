// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <optional>

#include "cmlt/bsdf/frame.hpp"
#include "cmlt/core/rgb.hpp"
#include "cmlt/core/vec.hpp"

namespace cmlt::bsdf {

enum class Layer { diffuse = 0, glossy = 1 };

// Diffuse base plus rough GGX reflection, selected by Fresnel-weighted
// albedos. A material flagged specular_mirror treats its glossy layer as a
// perfect mirror: it is excluded from randomized inversion of generic
// directions (the mode-preservation density guard).
struct LayeredBsdf {
    RGB diffuse_albedo{0.5, 0.5, 0.5};
    RGB glossy_tint{0.0, 0.0, 0.0};
    double roughness_m = 10.0;
    double fresnel_eta = 1.5;
    bool specular_mirror = false;
};

// Forward selection probabilities (diffuse, glossy); positive where the
// corresponding lobe is evaluable, summing to 1.
struct LayerProbs {
    double diffuse = 1.0;
    double glossy = 0.0;
};
LayerProbs layer_probs(const LayeredBsdf& mat, const Vec3& wi);

struct LayeredSample {
    Vec3 wo;
    Layer layer = Layer::diffuse;
};

// u = (selector, lobe u, lobe v); the selector stratum [0, p_diffuse) picks
// the diffuse lobe, [p_diffuse, 1) the glossy one (half-open strata).
LayeredSample sample_layered(const Vec3& u3, const Vec3& wi, const LayeredBsdf& mat);

// Mixture density: sum over layers of selection probability times lobe pdf.
double pdf_layered(const Vec3& wo, const Vec3& wi, const LayeredBsdf& mat);

// Randomized inversion: picks the layer responsible for wo with probability
// proportional to (selection probability x lobe pdf), places the selector
// uniformly inside the chosen stratum, and appends the exact lobe inverse.
// sample_layered of the result reproduces wo exactly. Empty when no layer
// can produce wo.
std::optional<Vec3> invert_layered(const Vec3& wo, const Vec3& wi, const LayeredBsdf& mat,
                                   double v);

// Reciprocal, non-negative, zero below the horizon.
RGB eval_layered(const Vec3& wi, const Vec3& wo, const LayeredBsdf& mat);

}  // namespace cmlt::bsdf
