// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#include "cmlt/bsdf/layered.hpp"

#include <cmath>

#include "cmlt/bsdf/ggx.hpp"
#include "cmlt/bsdf/lambert.hpp"

namespace cmlt::bsdf {

namespace {

double schlick_r0(double eta) {
    const double r = (eta - 1.0) / (eta + 1.0);
    return r * r;
}

double schlick(double cos_i, double eta) {
    const double r0 = schlick_r0(eta);
    const double c = 1.0 - std::fmin(1.0, std::fmax(0.0, cos_i));
    const double c2 = c * c;
    return r0 + (1.0 - r0) * c2 * c2 * c;
}

}  // namespace

LayerProbs layer_probs(const LayeredBsdf& mat, const Vec3& wi) {
    const double fresnel = schlick(wi.z, mat.fresnel_eta);
    const double wd = max_comp(mat.diffuse_albedo) * (1.0 - fresnel);
    const double wg = max_comp(mat.glossy_tint) * fresnel;
    const double sum = wd + wg;
    if (!(sum > 0.0)) return {1.0, 0.0};  // black material, arbitrary lobe
    return {wd / sum, wg / sum};
}

LayeredSample sample_layered(const Vec3& u3, const Vec3& wi, const LayeredBsdf& mat) {
    const LayerProbs probs = layer_probs(mat, wi);
    if (u3.x < probs.diffuse)
        return {sample_lambert({u3.y, u3.z}), Layer::diffuse};
    if (mat.specular_mirror)
        return {Vec3{-wi.x, -wi.y, wi.z}, Layer::glossy};
    return {sample_ggx({u3.y, u3.z}, wi, mat.roughness_m), Layer::glossy};
}

// Defined over the whole sphere: below-horizon directions are valid
// zero-throughput samples of the glossy lobe and keep their density.
double pdf_layered(const Vec3& wo, const Vec3& wi, const LayeredBsdf& mat) {
    if (!(wi.z > 0.0)) return 0.0;
    const LayerProbs probs = layer_probs(mat, wi);
    double pdf = probs.diffuse * pdf_lambert(wo);
    // A mirror lobe is a Dirac: zero density at almost every wo.
    if (!mat.specular_mirror)
        pdf += probs.glossy * pdf_ggx(wo, wi, mat.roughness_m);
    return pdf;
}

std::optional<Vec3> invert_layered(const Vec3& wo, const Vec3& wi, const LayeredBsdf& mat,
                                   double v) {
    if (!(wi.z > 0.0)) return std::nullopt;
    const LayerProbs probs = layer_probs(mat, wi);

    // Layer responsibilities. The glossy lobe of a specular material has a
    // Dirac density, so inverting a generic wo through it would change the
    // scattering mode: its responsibility is zero.
    const double resp_d = probs.diffuse * pdf_lambert(wo);
    const double resp_g =
        mat.specular_mirror ? 0.0 : probs.glossy * pdf_ggx(wo, wi, mat.roughness_m);
    const double resp_sum = resp_d + resp_g;
    if (!(resp_sum > 0.0)) return std::nullopt;

    const double split = resp_d / resp_sum;
    if (v < split) {
        const auto uv = invert_lambert(wo);
        if (!uv) return std::nullopt;
        const double selector = probs.diffuse * (v / split);
        return Vec3{selector, uv->x, uv->y};
    }
    const auto uv = invert_ggx(wo, wi, mat.roughness_m);
    if (!uv) return std::nullopt;
    const double frac = (v - split) / (1.0 - split);
    const double selector = probs.diffuse + (1.0 - probs.diffuse) * frac;
    return Vec3{selector, uv->x, uv->y};
}

RGB eval_layered(const Vec3& wi, const Vec3& wo, const LayeredBsdf& mat) {
    if (!(wi.z > 0.0) || !(wo.z > 0.0)) return RGB{};
    RGB f = mat.diffuse_albedo * kInvPi;
    if (mat.specular_mirror || max_comp(mat.glossy_tint) == 0.0) return f;

    Vec3 h = wi + wo;
    const double len = length(h);
    if (len < 1e-12) return f;
    h = h / len;
    if (!(h.z > 0.0)) return f;
    const double d = ggx_half_pdf(h, mat.roughness_m) / h.z;  // NDF value
    const double g = ggx_g1(wi, mat.roughness_m) * ggx_g1(wo, mat.roughness_m);
    const double fresnel = schlick(dot(wi, h), mat.fresnel_eta);
    f += mat.glossy_tint * (fresnel * d * g / (4.0 * wi.z * wo.z));
    return f;
}

}  // namespace cmlt::bsdf
