// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <cmath>
#include <optional>

#include "cmlt/bsdf/frame.hpp"
#include "cmlt/core/vec.hpp"

namespace cmlt::bsdf {

// GGX sampling as the composition of a microfacet draw and a reflection:
// the microfacet map takes (u,v) to (theta_h, phi_h) with
// tan^2(theta_h) = v / ((1-v) m^2), and its inverse recovers
// v = q/(1+q) with q = m^2 (1/cos^2(theta_h) - 1). Larger m means a
// tighter lobe.

inline Vec3 ggx_sample_half(const Vec2& uv, double m) {
    const double t = uv.y / std::fmax((1.0 - uv.y) * m * m, 1e-300);
    const double cos_t = 1.0 / std::sqrt(1.0 + t);
    const double sin_t = std::sqrt(std::fmax(0.0, 1.0 - cos_t * cos_t));
    const double phi = kTwoPi * uv.x;
    return {sin_t * std::cos(phi), sin_t * std::sin(phi), cos_t};
}

inline std::optional<Vec2> ggx_invert_half(const Vec3& h, double m) {
    if (!(h.z > 0.0)) return std::nullopt;
    const double q = m * m * (1.0 / (h.z * h.z) - 1.0);
    return Vec2{phi_of(h) / kTwoPi, q / (1.0 + q)};
}

// Density (projected-solid-angle form) of the microfacet draw: D(h) cos(theta_h).
inline double ggx_half_pdf(const Vec3& h, double m) {
    if (!(h.z > 0.0)) return 0.0;
    const double c2 = h.z * h.z;
    const double tan2 = (1.0 - c2) / c2;
    const double denom = 1.0 + m * m * tan2;
    return m * m / (kPi * c2 * h.z * denom * denom);
}

inline Vec3 sample_ggx(const Vec2& uv, const Vec3& wi, double m) {
    return reflect_about(wi, ggx_sample_half(uv, m));
}

// Solid-angle pdf of sample_ggx output over the whole sphere. The microfacet
// preimage of wo is h = +/- normalize(wi + wo) restricted to the upper
// hemisphere; samples whose reflection coefficient is negative land below
// the horizon and are reached through the flipped half vector.
inline double pdf_ggx(const Vec3& wo, const Vec3& wi, double m) {
    Vec3 h = wi + wo;
    const double len = length(h);
    if (len < 1e-12) return 0.0;
    h = h / len;
    if (h.z < 0.0) h = -h;
    const double wo_dot_h = std::abs(dot(wo, h));
    if (!(h.z > 0.0) || !(wo_dot_h > 1e-12)) return 0.0;
    return ggx_half_pdf(h, m) / (4.0 * wo_dot_h);
}

inline std::optional<Vec2> invert_ggx(const Vec3& wo, const Vec3& wi, double m) {
    Vec3 h = wi + wo;
    const double len = length(h);
    if (len < 1e-12) return std::nullopt;  // degenerate half vector
    h = h / len;
    if (h.z < 0.0) h = -h;
    return ggx_invert_half(h, m);
}

// Smith masking term matching this parameterization.
inline double ggx_g1(const Vec3& w, double m) {
    if (!(w.z > 0.0)) return 0.0;
    const double c2 = w.z * w.z;
    const double tan2 = (1.0 - c2) / c2;
    return 2.0 / (1.0 + std::sqrt(1.0 + tan2 / (m * m)));
}

}  // namespace cmlt::bsdf
