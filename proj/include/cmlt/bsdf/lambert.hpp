// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <cmath>
#include <optional>

#include "cmlt/bsdf/frame.hpp"
#include "cmlt/core/vec.hpp"

namespace cmlt::bsdf {

// Cosine-weighted hemisphere mapping (theta, phi) = (acos(sqrt(v)), 2 pi u)
// and its exact inverse. All directions in BSDF-local coordinates.

inline Vec3 sample_lambert(const Vec2& uv) {
    const double cos_t = std::sqrt(uv.y);
    const double sin_t = std::sqrt(std::fmax(0.0, 1.0 - uv.y));
    const double phi = kTwoPi * uv.x;
    return {sin_t * std::cos(phi), sin_t * std::sin(phi), cos_t};
}

inline double pdf_lambert(const Vec3& wo) {
    return wo.z > 0.0 ? wo.z * kInvPi : 0.0;
}

inline std::optional<Vec2> invert_lambert(const Vec3& wo) {
    if (!(wo.z > 0.0)) return std::nullopt;  // below horizon
    return Vec2{phi_of(wo) / kTwoPi, std::fmin(1.0, wo.z * wo.z)};
}

}  // namespace cmlt::bsdf
