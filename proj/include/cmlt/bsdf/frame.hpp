// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <cmath>

#include "cmlt/core/vec.hpp"

namespace cmlt::bsdf {

// Directions are unit vectors; BSDF-local coordinates put the shading normal
// along +z. phi is remapped to [0, 2pi), and the pole theta = 0 maps to
// phi = 0 by convention.

inline Vec3 from_spherical(double theta, double phi) {
    const double s = std::sin(theta);
    return {s * std::cos(phi), s * std::sin(phi), std::cos(theta)};
}

inline double phi_of(const Vec3& w) {
    if (std::abs(w.x) == 0.0 && std::abs(w.y) == 0.0) return 0.0;  // pole
    double phi = std::atan2(w.y, w.x);
    if (phi < 0.0) phi += kTwoPi;
    if (phi >= kTwoPi) phi = 0.0;
    return phi;
}

inline double cos_theta(const Vec3& w) { return w.z; }

inline Vec3 reflect_about(const Vec3& w, const Vec3& axis) {
    return axis * (2.0 * dot(w, axis)) - w;
}

// Right-handed orthonormal basis with n as the third column.
struct ShadingFrame {
    Vec3 tangent, bitangent, normal;

    ShadingFrame() : tangent(1, 0, 0), bitangent(0, 1, 0), normal(0, 0, 1) {}

    explicit ShadingFrame(const Vec3& n) : normal(n) {
        // branchless basis construction (Duff et al. style)
        const double sign = std::copysign(1.0, n.z);
        const double a = -1.0 / (sign + n.z);
        const double b = n.x * n.y * a;
        tangent = {1.0 + sign * n.x * n.x * a, sign * b, -sign * n.x};
        bitangent = {b, sign + n.y * n.y * a, -n.y};
    }

    Vec3 to_local(const Vec3& w) const {
        return {dot(w, tangent), dot(w, bitangent), dot(w, normal)};
    }
    Vec3 to_world(const Vec3& w) const {
        return tangent * w.x + bitangent * w.y + normal * w.z;
    }
};

}  // namespace cmlt::bsdf
