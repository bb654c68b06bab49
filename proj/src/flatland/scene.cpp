// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#include "cmlt/flatland/scene.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace cmlt::flatland {

FlatScene::FlatScene(const FlatConfig& config) : config_(config) {
    if (max_comp(config_.light_a_red) != 1.0 || max_comp(config_.light_a_white) != 1.0)
        throw std::invalid_argument("flatland: light A colors must have max channel 1");
    a_min_ = 0.5 - 0.5 * config_.light_a_extent;
    a_max_ = 0.5 + 0.5 * config_.light_a_extent;
    const double area_a = config_.light_a_extent * config_.light_a_extent;
    power_a_ = config_.light_a_enabled ? (1.0 + 0.5 * config_.light_a_gradient) * area_a : 0.0;
    power_b_ = config_.light_b_enabled ? max_comp(config_.light_b_emission) : 0.0;
    if (!(power_a_ + power_b_ > 0.0))
        throw std::invalid_argument("flatland: at least one light must be enabled");
    select_a_ = power_a_ / (power_a_ + power_b_);
}

RGB FlatScene::emission(const FlatPath& p) const {
    if (p.surface == kLightA && config_.light_a_enabled) {
        const double t = (p.x2.x - a_min_) / config_.light_a_extent;
        return (1.0 + config_.light_a_gradient * t) *
               lerp(config_.light_a_red, config_.light_a_white, std::fmin(t, 1.0));
    }
    if (p.surface == kLightB && config_.light_b_enabled) return config_.light_b_emission;
    return RGB{};
}

double FlatScene::scalar_emission(const FlatPath& p) const {
    if (p.surface == kLightA && config_.light_a_enabled)
        return 1.0 + config_.light_a_gradient * (p.x2.x - a_min_) / config_.light_a_extent;
    if (p.surface == kLightB && config_.light_b_enabled) return max_comp(config_.light_b_emission);
    return 0.0;
}

bool FlatScene::visible(const Vec3& x1, const Vec3& x2) const {
    if (!config_.occluders_enabled) return true;
    const Vec3 d = x2 - x1;
    if (d.y <= 0.0) return false;
    if (x2.y > config_.strip_y) {
        const double t = (config_.strip_y - x1.y) / d.y;
        const double cx = x1.x + t * d.x;
        const double cz = x1.z + t * d.z;
        if (cx >= config_.strip_x0 && cx <= config_.strip_x1 && cz >= 0.0 && cz <= 1.0)
            return false;
    }
    if (x2.y > config_.hole_y) {
        const double t = (config_.hole_y - x1.y) / d.y;
        const double cx = x1.x + t * d.x - config_.hole_cx;
        const double cz = x1.z + t * d.z - config_.hole_cz;
        if (cx * cx + cz * cz > config_.hole_radius * config_.hole_radius) return false;
    }
    return true;
}

RGB FlatScene::contribution(const FlatPath& p) const {
    if (p.surface != kLightA && p.surface != kLightB) return RGB{};
    const RGB e = emission(p);
    if (e.is_black()) return RGB{};
    if (!visible(p.x1, p.x2)) return RGB{};
    const double d2 = length_squared(p.x2 - p.x1);
    const double dy = p.x2.y - p.x1.y;
    return e * (dy * dy / (d2 * d2));  // cos1 cos2 / d^2 for parallel planes
}

double FlatScene::scalar_contribution(const FlatPath& p) const {
    return max_comp(contribution(p));
}

FlatPath FlatScene::trace(const Vec3& x1, const Vec3& dir) const {
    FlatPath path;
    path.x1 = x1;
    path.surface = kNone;
    if (dir.y <= 1e-12) return path;  // only upward travel can hit anything

    auto hit_plane = [&](double plane_y, Vec3* p) {
        const double t = (plane_y - x1.y) / dir.y;
        *p = x1 + dir * t;
        p->y = plane_y;
    };

    Vec3 p;
    if (config_.occluders_enabled) {
        hit_plane(config_.strip_y, &p);
        if (p.x >= config_.strip_x0 && p.x <= config_.strip_x1 && p.z >= 0.0 && p.z <= 1.0) {
            path.x2 = p;
            path.surface = kStrip;
            return path;
        }
    }
    hit_plane(config_.light_a_y, &p);
    if (config_.light_a_enabled && p.x >= a_min_ && p.x <= a_max_ && p.z >= a_min_ &&
        p.z <= a_max_) {
        path.x2 = p;
        path.surface = kLightA;
        return path;
    }
    if (config_.occluders_enabled) {
        hit_plane(config_.hole_y, &p);
        const double cx = p.x - config_.hole_cx;
        const double cz = p.z - config_.hole_cz;
        if (cx * cx + cz * cz > config_.hole_radius * config_.hole_radius) {
            path.x2 = p;
            path.surface = kHolePlane;
            return path;
        }
    }
    if (config_.light_b_enabled) {
        hit_plane(config_.light_b_y, &p);
        if (p.x >= 0.0 && p.x <= 1.0 && p.z >= 0.0 && p.z <= 1.0) {
            path.x2 = p;
            path.surface = kLightB;
            return path;
        }
    }
    return path;
}

double FlatScene::cdf_a(double x) const {
    const double g = config_.light_a_gradient;
    const double t = (x - a_min_) / config_.light_a_extent;
    return (t + 0.5 * g * t * t) / (1.0 + 0.5 * g);
}

double FlatScene::cdf_a_inverse(double xi) const {
    const double g = config_.light_a_gradient;
    double t;
    if (g == 0.0) {
        t = xi;
    } else {
        // solve (g/2) t^2 + t - xi (1 + g/2) = 0 for t in [0,1]
        t = (-1.0 + std::sqrt(1.0 + 2.0 * g * xi * (1.0 + 0.5 * g))) / g;
    }
    return a_min_ + t * config_.light_a_extent;
}

}  // namespace cmlt::flatland
