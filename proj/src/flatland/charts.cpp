// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#include "cmlt/flatland/charts.hpp"

#include <cmath>

#include "cmlt/bsdf/lambert.hpp"

namespace cmlt::flatland {

namespace {

// Ground shading frame maps BSDF-local +z to world +y.
Vec3 local_to_ground(const Vec3& w) { return {w.x, w.z, w.y}; }
Vec3 ground_to_local(const Vec3& w) { return {w.x, w.z, w.y}; }

bool on_enabled_emitter(const FlatScene& scene, const FlatPath& p) {
    if (p.surface == kLightA) return scene.config().light_a_enabled;
    return p.surface == kLightB && scene.config().light_b_enabled;
}

}  // namespace

FlatPath NeeChart::forward(std::span<const double> u) const {
    const FlatConfig& c = scene_->config();
    FlatPath p;
    p.x1 = {u[0], 0.0, u[1]};
    const double wa = scene_->select_a();
    if (u[2] < wa) {
        const double xi = u[2] / wa;
        p.x2 = {scene_->cdf_a_inverse(xi), c.light_a_y,
                scene_->light_a_min() + u[3] * c.light_a_extent};
        p.surface = kLightA;
    } else {
        const double xi = (u[2] - wa) / (1.0 - wa);
        p.x2 = {xi, c.light_b_y, u[3]};
        p.surface = kLightB;
    }
    return p;
}

double NeeChart::density(const FlatPath& p) const {
    if (!on_enabled_emitter(*scene_, p)) return 0.0;
    // uniform ground pdf (= 1) times the per-area emission pdf
    return scene_->scalar_emission(p) / (scene_->power_a() + scene_->power_b());
}

std::optional<std::vector<double>> NeeChart::invert(const FlatPath& p,
                                                    std::span<const double>) const {
    if (!on_enabled_emitter(*scene_, p)) return std::nullopt;
    const FlatConfig& c = scene_->config();
    const double wa = scene_->select_a();
    double u2, u3;
    if (p.surface == kLightA) {
        u2 = wa * scene_->cdf_a(p.x2.x);
        u3 = (p.x2.z - scene_->light_a_min()) / c.light_a_extent;
    } else {
        u2 = wa + (1.0 - wa) * p.x2.x;
        u3 = p.x2.z;
    }
    return std::vector<double>{p.x1.x, p.x1.z, u2, u3};
}

FlatPath PtChart::forward(std::span<const double> u) const {
    const Vec3 x1{u[0], 0.0, u[1]};
    const Vec3 dir = local_to_ground(bsdf::sample_lambert({u[2], u[3]}));
    return scene_->trace(x1, dir);
}

double PtChart::density(const FlatPath& p) const {
    if (p.surface == kNone) return 0.0;
    const Vec3 d = p.x2 - p.x1;
    const double dist2 = length_squared(d);
    if (!(d.y > 0.0) || dist2 <= 0.0) return 0.0;
    // x2 must be the first hit from x1
    const double dist = std::sqrt(dist2);
    const FlatPath hit = scene_->trace(p.x1, d / dist);
    if (hit.surface != p.surface) return 0.0;
    if (length_squared(hit.x2 - p.x2) > 1e-18 * (1.0 + dist2)) return 0.0;
    const double cos_t = d.y / dist;
    return (cos_t * kInvPi) * (cos_t / dist2);  // cos1/pi * cos2/d^2
}

std::optional<std::vector<double>> PtChart::invert(const FlatPath& p,
                                                   std::span<const double>) const {
    if (density(p) <= 0.0) return std::nullopt;
    const Vec3 dir = normalize(p.x2 - p.x1);
    const auto uv = bsdf::invert_lambert(ground_to_local(dir));
    if (!uv) return std::nullopt;
    return std::vector<double>{p.x1.x, p.x1.z, uv->x, uv->y};
}

}  // namespace cmlt::flatland
