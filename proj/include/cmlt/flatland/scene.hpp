// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <string>

#include "cmlt/core/rgb.hpp"
#include "cmlt/core/vec.hpp"

namespace cmlt::flatland {

// Two-point path space: x1 on the ground square, x2 on an emitter (or on an
// occluder / escaped, in which case the contribution is zero).
//
// Geometry: ground at y = 0 spanning [0,1]^2 in xz. Light A is a unit square
// at y = 1 with emission (1 + g x) * lerp(red, white, x). A thin opaque strip
// sits at y = 0.5. Light B is a uniform green unit square at y = 2, blocked
// by a full plane at y = 1.5 except for a small circular hole. Emitters do
// not block visibility segments; rays stop at any surface they hit.

enum Surface : int {
    kNone = -1,
    kLightA = 0,
    kLightB = 1,
    kStrip = 2,
    kHolePlane = 3,
};

struct FlatPath {
    Vec3 x1;          // ground point
    Vec3 x2;          // second point
    int surface = kNone;  // what x2 lies on; kNone means the ray escaped
};

struct FlatConfig {
    double light_a_y = 1.0;
    double light_b_y = 2.0;
    double strip_y = 0.5;
    double strip_x0 = 0.8, strip_x1 = 0.85;
    double hole_y = 1.5;
    double hole_cx = 0.5, hole_cz = 0.5;
    double hole_radius = 0.02;

    RGB light_a_red{1.0, 0.2, 0.2};   // max channel must be 1 (keeps the CDF analytic)
    RGB light_a_white{1.0, 1.0, 1.0};
    double light_a_gradient = 9.0;    // E_A scale = 1 + gradient * x
    RGB light_b_emission{40.0, 400.0, 40.0};

    bool light_a_enabled = true;
    bool light_b_enabled = true;
    bool occluders_enabled = true;
    // light A spans the square of this side length centered on (0.5, 0.5);
    // the default is the unit square [0,1]^2
    double light_a_extent = 1.0;

    int image_res = 512;
};

class FlatScene {
  public:
    explicit FlatScene(const FlatConfig& config);

    const FlatConfig& config() const { return config_; }

    RGB emission(const FlatPath& p) const;
    double scalar_emission(const FlatPath& p) const;  // max channel, analytic

    // Occluder-only visibility; emitters are transparent to segments.
    bool visible(const Vec3& x1, const Vec3& x2) const;

    RGB contribution(const FlatPath& p) const;         // E * cos cos / d^2 * V
    double scalar_contribution(const FlatPath& p) const;

    // First surface hit walking upward from x1; surface = kNone if escaped.
    FlatPath trace(const Vec3& x1, const Vec3& dir) const;

    // Scalar emitter powers and the light-A marginal CDF in x (both exact).
    double power_a() const { return power_a_; }
    double power_b() const { return power_b_; }
    double select_a() const { return select_a_; }  // P(pick light A)
    double cdf_a(double x) const;                  // normalized marginal CDF
    double cdf_a_inverse(double xi) const;
    double light_a_min() const { return a_min_; }
    double light_a_max() const { return a_max_; }

  private:
    FlatConfig config_;
    double power_a_ = 0.0, power_b_ = 0.0, select_a_ = 1.0;
    double a_min_ = 0.0, a_max_ = 1.0;
};

}  // namespace cmlt::flatland
