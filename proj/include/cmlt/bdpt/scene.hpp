// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmlt/bsdf/layered.hpp"
#include "cmlt/core/rgb.hpp"
#include "cmlt/core/vec.hpp"

namespace cmlt::bdpt {

// Parallelogram (or half-parallelogram triangle) primitive:
// p(a,b) = origin + a*edge_u + b*edge_v with (a,b) in the unit square,
// restricted to a + b <= 1 for triangles.
struct Primitive {
    Vec3 origin, edge_u, edge_v;
    bool triangle = false;
    int material = 0;
    int emitter = -1;

    Vec3 normal;      // unit; set by Scene
    double area = 0;  // set by Scene
    Vec3 dual_u, dual_v;  // plane-local coordinate extraction; set by Scene
};

struct Emitter {
    int prim = -1;
    RGB radiance{};       // one-sided, along the primitive normal
    double power = 0.0;   // scalar selection weight: max component x area
};

// Pinhole camera; raster coordinates live in [0,1)^2 with (0,0) the top
// left. The film sits at unit distance along `forward`.
struct Camera {
    Vec3 position;
    Vec3 forward, right, up;
    double film_w = 1.0, film_h = 1.0;
    int res_x = 96, res_y = 72;

    Vec3 direction(double rx, double ry) const {
        return normalize(forward + right * ((rx - 0.5) * film_w) +
                         up * ((0.5 - ry) * film_h));
    }
    // Raster position of a world direction from the pinhole; empty when the
    // direction misses the film.
    std::optional<Vec2> raster(const Vec3& dir) const {
        const double c = dot(dir, forward);
        if (c <= 1e-9) return std::nullopt;
        const Vec3 q = dir / c;  // on the film plane
        const double rx = dot(q, right) / film_w + 0.5;
        const double ry = 0.5 - dot(q, up) / film_h;
        if (rx < 0.0 || rx >= 1.0 || ry < 0.0 || ry >= 1.0) return std::nullopt;
        return Vec2{rx, ry};
    }
    // Solid-angle density of directions through a uniform raster sample,
    // which is also the per-raster importance of this camera model.
    double raster_pdf(const Vec3& dir) const {
        const double c = dot(dir, forward);
        if (c <= 1e-9) return 0.0;
        return 1.0 / (film_w * film_h * c * c * c);
    }
};

struct Intersection {
    double t = 0.0;
    int prim = -1;
    Vec3 position;
    Vec3 normal;
};

struct SceneError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Scene {
  public:
    // Cornell-style desk scene with mixed diffuse/glossy materials and two
    // area lights; requires no scene file.
    static Scene desk();
    static Scene load_json(const std::string& path);

    void finalize();  // computes normals, areas, powers, visibility epsilon

    std::optional<Intersection> intersect(const Vec3& origin, const Vec3& dir,
                                          double t_max = 1e30) const;
    bool visible(const Vec3& a, const Vec3& b) const;

    // Power-proportional emitter selection (exact CDF on maxima).
    int pick_emitter(double xi, double* pdf) const;
    double emitter_pick_pdf(int emitter) const;
    // Fraction of the selection coordinate covered by emitters before e.
    double emitter_cdf_before(int emitter) const;

    const std::vector<Primitive>& prims() const { return prims_; }
    const std::vector<Emitter>& emitters() const { return emitters_; }
    const bsdf::LayeredBsdf& material(int m) const { return materials_[m]; }
    const Camera& camera() const { return camera_; }
    double ray_epsilon() const { return ray_epsilon_; }
    int max_path_length() const { return max_path_length_; }

    std::vector<Primitive>& prims_mut() { return prims_; }
    std::vector<bsdf::LayeredBsdf>& materials_mut() { return materials_; }
    std::vector<Emitter>& emitters_mut() { return emitters_; }
    Camera& camera_mut() { return camera_; }

  private:
    std::vector<Primitive> prims_;
    std::vector<bsdf::LayeredBsdf> materials_;
    std::vector<Emitter> emitters_;
    std::vector<double> emitter_cdf_;
    Camera camera_;
    double ray_epsilon_ = 1e-6;
    double total_power_ = 0.0;
    int max_path_length_ = 8;
};

}  // namespace cmlt::bdpt
