// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#include "cmlt/bdpt/scene.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace cmlt::bdpt {

void Scene::finalize() {
    double diag2 = 0.0;
    Vec3 lo{1e30, 1e30, 1e30}, hi{-1e30, -1e30, -1e30};
    for (Primitive& p : prims_) {
        const Vec3 n = cross(p.edge_u, p.edge_v);
        const double len = length(n);
        if (len <= 0.0) throw SceneError("degenerate primitive");
        p.normal = n / len;
        p.area = p.triangle ? 0.5 * len : len;
        // dual vectors extract (a, b) plane coordinates
        p.dual_u = cross(p.edge_v, p.normal) / dot(cross(p.edge_v, p.normal), p.edge_u);
        p.dual_v = cross(p.edge_u, p.normal) / dot(cross(p.edge_u, p.normal), p.edge_v);
        for (const Vec3& c : {p.origin, p.origin + p.edge_u, p.origin + p.edge_v,
                              p.origin + p.edge_u + p.edge_v}) {
            lo = {std::fmin(lo.x, c.x), std::fmin(lo.y, c.y), std::fmin(lo.z, c.z)};
            hi = {std::fmax(hi.x, c.x), std::fmax(hi.y, c.y), std::fmax(hi.z, c.z)};
        }
    }
    diag2 = length_squared(hi - lo);
    ray_epsilon_ = 1e-4 * std::sqrt(std::fmax(diag2, 1e-12));

    emitter_cdf_.clear();
    total_power_ = 0.0;
    for (Emitter& e : emitters_) {
        if (e.prim < 0 || e.prim >= static_cast<int>(prims_.size()))
            throw SceneError("emitter references a missing primitive");
        e.power = max_comp(e.radiance) * prims_[e.prim].area;
        total_power_ += e.power;
        emitter_cdf_.push_back(total_power_);
    }
    if (emitters_.empty() || !(total_power_ > 0.0))
        throw SceneError("scene has no emitter with positive power");
}

std::optional<Intersection> Scene::intersect(const Vec3& origin, const Vec3& dir,
                                             double t_max) const {
    Intersection best;
    best.t = t_max;
    bool found = false;
    for (size_t i = 0; i < prims_.size(); ++i) {
        const Primitive& p = prims_[i];
        const double denom = dot(dir, p.normal);
        if (std::abs(denom) < 1e-12) continue;
        const double t = dot(p.origin - origin, p.normal) / denom;
        if (t <= ray_epsilon_ || t >= best.t) continue;
        const Vec3 q = origin + dir * t - p.origin;
        const double a = dot(q, p.dual_u);
        const double b = dot(q, p.dual_v);
        if (a < 0.0 || b < 0.0) continue;
        if (p.triangle ? (a + b > 1.0) : (a > 1.0 || b > 1.0)) continue;
        best.t = t;
        best.prim = static_cast<int>(i);
        best.position = origin + dir * t;
        best.normal = p.normal;
        found = true;
    }
    if (!found) return std::nullopt;
    return best;
}

bool Scene::visible(const Vec3& a, const Vec3& b) const {
    const Vec3 d = b - a;
    const double dist = length(d);
    if (dist <= 2.0 * ray_epsilon_) return true;
    const Vec3 dir = d / dist;
    const auto hit = intersect(a, dir, dist - ray_epsilon_);
    return !hit.has_value();
}

int Scene::pick_emitter(double xi, double* pdf) const {
    const double target = xi * total_power_;
    for (size_t i = 0; i < emitter_cdf_.size(); ++i) {
        if (target < emitter_cdf_[i] || i + 1 == emitter_cdf_.size()) {
            if (pdf) *pdf = emitters_[i].power / total_power_;
            return static_cast<int>(i);
        }
    }
    return 0;
}

double Scene::emitter_pick_pdf(int emitter) const {
    return emitters_[emitter].power / total_power_;
}

double Scene::emitter_cdf_before(int emitter) const {
    return emitter == 0 ? 0.0 : emitter_cdf_[emitter - 1] / total_power_;
}

namespace {

void add_quad(Scene& s, const Vec3& origin, const Vec3& eu, const Vec3& ev, int material,
              const RGB& emission = RGB{}) {
    Primitive p;
    p.origin = origin;
    p.edge_u = eu;
    p.edge_v = ev;
    p.material = material;
    if (max_comp(emission) > 0.0) {
        Emitter e;
        e.prim = static_cast<int>(s.prims_mut().size());
        e.radiance = emission;
        p.emitter = static_cast<int>(s.emitters_mut().size());
        s.emitters_mut().push_back(e);
    }
    s.prims_mut().push_back(p);
}

bsdf::LayeredBsdf make_material(const RGB& albedo, const RGB& tint, double m, double eta) {
    bsdf::LayeredBsdf mat;
    mat.diffuse_albedo = albedo;
    mat.glossy_tint = tint;
    mat.roughness_m = m;
    mat.fresnel_eta = eta;
    return mat;
}

}  // namespace

Scene Scene::desk() {
    Scene s;
    auto& mats = s.materials_mut();
    mats.push_back(make_material(RGB{0.72, 0.72, 0.72}, RGB{}, 1.0, 1.0));   // 0 white
    mats.push_back(make_material(RGB{0.62, 0.09, 0.08}, RGB{}, 1.0, 1.0));   // 1 red
    mats.push_back(make_material(RGB{0.10, 0.52, 0.10}, RGB{}, 1.0, 1.0));   // 2 green
    mats.push_back(make_material(RGB{0.50, 0.48, 0.45}, RGB{0.25, 0.25, 0.25}, 6.0, 1.6));  // 3 floor
    mats.push_back(make_material(RGB{0.22, 0.16, 0.10}, RGB{0.55, 0.50, 0.45}, 18.0, 2.2)); // 4 desk
    mats.push_back(make_material(RGB{0.05, 0.05, 0.06}, RGB{0.80, 0.82, 0.85}, 35.0, 2.8)); // 5 panel
    mats.push_back(make_material(RGB{}, RGB{}, 1.0, 1.0));                   // 6 light surface

    add_quad(s, {0, 0, 0}, {0, 0, 2}, {2, 0, 0}, 3);          // floor (+y)
    add_quad(s, {0, 2, 0}, {2, 0, 0}, {0, 0, 2}, 0);          // ceiling (-y)
    add_quad(s, {0, 0, 0}, {2, 0, 0}, {0, 2, 0}, 0);          // back wall (+z)
    add_quad(s, {0, 0, 0}, {0, 2, 0}, {0, 0, 2}, 1);          // left wall (+x), red
    add_quad(s, {2, 0, 0}, {0, 0, 2}, {0, 2, 0}, 2);          // right wall (-x), green
    add_quad(s, {0, 0, 2}, {0, 2, 0}, {2, 0, 0}, 0);          // front wall (-z)
    add_quad(s, {0.55, 0.7, 0.55}, {0, 0, 0.9}, {0.9, 0, 0}, 4);  // desk top (+y)
    add_quad(s, {0.7, 0.7, 0.8}, {0.6, 0, 0}, {0, 0.5, 0}, 5);    // glossy panel (+z)
    add_quad(s, {0.7, 1.999, 0.8}, {0.6, 0, 0}, {0, 0, 0.6}, 6,
             RGB{14.0, 12.0, 9.0});                               // ceiling light (-y)
    add_quad(s, {0.001, 0.25, 0.9}, {0, 0.35, 0}, {0, 0, 0.35}, 6,
             RGB{3.0, 5.0, 12.0});                                // side light (+x)

    Camera& cam = s.camera_mut();
    cam.position = {1.0, 1.1, 1.85};
    const Vec3 look{1.0, 0.75, 0.6};
    cam.forward = normalize(look - cam.position);
    cam.right = normalize(cross(cam.forward, Vec3{0, 1, 0}));
    cam.up = cross(cam.right, cam.forward);
    cam.film_w = 2.0 * std::tan(0.5 * 55.0 * kPi / 180.0);
    cam.res_x = 96;
    cam.res_y = 72;
    cam.film_h = cam.film_w * 72.0 / 96.0;

    s.finalize();
    return s;
}

namespace {

Vec3 parse_vec(const nlohmann::json& j) { return {j.at(0), j.at(1), j.at(2)}; }
RGB parse_rgb(const nlohmann::json& j) { return {j.at(0), j.at(1), j.at(2)}; }

}  // namespace

Scene Scene::load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SceneError("cannot open scene file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw SceneError("scene parse error in " + path + ": " + e.what());
    }

    Scene s;
    std::vector<std::string> mat_names;
    for (const auto& jm : j.at("materials")) {
        bsdf::LayeredBsdf m;
        if (jm.contains("diffuse_albedo")) m.diffuse_albedo = parse_rgb(jm["diffuse_albedo"]);
        if (jm.contains("glossy_tint")) m.glossy_tint = parse_rgb(jm["glossy_tint"]);
        else m.glossy_tint = RGB{};
        if (jm.contains("roughness_m")) m.roughness_m = jm["roughness_m"];
        if (jm.contains("fresnel_eta")) m.fresnel_eta = jm["fresnel_eta"];
        mat_names.push_back(jm.at("name"));
        s.materials_mut().push_back(m);
    }
    auto material_index = [&](const std::string& name) {
        for (size_t i = 0; i < mat_names.size(); ++i)
            if (mat_names[i] == name) return static_cast<int>(i);
        throw SceneError("unknown material: " + name);
    };

    for (const auto& jp : j.at("primitives")) {
        Primitive p;
        p.origin = parse_vec(jp.at("origin"));
        p.edge_u = parse_vec(jp.at("edge_u"));
        p.edge_v = parse_vec(jp.at("edge_v"));
        p.triangle = jp.value("type", std::string("quad")) == "triangle";
        p.material = material_index(jp.at("material"));
        if (jp.contains("emission")) {
            Emitter e;
            e.prim = static_cast<int>(s.prims_mut().size());
            e.radiance = parse_rgb(jp["emission"]);
            p.emitter = static_cast<int>(s.emitters_mut().size());
            s.emitters_mut().push_back(e);
        }
        s.prims_mut().push_back(p);
    }

    const auto& jc = j.at("camera");
    Camera& cam = s.camera_mut();
    cam.position = parse_vec(jc.at("position"));
    cam.forward = normalize(parse_vec(jc.at("look_at")) - cam.position);
    cam.right = normalize(cross(cam.forward, jc.contains("up") ? parse_vec(jc["up"])
                                                               : Vec3{0, 1, 0}));
    cam.up = cross(cam.right, cam.forward);
    const double fov = jc.value("fov_deg", 55.0);
    cam.res_x = jc.at("resolution").at(0);
    cam.res_y = jc.at("resolution").at(1);
    cam.film_w = 2.0 * std::tan(0.5 * fov * kPi / 180.0);
    cam.film_h = cam.film_w * static_cast<double>(cam.res_y) / cam.res_x;

    s.finalize();
    return s;
}

}  // namespace cmlt::bdpt
