// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#include "cmlt/bdpt/sampling.hpp"

#include <atomic>
#include <cassert>
#include <cmath>

#include "cmlt/bsdf/frame.hpp"
#include "cmlt/bsdf/lambert.hpp"

namespace cmlt::bdpt {

namespace {

// Uniform area sampling of a primitive and its exact inverse. Triangles use
// the square-root warp of the unit square.
Vec3 sample_position(const Primitive& p, double u1, double u2, double* a_out = nullptr,
                     double* b_out = nullptr) {
    double a = u1, b = u2;
    if (p.triangle) {
        const double su = std::sqrt(u1);
        a = 1.0 - su;
        b = u2 * su;
    }
    if (a_out) *a_out = a;
    if (b_out) *b_out = b;
    return p.origin + p.edge_u * a + p.edge_v * b;
}

bool invert_position(const Primitive& p, const Vec3& pos, double* u1, double* u2) {
    const Vec3 q = pos - p.origin;
    const double a = dot(q, p.dual_u);
    const double b = dot(q, p.dual_v);
    if (!p.triangle) {
        if (a < -1e-9 || a > 1.0 + 1e-9 || b < -1e-9 || b > 1.0 + 1e-9) return false;
        *u1 = std::fmin(std::fmax(a, 0.0), 1.0);
        *u2 = std::fmin(std::fmax(b, 0.0), 1.0);
        return true;
    }
    const double su = 1.0 - a;
    if (su < 1e-12 || a < -1e-9 || b < -1e-9 || a + b > 1.0 + 1e-9) return false;
    *u1 = su * su;
    *u2 = std::fmin(std::fmax(b / su, 0.0), 1.0);
    return true;
}

double to_area(double pdf_solid_angle, const Vec3& from, const Vec3& to, const Vec3& n_to) {
    const Vec3 d = to - from;
    const double d2 = length_squared(d);
    if (d2 <= 0.0) return 0.0;
    return pdf_solid_angle * std::abs(dot(n_to, d)) / (d2 * std::sqrt(d2));
}

PathVertex make_vertex(const Scene& scene, const Intersection& hit) {
    PathVertex v;
    v.position = hit.position;
    v.normal = hit.normal;
    v.prim = hit.prim;
    v.material = scene.prims()[hit.prim].material;
    v.emitter = scene.prims()[hit.prim].emitter;
    return v;
}

// Extends a subpath by one BSDF-sampled segment; false when scattering dies
// or the ray escapes.
bool extend_by_bsdf(std::vector<PathVertex>& verts, std::span<const double> chunk,
                    const Scene& scene) {
    const PathVertex& cur = verts.back();
    const PathVertex& prev = verts[verts.size() - 2];
    const bsdf::ShadingFrame frame(cur.normal);
    const Vec3 wi = frame.to_local(normalize(prev.position - cur.position));
    if (!(wi.z > 0.0)) return false;  // arrived on the back face
    const auto sample = bsdf::sample_layered(Vec3{chunk[0], chunk[1], chunk[2]}, wi,
                                             scene.material(cur.material));
    if (!(sample.wo.z > 0.0)) return false;  // zero-throughput direction
    const Vec3 dir = frame.to_world(sample.wo);
    const auto hit = scene.intersect(cur.position, dir);
    if (!hit) return false;
    PathVertex next = make_vertex(scene, *hit);
    next.fwd_pdf_area =
        to_area(bsdf::pdf_layered(sample.wo, wi, scene.material(cur.material)), cur.position,
                next.position, next.normal);
    verts.push_back(next);
    return true;
}

}  // namespace

std::vector<PathVertex> sample_subpath(SubpathKind kind, std::span<const double> u,
                                       int n_vertices, const Scene& scene) {
    std::vector<PathVertex> verts;
    verts.reserve(n_vertices);
    if (n_vertices == 0) return verts;

    if (kind == SubpathKind::light) {
        double pick_pdf = 0.0;
        const int e = scene.pick_emitter(u[0], &pick_pdf);
        const Primitive& p = scene.prims()[scene.emitters()[e].prim];
        PathVertex v0;
        v0.position = sample_position(p, u[1], u[2]);
        v0.normal = p.normal;
        v0.prim = scene.emitters()[e].prim;
        v0.material = p.material;
        v0.emitter = e;
        v0.fwd_pdf_area = pick_pdf / p.area;
        verts.push_back(v0);

        if (n_vertices >= 2) {
            const bsdf::ShadingFrame frame(v0.normal);
            const Vec3 local = bsdf::sample_lambert({u[4], u[5]});
            const Vec3 dir = frame.to_world(local);
            const auto hit = scene.intersect(v0.position, dir);
            if (hit) {
                PathVertex v1 = make_vertex(scene, *hit);
                v1.fwd_pdf_area = to_area(bsdf::pdf_lambert(local), v0.position, v1.position,
                                          v1.normal);
                verts.push_back(v1);
            }
        }
        for (int i = 2; i < n_vertices && static_cast<int>(verts.size()) == i; ++i)
            extend_by_bsdf(verts, u.subspan(3 * i, 3), scene);
        return verts;
    }

    // eye subpath
    const Camera& cam = scene.camera();
    PathVertex z0;
    z0.position = cam.position;
    z0.normal = cam.forward;
    z0.prim = -1;
    z0.material = -1;
    z0.fwd_pdf_area = 1.0;
    verts.push_back(z0);

    if (n_vertices >= 2) {
        const Vec3 dir = cam.direction(u[4], u[5]);
        const auto hit = scene.intersect(cam.position, dir);
        if (hit) {
            PathVertex z1 = make_vertex(scene, *hit);
            z1.fwd_pdf_area =
                to_area(cam.raster_pdf(dir), cam.position, z1.position, z1.normal);
            verts.push_back(z1);
        }
    }
    for (int j = 2; j < n_vertices && static_cast<int>(verts.size()) == j; ++j)
        extend_by_bsdf(verts, u.subspan(3 * j, 3), scene);
    return verts;
}

double light_chunk_pdf(const Path& path, int chunk, const Scene& scene) {
    const auto& v = path.vertices;
    const int k = path.length();
    if (chunk < 0 || chunk > k - 1) return 0.0;  // never generates the camera vertex
    if (chunk == 0) {
        if (v[0].emitter < 0) return 0.0;
        const Primitive& p = scene.prims()[v[0].prim];
        return scene.emitter_pick_pdf(v[0].emitter) / p.area;
    }
    if (chunk == 1) {
        const Vec3 d = v[1].position - v[0].position;
        const double dist = length(d);
        if (dist <= 0.0) return 0.0;
        const double cos0 = dot(v[0].normal, d) / dist;
        if (!(cos0 > 0.0)) return 0.0;  // one-sided emission
        return to_area(cos0 * kInvPi, v[0].position, v[1].position, v[1].normal);
    }
    const int at = chunk - 1;  // BSDF vertex
    const bsdf::ShadingFrame frame(v[at].normal);
    const Vec3 wi = frame.to_local(normalize(v[at - 1].position - v[at].position));
    const Vec3 wo = frame.to_local(normalize(v[at + 1].position - v[at].position));
    if (!(wi.z > 0.0)) return 0.0;
    const double pdf = bsdf::pdf_layered(wo, wi, scene.material(v[at].material));
    return to_area(pdf, v[at].position, v[at + 1].position, v[at + 1].normal);
}

double eye_chunk_pdf(const Path& path, int chunk, const Scene& scene) {
    const auto& v = path.vertices;
    const int k = path.length();
    if (chunk == 0) return 1.0;  // pinhole delta, shared by every technique
    if (chunk > k) return 0.0;
    const int at = k - chunk;  // index of the vertex this chunk generates
    if (chunk == 1) {
        const Vec3 dir = normalize(v[k - 1].position - v[k].position);
        const double pdf_sa = scene.camera().raster_pdf(dir);
        if (!(pdf_sa > 0.0)) return 0.0;
        return to_area(pdf_sa, v[k].position, v[k - 1].position, v[k - 1].normal);
    }
    const int prev = at + 1;       // closer to the camera
    const int prev2 = at + 2;
    const bsdf::ShadingFrame frame(v[prev].normal);
    const Vec3 wi = frame.to_local(normalize(v[prev2].position - v[prev].position));
    const Vec3 wo = frame.to_local(normalize(v[at].position - v[prev].position));
    if (!(wi.z > 0.0)) return 0.0;
    const double pdf = bsdf::pdf_layered(wo, wi, scene.material(v[prev].material));
    return to_area(pdf, v[prev].position, v[at].position, v[at].normal);
}

double technique_pdf(const Path& path, int s, int t, const Scene& scene) {
    if (s + t != path.length() + 1 || t < 1 || s < 0) return 0.0;
    double pdf = 1.0;
    for (int i = 0; i < s && pdf > 0.0; ++i) pdf *= light_chunk_pdf(path, i, scene);
    for (int j = 0; j < t && pdf > 0.0; ++j) pdf *= eye_chunk_pdf(path, j, scene);
    return pdf;
}

namespace {

// Per-technique pdfs indexed by s, computed from shared prefix products.
std::vector<double> family_pdfs(const Path& path, const Scene& scene) {
    const int k = path.length();
    std::vector<double> light_pref(k + 1, 1.0), eye_pref(k + 2, 1.0);
    for (int i = 0; i < k; ++i)
        light_pref[i + 1] = light_pref[i] == 0.0 ? 0.0
                                                 : light_pref[i] * light_chunk_pdf(path, i, scene);
    for (int j = 0; j < k + 1; ++j)
        eye_pref[j + 1] =
            eye_pref[j] == 0.0 ? 0.0 : eye_pref[j] * eye_chunk_pdf(path, j, scene);
    std::vector<double> pdfs(k + 1);
    for (int s = 0; s <= k; ++s) pdfs[s] = light_pref[s] * eye_pref[k + 1 - s];
    return pdfs;
}

}  // namespace

double family_pdf_sum(const Path& path, const Scene& scene) {
    double sum = 0.0;
    for (double p : family_pdfs(path, scene)) sum += p;
    return sum;
}

double mis_weight_from_pdfs(std::span<const double> pdfs, int index) {
    double sum = 0.0;
    for (double p : pdfs) sum += p;
    if (!(sum > 0.0) || !(pdfs[index] > 0.0)) return 0.0;
    return pdfs[index] / sum;
}

double mis_weight(const Path& path, int s, int t, const Scene& scene) {
    if (s + t != path.length() + 1 || t < 1 || s < 0 || s > path.length()) return 0.0;
    const std::vector<double> pdfs = family_pdfs(path, scene);
    return mis_weight_from_pdfs(pdfs, s);
}

bool compute_raster(Path& path, const Scene& scene) {
    const int k = path.length();
    if (k < 1) return false;
    const Vec3 dir = normalize(path.vertices[k - 1].position - path.vertices[k].position);
    const auto r = scene.camera().raster(dir);
    if (!r) return false;
    path.raster_x = r->x;
    path.raster_y = r->y;
    return true;
}

namespace {
std::atomic<std::uint64_t> g_measurement_evals{0};
}

std::uint64_t measurement_eval_count() {
    return g_measurement_evals.load(std::memory_order_relaxed);
}

RGB measurement_contribution(const Path& path, const Scene& scene, bool check_visibility) {
    g_measurement_evals.fetch_add(1, std::memory_order_relaxed);
    const auto& v = path.vertices;
    const int k = path.length();
    if (!path.alive || k < 1) return RGB{};
    if (v[k].prim != -1) return RGB{};  // must end at the camera

    // emission end
    if (v[0].emitter < 0) return RGB{};
    const Vec3 d01 = v[1].position - v[0].position;
    const double dist01 = length(d01);
    if (!(dist01 > 0.0) || !(dot(v[0].normal, d01) > 0.0)) return RGB{};
    RGB f = scene.emitters()[v[0].emitter].radiance;

    // camera end: film Jacobian in place of the usual G factor
    const Vec3 cam_dir = normalize(v[k - 1].position - v[k].position);
    const double importance = scene.camera().raster_pdf(cam_dir);
    if (!(importance > 0.0) || !scene.camera().raster(cam_dir)) return RGB{};

    auto geom = [&](int a, int b) {
        const Vec3 d = v[b].position - v[a].position;
        const double d2 = length_squared(d);
        return std::abs(dot(v[a].normal, d)) * std::abs(dot(v[b].normal, d)) / (d2 * d2);
    };

    if (k == 1) {
        const double cos0 = std::abs(dot(v[0].normal, cam_dir));
        f *= cos0 / length_squared(v[1].position - v[0].position);
    } else {
        f *= geom(0, 1);
        for (int i = 1; i <= k - 1; ++i) {
            const bsdf::ShadingFrame frame(v[i].normal);
            const Vec3 wi = frame.to_local(normalize(v[i - 1].position - v[i].position));
            const Vec3 wo = frame.to_local(normalize(v[i + 1].position - v[i].position));
            f = f * bsdf::eval_layered(wi, wo, scene.material(v[i].material));
            if (f.is_black()) return RGB{};
            if (i < k - 1) {
                f *= geom(i, i + 1);
            } else {
                // camera edge: cosine-to-distance conversion at x_{k-1}
                const Vec3 dk = v[k].position - v[k - 1].position;
                const double d2 = length_squared(dk);
                f *= std::abs(dot(v[k - 1].normal, dk)) / (d2 * std::sqrt(d2));
            }
        }
    }
    f *= importance;

    if (check_visibility) {
        for (int i = 0; i < k; ++i)
            if (!scene.visible(v[i].position, v[i + 1].position)) return RGB{};
    }
    return f;
}

Connection connect(std::span<const PathVertex> light_prefix,
                   std::span<const PathVertex> eye_prefix, const Scene& scene) {
    Connection out;
    Path& path = out.path;
    path.alive = true;
    path.origin = {static_cast<int>(light_prefix.size()),
                   static_cast<int>(eye_prefix.size())};
    path.vertices.assign(light_prefix.begin(), light_prefix.end());
    for (auto it = eye_prefix.rbegin(); it != eye_prefix.rend(); ++it)
        path.vertices.push_back(*it);

    if (!compute_raster(path, scene)) return out;
    const int s = path.origin.s;
    if (s >= 1) {
        const Vec3& a = light_prefix[s - 1].position;
        const Vec3& b = eye_prefix[eye_prefix.size() - 1].position;
        if (!scene.visible(a, b)) return out;
    }
    const RGB f = measurement_contribution(path, scene, false);
    if (f.is_black()) return out;
    const double denom = family_pdf_sum(path, scene);
    if (!(denom > 0.0)) return out;
    out.contribution = f / denom;
    return out;
}

double target_eval(TargetMode mode, const Path& path, int s, int t, const Scene& scene) {
    if (!path.alive) return 0.0;
    if (mode == TargetMode::auxiliary) {
        if (s == 0) return 1.0;
        const int k = path.length();
        if (s > k) return 0.0;
        return scene.visible(path.vertices[s - 1].position, path.vertices[s].position) ? 1.0
                                                                                       : 0.0;
    }
    const double fs = max_comp(measurement_contribution(path, scene, false));
    if (!(fs > 0.0)) return 0.0;
    if (mode == TargetMode::importance_sampled) {
        const double p = technique_pdf(path, s, t, scene);
        return p > 0.0 ? fs / p : 0.0;
    }
    const double denom = family_pdf_sum(path, scene);
    return denom > 0.0 ? fs / denom : 0.0;
}

Path TechniqueChart::forward(std::span<const double> u) const {
    Path path;
    path.origin = tech_;
    const int s = tech_.s, t = tech_.t;
    const auto light = sample_subpath(SubpathKind::light, u.subspan(0, 3 * s), s, *scene_);
    if (static_cast<int>(light.size()) != s) return path;  // dead
    const auto eye = sample_subpath(SubpathKind::eye, u.subspan(3 * s, 3 * t), t, *scene_);
    if (static_cast<int>(eye.size()) != t) return path;
    path.vertices = light;
    for (auto it = eye.rbegin(); it != eye.rend(); ++it) path.vertices.push_back(*it);
    path.alive = true;
    compute_raster(path, *scene_);  // off-film paths keep raster (0,0), f = 0
    return path;
}

double TechniqueChart::density(const Path& path) const {
    if (!path.alive) return 0.0;
    return technique_pdf(path, tech_.s, tech_.t, *scene_);
}

bool TechniqueChart::invert_light_chunks(const Path& path, int chunk_begin, int chunk_end,
                                         const Scene& scene, std::span<const double> v,
                                         std::vector<double>* out) {
    const auto& verts = path.vertices;
    size_t iv = 0;
    // stochastic inversion proceeds from the subpath end backwards
    for (int c = chunk_end - 1; c >= chunk_begin; --c) {
        double* slot = out->data() + 3 * c;
        if (c == 0) {
            if (verts[0].emitter < 0) return false;
            const int e = verts[0].emitter;
            const double lo = scene.emitter_cdf_before(e);
            const double width = scene.emitter_pick_pdf(e);
            double a, b;
            if (!invert_position(scene.prims()[verts[0].prim], verts[0].position, &a, &b))
                return false;
            slot[0] = lo + v[iv++] * width;
            slot[1] = a;
            slot[2] = b;
        } else if (c == 1) {
            const bsdf::ShadingFrame frame(verts[0].normal);
            const Vec3 local = frame.to_local(normalize(verts[1].position - verts[0].position));
            const auto uv = bsdf::invert_lambert(local);
            if (!uv) return false;
            slot[0] = v[iv++];
            slot[1] = uv->x;
            slot[2] = uv->y;
        } else {
            const int at = c - 1;
            const bsdf::ShadingFrame frame(verts[at].normal);
            const Vec3 wi =
                frame.to_local(normalize(verts[at - 1].position - verts[at].position));
            const Vec3 wo =
                frame.to_local(normalize(verts[at + 1].position - verts[at].position));
            if (!(wi.z > 0.0)) return false;
            const auto u3 =
                bsdf::invert_layered(wo, wi, scene.material(verts[at].material), v[iv++]);
            if (!u3) return false;
            slot[0] = u3->x;
            slot[1] = u3->y;
            slot[2] = u3->z;
        }
    }
    return true;
}

bool TechniqueChart::invert_eye_chunks(const Path& path, int chunk_begin, int chunk_end,
                                       const Scene& scene, std::span<const double> v,
                                       std::vector<double>* out) {
    assert(chunk_begin >= 1);
    const auto& verts = path.vertices;
    const int k = path.length();
    size_t iv = 0;
    for (int c = chunk_end - 1; c >= chunk_begin; --c) {
        double* slot = out->data() + 3 * c;  // caller re-bases for the eye block
        if (c == 1) {
            const Vec3 dir = normalize(verts[k - 1].position - verts[k].position);
            const auto r = scene.camera().raster(dir);
            if (!r) return false;
            slot[0] = v[iv++];
            slot[1] = r->x;
            slot[2] = r->y;
        } else {
            const int at = k - c;        // vertex generated by this chunk
            const int prev = at + 1;     // BSDF vertex
            const bsdf::ShadingFrame frame(verts[prev].normal);
            const Vec3 wi =
                frame.to_local(normalize(verts[prev + 1].position - verts[prev].position));
            const Vec3 wo =
                frame.to_local(normalize(verts[at].position - verts[prev].position));
            if (!(wi.z > 0.0)) return false;
            const auto u3 =
                bsdf::invert_layered(wo, wi, scene.material(verts[prev].material), v[iv++]);
            if (!u3) return false;
            slot[0] = u3->x;
            slot[1] = u3->y;
            slot[2] = u3->z;
        }
    }
    return true;
}

std::optional<std::vector<double>> TechniqueChart::invert(const Path& path,
                                                          std::span<const double> v) const {
    const int s = tech_.s, t = tech_.t;
    if (!path.alive || path.length() != s + t - 1) return std::nullopt;
    std::vector<double> u(3 * (s + t));
    size_t iv = 0;

    if (s >= 1) {
        std::vector<double> light_block(3 * s);
        if (!invert_light_chunks(path, 0, s, *scene_, v.subspan(iv, s), &light_block))
            return std::nullopt;
        std::copy(light_block.begin(), light_block.end(), u.begin());
        iv += s;
    }

    // eye chunk 0: three idle coordinates
    u[3 * s + 0] = v[iv++];
    u[3 * s + 1] = v[iv++];
    u[3 * s + 2] = v[iv++];
    if (t >= 2) {
        std::vector<double> eye_block(3 * t);
        if (!invert_eye_chunks(path, 1, t, *scene_, v.subspan(iv, t - 1), &eye_block))
            return std::nullopt;
        std::copy(eye_block.begin() + 3, eye_block.end(), u.begin() + 3 * s + 3);
        iv += t - 1;
    }
    return u;
}

std::vector<Technique> family_of(int path_length) {
    std::vector<Technique> out;
    for (int s = 0; s <= path_length; ++s)
        out.push_back({s, path_length + 1 - s});
    return out;
}

}  // namespace cmlt::bdpt
