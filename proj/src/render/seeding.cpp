// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#include "cmlt/render/seeding.hpp"

#include <algorithm>
#include <cmath>

#include "cmlt/core/image.hpp"
#include "cmlt/core/rng.hpp"

namespace cmlt::render {

using bdpt::Camera;
using bdpt::Path;
using bdpt::PathVertex;
using bdpt::Scene;
using bdpt::SubpathKind;
using bdpt::Technique;

namespace {

constexpr std::uint64_t kSeedLightBase = 16ull << 32;
constexpr std::uint64_t kSeedEyeBase = 17ull << 32;
constexpr std::uint64_t kResample = 18ull << 32;
constexpr std::uint64_t kBdptBase = 19ull << 32;

std::vector<double> draw_coords(RandomStream& rng, int n) {
    std::vector<double> u(n);
    for (double& x : u) x = rng.next();
    return u;
}

struct PoolEntry {
    std::int32_t light_id = -1;  // -1 for s = 0
    std::int32_t eye_id = -1;    // -1 for t = 1
    std::int16_t s = 0;
    std::int16_t t = 0;
    double scalar = 0.0;  // CDF weight: max component of C_{s,t} (scaled)
};

}  // namespace

EnergyTable::EnergyTable(std::vector<std::vector<double>> energies, double floor_frac)
    : energies_(std::move(energies)) {
    q_.resize(energies_.size());
    for (size_t k = 0; k < energies_.size(); ++k) {
        const auto& e = energies_[k];
        if (e.empty()) continue;
        double max_e = 0.0;
        for (double v : e) max_e = std::fmax(max_e, v);
        if (!(max_e > 0.0)) max_e = 1.0;
        q_[k].resize(e.size());
        double sum = 0.0;
        for (size_t s = 0; s < e.size(); ++s) {
            q_[k][s] = std::fmax(e[s], floor_frac * max_e);
            sum += q_[k][s];
        }
        for (double& v : q_[k]) v /= sum;
    }
}

int EnergyTable::propose(int k, double xi) const {
    const auto& q = q_[k];
    double acc = 0.0;
    for (size_t s = 0; s < q.size(); ++s) {
        acc += q[s];
        if (xi < acc || s + 1 == q.size()) return static_cast<int>(s);
    }
    return 0;
}

SeedingResult estimate_and_seed(std::uint64_t n_init, int n_chains, const Scene& scene,
                                std::uint64_t seed) {
    const int max_k = scene.max_path_length();
    const int s_max = max_k;          // light subpath vertices
    const int t_max = max_k + 1;      // eye subpath vertices

    // Pass 1: light subpaths; vertices stored contiguously per subpath.
    std::vector<PathVertex> light_pool;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> light_span(n_init);
    light_pool.reserve(n_init * 3);
    for (std::uint64_t i = 0; i < n_init; ++i) {
        RandomStream rng(seed, kSeedLightBase + i);
        const auto u = draw_coords(rng, 3 * s_max);
        const auto verts = bdpt::sample_subpath(SubpathKind::light, u, s_max, scene);
        light_span[i] = {static_cast<std::uint32_t>(light_pool.size()),
                         static_cast<std::uint32_t>(verts.size())};
        light_pool.insert(light_pool.end(), verts.begin(), verts.end());
    }
    const std::uint64_t pool_size = light_pool.size();
    if (pool_size == 0) throw SeedingError("seeding failed: no light subpath vertices stored");

    std::vector<std::pair<std::uint32_t, std::uint32_t>> pool_index;  // (subpath, prefix len)
    pool_index.reserve(pool_size);
    for (std::uint64_t i = 0; i < n_init; ++i)
        for (std::uint32_t v = 0; v < light_span[i].second; ++v)
            pool_index.push_back({static_cast<std::uint32_t>(i), v + 1});

    // Pass 2: eye subpaths with pool connections, camera connections of the
    // stored light vertices, and implicit emitter hits.
    std::vector<PoolEntry> entries;
    std::vector<std::vector<double>> energies(max_k + 1);
    for (int k = 2; k <= max_k; ++k) energies[k].assign(k + 1, 0.0);
    double b_scalar = 0.0;
    RGB b_rgb{};

    auto record = [&](const Path& path, const RGB& contribution, double scale,
                      std::int32_t light_id, std::int32_t eye_id, int s, int t) {
        const double c_star = max_comp(contribution) * scale;
        if (!(c_star > 0.0)) return;
        b_scalar += c_star;
        b_rgb += contribution * scale;
        const int k = path.length();
        energies[k][s] += c_star;
        entries.push_back({light_id, eye_id, static_cast<std::int16_t>(s),
                           static_cast<std::int16_t>(t), c_star});
    };

    RandomStream pick_rng(seed, stream_id::kSeeding);
    for (std::uint64_t i = 0; i < n_init; ++i) {
        RandomStream rng(seed, kSeedEyeBase + i);
        const auto u = draw_coords(rng, 3 * t_max);
        const auto eye = bdpt::sample_subpath(SubpathKind::eye, u, t_max, scene);

        for (int t = 2; t <= static_cast<int>(eye.size()); ++t) {
            const std::span<const PathVertex> eye_prefix(eye.data(), t);
            // implicit s = 0 hit
            if (t - 1 >= 2 && eye[t - 1].emitter >= 0) {
                Path p;
                p.alive = true;
                p.origin = {0, t};
                p.vertices.assign(eye.rbegin() + (eye.size() - t), eye.rend());
                if (bdpt::compute_raster(p, scene)) {
                    const RGB f = bdpt::measurement_contribution(p, scene, false);
                    if (!f.is_black()) {
                        const double denom = bdpt::family_pdf_sum(p, scene);
                        if (denom > 0.0)
                            record(p, f / denom, 1.0, -1, static_cast<std::int32_t>(i), 0, t);
                    }
                }
            }
            // one random pool connection per eye vertex
            const std::uint64_t pick =
                std::min<std::uint64_t>(static_cast<std::uint64_t>(pick_rng.next() * pool_size),
                                        pool_size - 1);
            const auto [lid, s] = pool_index[pick];
            if (s + t - 1 < 2 || s + t - 1 > max_k) continue;
            const std::span<const PathVertex> light_prefix(
                light_pool.data() + light_span[lid].first, s);
            const auto conn = bdpt::connect(light_prefix, eye_prefix, scene);
            record(conn.path, conn.contribution,
                   static_cast<double>(pool_size) / static_cast<double>(n_init),
                   static_cast<std::int32_t>(lid), static_cast<std::int32_t>(i), s, t);
        }
    }
    // light tracing: every stored light vertex connects to the camera
    const PathVertex camera_vertex = [&] {
        PathVertex z0;
        z0.position = scene.camera().position;
        z0.normal = scene.camera().forward;
        z0.prim = -1;
        z0.material = -1;
        z0.fwd_pdf_area = 1.0;
        return z0;
    }();
    for (std::uint64_t i = 0; i < n_init; ++i) {
        for (std::uint32_t v = 0; v < light_span[i].second; ++v) {
            const int s = static_cast<int>(v) + 1;
            if (s < 2 || s > max_k) continue;  // k = s for t = 1
            const std::span<const PathVertex> light_prefix(
                light_pool.data() + light_span[i].first, s);
            const std::span<const PathVertex> eye_prefix(&camera_vertex, 1);
            const auto conn = bdpt::connect(light_prefix, eye_prefix, scene);
            record(conn.path, conn.contribution, 1.0, static_cast<std::int32_t>(i), -1, s, 1);
        }
    }

    if (entries.empty())
        throw SeedingError("seeding failed: the bidirectional pass found no path with "
                           "positive contribution");

    SeedingResult result;
    result.brightness = b_scalar / static_cast<double>(n_init);
    result.brightness_rgb = b_rgb / static_cast<double>(n_init);
    result.nonzero_contributions = entries.size();
    result.energy = EnergyTable(energies);

    // Resample n_chains seeds from the contribution CDF.
    std::vector<double> cdf(entries.size());
    double acc = 0.0;
    for (size_t e = 0; e < entries.size(); ++e) {
        acc += entries[e].scalar;
        cdf[e] = acc;
    }
    RandomStream rng(seed, kResample);
    result.seeds.reserve(n_chains);
    for (int c = 0; c < n_chains; ++c) {
        const double xi = rng.next() * acc;
        const size_t e =
            std::min(static_cast<size_t>(std::lower_bound(cdf.begin(), cdf.end(), xi) -
                                         cdf.begin()),
                     entries.size() - 1);
        const PoolEntry& entry = entries[e];
        SeedPath sp;
        sp.tech = {entry.s, entry.t};
        sp.u.resize(3 * (entry.s + entry.t));
        if (entry.light_id >= 0) {
            RandomStream lrng(seed, kSeedLightBase + entry.light_id);
            const auto lu = draw_coords(lrng, 3 * s_max);
            std::copy(lu.begin(), lu.begin() + 3 * entry.s, sp.u.begin());
        }
        if (entry.eye_id >= 0) {
            RandomStream erng(seed, kSeedEyeBase + entry.eye_id);
            const auto eu = draw_coords(erng, 3 * t_max);
            std::copy(eu.begin(), eu.begin() + 3 * entry.t, sp.u.begin() + 3 * entry.s);
        } else {
            for (int j = 0; j < 3; ++j) sp.u[3 * entry.s + j] = rng.next();  // idle camera chunk
        }
        const bdpt::TechniqueChart chart(scene, sp.tech);
        sp.path = chart.forward(sp.u);
        const double denom = bdpt::family_pdf_sum(sp.path, scene);
        const double fstar =
            max_comp(bdpt::measurement_contribution(sp.path, scene, false));
        if (!sp.path.alive || !(denom > 0.0) || !(fstar > 0.0))
            throw SeedingError("seeding failed: a resampled seed did not reproduce a "
                               "contributing path");
        sp.scalar = fstar / denom;
        result.seeds.push_back(std::move(sp));
    }
    std::sort(result.seeds.begin(), result.seeds.end(),
              [](const SeedPath& a, const SeedPath& b) {
                  return a.path.length() < b.path.length();
              });
    return result;
}

Image render_bdpt(const Scene& scene, std::uint64_t spp, std::uint64_t seed,
                  double* scalar_brightness, RGB* rgb_brightness) {
    const int max_k = scene.max_path_length();
    const Camera& cam = scene.camera();
    ImageAccumulator accum(cam.res_x, cam.res_y);
    accum.brightness = 1.0;  // splats carry full estimator values
    const std::uint64_t n = spp * static_cast<std::uint64_t>(cam.res_x) * cam.res_y;
    double b_scalar = 0.0;
    RGB b_rgb{};

    for (std::uint64_t i = 0; i < n; ++i) {
        RandomStream rng(seed, kBdptBase + i);
        const auto lu = draw_coords(rng, 3 * max_k);
        const auto light = bdpt::sample_subpath(SubpathKind::light, lu, max_k, scene);
        const auto eu = draw_coords(rng, 3 * (max_k + 1));
        const auto eye = bdpt::sample_subpath(SubpathKind::eye, eu, max_k + 1, scene);
        accum.add_samples(1.0);

        auto splat = [&](const Path& p, const RGB& c) {
            if (max_comp(c) <= 0.0) return;
            const int px = std::min(static_cast<int>(p.raster_x * cam.res_x), cam.res_x - 1);
            const int py = std::min(static_cast<int>(p.raster_y * cam.res_y), cam.res_y - 1);
            accum.splat(px, py, c);
            b_scalar += max_comp(c);
            b_rgb += c;
        };

        for (int t = 2; t <= static_cast<int>(eye.size()); ++t) {
            if (t - 1 >= 2 && eye[t - 1].emitter >= 0) {
                Path p;
                p.alive = true;
                p.origin = {0, t};
                p.vertices.assign(eye.rbegin() + (eye.size() - t), eye.rend());
                if (bdpt::compute_raster(p, scene)) {
                    const RGB f = bdpt::measurement_contribution(p, scene, false);
                    if (!f.is_black()) {
                        const double denom = bdpt::family_pdf_sum(p, scene);
                        if (denom > 0.0) splat(p, f / denom);
                    }
                }
            }
            for (int s = 1; s <= static_cast<int>(light.size()); ++s) {
                const int k = s + t - 1;
                if (k < 2 || k > max_k) continue;
                const auto conn =
                    bdpt::connect({light.data(), static_cast<size_t>(s)},
                                  {eye.data(), static_cast<size_t>(t)}, scene);
                splat(conn.path, conn.contribution);
            }
        }
        for (int s = 2; s <= static_cast<int>(light.size()); ++s) {
            if (s > max_k) continue;  // k = s for t = 1
            PathVertex z0;
            z0.position = cam.position;
            z0.normal = cam.forward;
            z0.prim = -1;
            z0.material = -1;
            z0.fwd_pdf_area = 1.0;
            const auto conn = bdpt::connect({light.data(), static_cast<size_t>(s)}, {&z0, 1},
                                            scene);
            splat(conn.path, conn.contribution);
        }
    }
    if (scalar_brightness) *scalar_brightness = b_scalar / static_cast<double>(n);
    if (rgb_brightness) *rgb_brightness = b_rgb / static_cast<double>(n);
    return accum.normalized();
}

}  // namespace cmlt::render
