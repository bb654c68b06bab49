// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#include "cmlt/render/mlt.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include "cmlt/core/image_io.hpp"

namespace cmlt::render {

using bdpt::Camera;
using bdpt::Path;
using bdpt::Scene;
using bdpt::Technique;
using bdpt::TechniqueChart;

const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::cmlt: return "cmlt";
        case Algorithm::mmlt: return "mmlt";
        case Algorithm::pssmlt: return "pssmlt";
    }
    return "?";
}

bool algorithm_from_name(const std::string& name, Algorithm* out) {
    for (Algorithm a : {Algorithm::cmlt, Algorithm::mmlt, Algorithm::pssmlt}) {
        if (name == algorithm_name(a)) {
            *out = a;
            return true;
        }
    }
    return false;
}

ChartSet::ChartSet(const Scene& scene, int max_length) {
    charts_.resize(max_length + 1);
    for (int k = 2; k <= max_length; ++k) {
        charts_[k].resize(k + 1);
        for (int s = 0; s <= k; ++s)
            charts_[k][s] = std::make_unique<TechniqueChart>(scene, Technique{s, k + 1 - s});
    }
}

namespace {

double weighted_target(const Path& path, const Scene& scene, RGB* f_out, double* fstar_out) {
    const RGB f = bdpt::measurement_contribution(path, scene, false);
    const double fstar = max_comp(f);
    if (f_out) *f_out = f;
    if (fstar_out) *fstar_out = fstar;
    if (!(fstar > 0.0)) return 0.0;
    const double denom = bdpt::family_pdf_sum(path, scene);
    return denom > 0.0 ? fstar / denom : 0.0;
}

void splat_path(ImageAccumulator* accum, const Path& path, const RGB& color, double weight) {
    if (!accum || !(weight > 0.0)) return;
    const int px = std::min(static_cast<int>(path.raster_x * accum->width), accum->width - 1);
    const int py = std::min(static_cast<int>(path.raster_y * accum->height), accum->height - 1);
    accum->splat(px, py, color * weight);
}

}  // namespace

MltChain make_chain(const SeedPath& seed, const Scene& scene) {
    MltChain chain;
    chain.tech = seed.tech;
    chain.u = seed.u;
    chain.path = seed.path;
    chain.target = weighted_target(chain.path, scene, &chain.color, &chain.fstar);
    return chain;
}

bool perturbation_step(MltChain& chain, const ChartSet& charts,
                       const cmh::PerturbationKernel& kernel, const Scene& scene,
                       RandomStream& rng, cmh::MoveStats& stats, ImageAccumulator* accum) {
    stats.proposals++;
    const TechniqueChart& chart = charts.chart(chain.path.length(), chain.tech.s);
    std::vector<double> u_new = kernel.propose(chain.u, rng);
    Path proposal = chart.forward(u_new);
    RGB f_new;
    double fstar_new = 0.0;
    const double target_new =
        proposal.alive ? weighted_target(proposal, scene, &f_new, &fstar_new) : 0.0;

    const double a = cmh::clamp_acceptance(target_new / chain.target);
    stats.acceptance_weight += a;
    if (accum) {
        accum->add_samples(1.0);
        if (a > 0.0) splat_path(accum, proposal, f_new / fstar_new, a);
        splat_path(accum, chain.path, chain.color / chain.fstar, 1.0 - a);
    }
    const double xi = rng.next();
    if (xi < a) {
        chain.u = std::move(u_new);
        chain.path = std::move(proposal);
        chain.target = target_new;
        chain.color = f_new;
        chain.fstar = fstar_new;
        stats.accepts++;
        return true;
    }
    return false;
}

double swap_pdf_ratio_partial(const Path& path, Technique from, Technique to,
                              const Scene& scene) {
    double ratio = 1.0;
    if (to.s > from.s) {
        for (int c = from.s; c < to.s; ++c) {
            const double num = bdpt::light_chunk_pdf(path, c, scene);
            if (!(num > 0.0)) return 0.0;
            ratio *= num;
        }
        for (int c = to.t; c < from.t; ++c) {
            const double den = bdpt::eye_chunk_pdf(path, c, scene);
            if (!(den > 0.0)) return 0.0;
            ratio /= den;
        }
    } else if (to.s < from.s) {
        for (int c = from.t; c < to.t; ++c) {
            const double num = bdpt::eye_chunk_pdf(path, c, scene);
            if (!(num > 0.0)) return 0.0;
            ratio *= num;
        }
        for (int c = to.s; c < from.s; ++c) {
            const double den = bdpt::light_chunk_pdf(path, c, scene);
            if (!(den > 0.0)) return 0.0;
            ratio /= den;
        }
    }
    return ratio;
}

bool chart_swap_step(MltChain& chain, const EnergyTable& energy,
                     const Scene& scene, RandomStream& rng, cmh::MoveStats& stats) {
    stats.proposals++;
    const int k = chain.path.length();
    const int s_new = energy.propose(k, rng.next());
    const Technique to{s_new, k + 1 - s_new};
    const Technique from = chain.tech;
    if (to.s == from.s) {  // identity proposal
        stats.acceptance_weight += 1.0;
        stats.accepts++;
        return true;
    }

    // partial inversion of the differing chunk range, end backwards
    std::vector<double> u_new(chain.u.size());
    if (to.s > from.s) {
        std::copy(chain.u.begin(), chain.u.begin() + 3 * from.s, u_new.begin());
        std::vector<double> light_block(3 * to.s);
        std::vector<double> v(to.s - from.s);
        for (double& x : v) x = rng.next();
        if (!TechniqueChart::invert_light_chunks(chain.path, from.s, to.s, scene, v,
                                                 &light_block)) {
            stats.inversion_failures++;
            return false;
        }
        std::copy(light_block.begin() + 3 * from.s, light_block.end(),
                  u_new.begin() + 3 * from.s);
        std::copy(chain.u.begin() + 3 * from.s, chain.u.begin() + 3 * (from.s + to.t),
                  u_new.begin() + 3 * to.s);
    } else {
        std::copy(chain.u.begin(), chain.u.begin() + 3 * to.s, u_new.begin());
        std::copy(chain.u.begin() + 3 * from.s, chain.u.begin() + 3 * (from.s + from.t),
                  u_new.begin() + 3 * to.s);
        std::vector<double> eye_block(3 * to.t);
        std::vector<double> v(to.t - from.t);
        for (double& x : v) x = rng.next();
        if (!TechniqueChart::invert_eye_chunks(chain.path, from.t, to.t, scene, v, &eye_block)) {
            stats.inversion_failures++;
            return false;
        }
        std::copy(eye_block.begin() + 3 * from.t, eye_block.end(),
                  u_new.begin() + 3 * to.s + 3 * from.t);
    }

    const double ratio = swap_pdf_ratio_partial(chain.path, from, to, scene);
    const double q_ratio = energy.q(k, from.s) / energy.q(k, to.s);
    const double a = cmh::clamp_acceptance(q_ratio * ratio);
    stats.acceptance_weight += a;
    const double xi = rng.next();
    if (xi < a) {
        chain.u = std::move(u_new);
        chain.tech = to;
        chain.path.origin = to;
        stats.accepts++;
        return true;
    }
    return false;
}

bool technique_step(MltChain& chain, const ChartSet& charts, const EnergyTable& energy,
                    const Scene& scene, RandomStream& rng, cmh::MoveStats& stats,
                    ImageAccumulator* accum) {
    stats.proposals++;
    const int k = chain.path.length();
    const int s_new = energy.propose(k, rng.next());
    const Technique to{s_new, k + 1 - s_new};
    if (to.s == chain.tech.s) {
        stats.acceptance_weight += 1.0;
        stats.accepts++;
        return true;
    }
    const TechniqueChart& chart = charts.chart(k, to.s);
    Path proposal = chart.forward(chain.u);  // same coordinates, new meaning
    RGB f_new;
    double fstar_new = 0.0;
    const double target_new =
        proposal.alive ? weighted_target(proposal, scene, &f_new, &fstar_new) : 0.0;
    const double q_ratio = energy.q(k, chain.tech.s) / energy.q(k, to.s);
    const double a = cmh::clamp_acceptance(q_ratio * target_new / chain.target);
    stats.acceptance_weight += a;
    if (accum) {
        accum->add_samples(1.0);
        if (a > 0.0) splat_path(accum, proposal, f_new / fstar_new, a);
        splat_path(accum, chain.path, chain.color / chain.fstar, 1.0 - a);
    }
    const double xi = rng.next();
    if (xi < a) {
        chain.tech = to;
        chain.path = std::move(proposal);
        chain.target = target_new;
        chain.color = f_new;
        chain.fstar = fstar_new;
        stats.accepts++;
        return true;
    }
    return false;
}

namespace {

int worker_count() {
    if (const char* env = std::getenv("CMLT_WORKERS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

RenderResult render(const Scene& scene, const RenderSettings& settings) {
    RenderResult result;
    SeedingResult seeding =
        estimate_and_seed(settings.n_init, settings.n_chains, scene, settings.seed);
    result.brightness = seeding.brightness;

    const ChartSet charts(scene, scene.max_path_length());
    const cmh::PerturbationKernel kernel(settings.kernel);
    const Camera& cam = scene.camera();

    const int n_chains = settings.n_chains;
    const std::uint64_t per_chain =
        std::max<std::uint64_t>(1, settings.mutations / static_cast<std::uint64_t>(n_chains));
    const int segments = std::max(1, settings.checkpoints);

    std::vector<MltChain> chains;
    chains.reserve(n_chains);
    for (const SeedPath& seed : seeding.seeds) chains.push_back(make_chain(seed, scene));
    std::vector<RandomStream> streams;
    streams.reserve(n_chains);
    for (int c = 0; c < n_chains; ++c)
        streams.emplace_back(settings.seed, stream_id::kChains + static_cast<std::uint64_t>(c));

    const int workers = std::min(worker_count(), n_chains);
    std::vector<ImageAccumulator> accums(workers, ImageAccumulator(cam.res_x, cam.res_y));
    std::vector<cmh::MoveStats> perturb_stats(workers), swap_stats(workers);

    std::uint64_t mutations_done = 0;
    for (int seg = 0; seg < segments; ++seg) {
        const std::uint64_t step_begin = per_chain * seg / segments;
        const std::uint64_t step_end = per_chain * (seg + 1) / segments;

        auto run_range = [&](int w, int c_begin, int c_end) {
            for (int c = c_begin; c < c_end; ++c) {
                MltChain& chain = chains[c];
                RandomStream& rng = streams[c];
                for (std::uint64_t step = step_begin; step < step_end; ++step) {
                    if (settings.algo != Algorithm::pssmlt &&
                        settings.swap_period > 0 &&
                        step % static_cast<std::uint64_t>(settings.swap_period) == 0) {
                        if (settings.algo == Algorithm::cmlt)
                            chart_swap_step(chain, seeding.energy, scene, rng, swap_stats[w]);
                        else
                            technique_step(chain, charts, seeding.energy, scene, rng,
                                           swap_stats[w], &accums[w]);
                    }
                    perturbation_step(chain, charts, kernel, scene, rng, perturb_stats[w],
                                      &accums[w]);
                }
            }
        };

        if (workers == 1) {
            run_range(0, 0, n_chains);
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w) {
                const int c_begin = static_cast<int>(static_cast<std::int64_t>(n_chains) * w / workers);
                const int c_end =
                    static_cast<int>(static_cast<std::int64_t>(n_chains) * (w + 1) / workers);
                pool.emplace_back(run_range, w, c_begin, c_end);
            }
            for (auto& t : pool) t.join();
        }
        mutations_done += (step_end - step_begin) * static_cast<std::uint64_t>(n_chains);

        if (settings.checkpoints > 0) {
            ImageAccumulator merged(cam.res_x, cam.res_y);
            merged.brightness = seeding.brightness;
            for (const auto& a : accums) merged.merge(a);
            const Image snapshot = merged.normalized();
            CheckpointRow row;
            row.mutations = mutations_done;
            cmh::MoveStats p, s;
            for (const auto& ps : perturb_stats) p.merge(ps);
            for (const auto& ss : swap_stats) s.merge(ss);
            row.perturb_accept = p.accept_rate();
            row.swap_accept = s.accept_rate();
            row.swap_failures =
                s.proposals ? static_cast<double>(s.inversion_failures) / s.proposals : 0.0;
            if (settings.reference) row.rmse = rmse(snapshot, *settings.reference);
            if (settings.save_checkpoint_images) result.checkpoint_images.push_back(snapshot);
            result.convergence.push_back(row);
        }
    }

    ImageAccumulator merged(cam.res_x, cam.res_y);
    merged.brightness = seeding.brightness;
    for (const auto& a : accums) merged.merge(a);
    result.image = merged.normalized();
    for (const auto& ps : perturb_stats) result.perturbations.merge(ps);
    for (const auto& ss : swap_stats) result.swaps.merge(ss);
    seeding.seeds.clear();
    result.seeding_summary = std::move(seeding);
    return result;
}

}  // namespace cmlt::render
