// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#include "cmlt/flatland/run.hpp"

#include <algorithm>
#include <cmath>

#include "cmlt/core/rng.hpp"

namespace cmlt::flatland {

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::pssmlt1: return "pssmlt-1";
        case Variant::pssmlt2: return "pssmlt-2";
        case Variant::pssmlt_avg: return "pssmlt-avg";
        case Variant::pssmlt_mix: return "pssmlt-mix";
        case Variant::cmlt_ipsm: return "cmlt-ipsm";
        case Variant::cmlt: return "cmlt";
    }
    return "?";
}

bool variant_from_name(const std::string& name, Variant* out) {
    for (Variant v : {Variant::pssmlt1, Variant::pssmlt2, Variant::pssmlt_avg,
                      Variant::pssmlt_mix, Variant::cmlt_ipsm, Variant::cmlt}) {
        if (name == variant_name(v)) {
            *out = v;
            return true;
        }
    }
    return false;
}

namespace {

struct SeedEntry {
    FlatPath path;
    int technique;       // chart that produced it
    double weight_is;    // f* / p_i        (importance-sampled chains)
    double weight_mix;   // f* / (p1 + p2)  (weighted chains, path-space chains)
};

struct BrightnessPass {
    Estimates est;
    std::vector<SeedEntry> pool;
};

// Alternating plain Monte Carlo over both charts: estimates every
// normalization constant and collects the nonzero-contribution seed pool.
BrightnessPass brightness_pass(const FlatScene& scene, const NeeChart& nee, const PtChart& pt,
                               std::uint64_t n, std::uint64_t seed) {
    BrightnessPass out;
    RandomStream rng(seed, stream_id::kBrightness);
    double u[4];
    std::uint64_t per_chart[2] = {0, 0};
    for (std::uint64_t i = 0; i < n; ++i) {
        for (double& v : u) v = rng.next();
        const int tech = static_cast<int>(i & 1);
        per_chart[tech]++;
        const FlatPath path = tech == 0 ? nee.forward(u) : pt.forward(u);
        const double fs = scene.scalar_contribution(path);
        if (!(fs > 0.0)) continue;
        const double p1 = nee.density(path);
        const double p2 = pt.density(path);
        const double p_tech = tech == 0 ? p1 : p2;
        const double sum = p1 + p2;
        out.est.b_star += 2.0 * fs / sum;
        out.est.b_rgb += scene.contribution(path) * (2.0 / sum);
        out.est.b_star_chart[tech] += fs / p_tech;
        out.est.c_star_chart[tech] += fs / sum;
        out.pool.push_back({path, tech, fs / p_tech, fs / sum});
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    out.est.b_star *= inv_n;
    out.est.b_rgb *= inv_n;
    for (int t = 0; t < 2; ++t) {
        out.est.b_star_chart[t] /= static_cast<double>(per_chart[t]);
        out.est.c_star_chart[t] /= static_cast<double>(per_chart[t]);
    }
    return out;
}

// Contribution-proportional resampling over a filtered view of the pool.
class SeedSampler {
  public:
    template <class WeightFn, class Filter>
    SeedSampler(const std::vector<SeedEntry>& pool, WeightFn weight, Filter filter) {
        double sum = 0.0;
        for (size_t i = 0; i < pool.size(); ++i) {
            if (!filter(pool[i])) continue;
            sum += weight(pool[i]);
            indices_.push_back(i);
            cdf_.push_back(sum);
        }
        total_ = sum;
    }

    bool empty() const { return !(total_ > 0.0); }

    size_t draw(RandomStream& rng) const {
        const double xi = rng.next() * total_;
        const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), xi);
        const size_t k = std::min(static_cast<size_t>(it - cdf_.begin()), cdf_.size() - 1);
        return indices_[k];
    }

  private:
    std::vector<size_t> indices_;
    std::vector<double> cdf_;
    double total_ = 0.0;
};

int pixel_of(double coord, int res) {
    const int p = static_cast<int>(coord * res);
    return std::min(std::max(p, 0), res - 1);
}

void splat_state(ImageAccumulator& acc, const FlatScene& scene, const FlatPath& path,
                 double fs, const RGB& extra_scale) {
    const int res = acc.width;
    const RGB color = scene.contribution(path) * (1.0 / fs);
    acc.splat(pixel_of(path.x1.x, res), pixel_of(path.x1.z, res), color * extra_scale);
    acc.add_samples(1.0);
}

using FlatState = cmh::ChainState<FlatPath>;

FlatState make_state(const cmh::Chart<FlatPath>& chart, int chart_index, const FlatPath& path,
                     const cmh::Target<FlatPath>& target) {
    FlatState s;
    auto u = chart.invert(path, {});
    s.point = {chart_index, std::move(*u)};  // seeds are always invertible
    s.x = path;
    s.target = target(chart_index, s.x);
    return s;
}

}  // namespace

RunResult run_variant(Variant variant, const FlatScene& scene, const RunSettings& settings) {
    const NeeChart nee(scene);
    const PtChart pt(scene);
    cmh::Atlas<FlatPath> atlas({&nee, &pt});
    const cmh::PerturbationKernel kernel(settings.kernel);
    const int res = scene.config().image_res;

    auto fstar = [&scene](const FlatPath& p) { return scene.scalar_contribution(p); };
    const auto target_is = cmh::make_importance_sampled_target<FlatPath>(atlas, fstar);
    const auto target_mix = cmh::make_weighted_target<FlatPath>(atlas, fstar);

    const BrightnessPass pass =
        brightness_pass(scene, nee, pt, settings.n_brightness, settings.seed);
    if (pass.pool.empty())
        throw SeedingError("flatland seeding failed: no nonzero contributions in the "
                           "brightness pass");

    RunResult result;
    result.estimates = pass.est;
    RandomStream seed_rng(settings.seed, stream_id::kSeeding);

    auto seed_for_chart = [&](int chart, bool weighted) -> FlatPath {
        SeedSampler sampler(
            pass.pool,
            [&](const SeedEntry& e) { return weighted ? e.weight_mix : e.weight_is; },
            [&](const SeedEntry& e) { return e.technique == chart; });
        if (sampler.empty())
            throw SeedingError(std::string("flatland seeding failed: chart ") +
                               std::to_string(chart + 1) + " has no contributing seeds");
        return pass.pool[sampler.draw(seed_rng)].path;
    };
    auto seed_any = [&]() -> FlatPath {
        SeedSampler sampler(pass.pool, [](const SeedEntry& e) { return e.weight_mix; },
                            [](const SeedEntry&) { return true; });
        return pass.pool[sampler.draw(seed_rng)].path;
    };

    const std::uint64_t n = settings.n_samples;

    switch (variant) {
        case Variant::pssmlt1:
        case Variant::pssmlt2: {
            const int chart = variant == Variant::pssmlt1 ? 0 : 1;
            ImageAccumulator acc(res, res);
            acc.brightness = pass.est.b_star_chart[chart];
            FlatState state = make_state(atlas.chart(chart), chart, seed_for_chart(chart, false),
                                         target_is);
            RandomStream rng(settings.seed, stream_id::kChains);
            for (std::uint64_t i = 0; i < n; ++i) {
                cmh::mh_step(state, atlas.chart(chart), kernel, target_is, rng,
                             result.perturbations);
                const double fs = fstar(state.x);
                splat_state(acc, scene, state.x, fs, RGB{1.0});
            }
            result.image = acc.normalized();
            break;
        }

        case Variant::pssmlt_avg: {
            // Each chain estimates its own chart's pull-back brightness; the
            // balance-heuristic weight is applied at splat time.
            Image combined(res, res);
            for (int chart = 0; chart < 2; ++chart) {
                ImageAccumulator acc(res, res);
                acc.brightness = pass.est.b_star_chart[chart];
                FlatState state = make_state(atlas.chart(chart), chart,
                                             seed_for_chart(chart, false), target_is);
                RandomStream rng(settings.seed, stream_id::kChains + chart);
                for (std::uint64_t i = 0; i < n / 2; ++i) {
                    cmh::mh_step(state, atlas.chart(chart), kernel, target_is, rng,
                                 result.perturbations);
                    const double p1 = nee.density(state.x);
                    const double p2 = pt.density(state.x);
                    const double w = (chart == 0 ? p1 : p2) / (p1 + p2);
                    splat_state(acc, scene, state.x, fstar(state.x), RGB{w});
                }
                const Image img = acc.normalized();
                for (size_t k = 0; k < combined.pixels.size(); ++k)
                    combined.pixels[k] += img.pixels[k];
            }
            result.image = std::move(combined);
            break;
        }

        case Variant::pssmlt_mix:
        case Variant::cmlt: {
            const bool with_swaps = variant == Variant::cmlt;
            ImageAccumulator acc[2] = {ImageAccumulator(res, res), ImageAccumulator(res, res)};
            FlatState state[2];
            RandomStream rng(settings.seed, stream_id::kChains);
            for (int chart = 0; chart < 2; ++chart) {
                acc[chart].brightness = pass.est.c_star_chart[chart];
                state[chart] = make_state(atlas.chart(chart), chart, seed_for_chart(chart, true),
                                          target_mix);
            }
            const std::uint64_t iters = n / 2;
            for (std::uint64_t i = 0; i < iters; ++i) {
                if (with_swaps && i % static_cast<std::uint64_t>(settings.swap_period) == 0)
                    cmh::replica_swap(state[0], state[1], atlas, target_mix, rng, result.swaps);
                for (int chart = 0; chart < 2; ++chart) {
                    cmh::mh_step(state[chart], atlas.chart(chart), kernel, target_mix, rng,
                                 result.perturbations);
                    splat_state(acc[chart], scene, state[chart].x, fstar(state[chart].x),
                                RGB{1.0});
                }
            }
            Image combined(res, res);
            for (int chart = 0; chart < 2; ++chart) {
                const Image img = acc[chart].normalized();
                for (size_t k = 0; k < combined.pixels.size(); ++k)
                    combined.pixels[k] += img.pixels[k];
            }
            result.image = std::move(combined);
            break;
        }

        case Variant::cmlt_ipsm: {
            // Single path-space chain with target f*, alternating inverse
            // primary-space mutations through the two charts.
            ImageAccumulator acc(res, res);
            acc.brightness = pass.est.b_star;
            FlatPath x = seed_any();
            double value = fstar(x);
            RandomStream rng(settings.seed, stream_id::kChains);
            const std::function<double(const FlatPath&)> target_omega = fstar;
            for (std::uint64_t i = 0; i < n; ++i) {
                const cmh::Chart<FlatPath>& chart = (i & 1) == 0
                                                        ? static_cast<const cmh::Chart<FlatPath>&>(nee)
                                                        : pt;
                cmh::inverse_primary_perturbation(x, value, chart, kernel, target_omega, rng,
                                                  result.perturbations);
                splat_state(acc, scene, x, value, RGB{1.0});
            }
            result.image = acc.normalized();
            break;
        }
    }
    return result;
}

Image reference_image(const FlatScene& scene, std::uint64_t n_samples, std::uint64_t seed) {
    const NeeChart nee(scene);
    const PtChart pt(scene);
    const int res = scene.config().image_res;
    ImageAccumulator acc(res, res);
    acc.brightness = 1.0;  // the splat colors carry the full estimator value
    RandomStream rng(seed, stream_id::kReference);
    double u[4];
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        for (double& v : u) v = rng.next();
        const int tech = static_cast<int>(i & 1);
        const FlatPath path = tech == 0 ? nee.forward(u) : pt.forward(u);
        const RGB f = scene.contribution(path);
        acc.add_samples(1.0);
        if (f.is_black()) continue;
        const double sum = nee.density(path) + pt.density(path);
        acc.splat(pixel_of(path.x1.x, res), pixel_of(path.x1.z, res), f * (2.0 / sum));
    }
    return acc.normalized();
}

}  // namespace cmlt::flatland
