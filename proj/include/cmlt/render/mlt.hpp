// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "cmlt/cmh/kernel.hpp"
#include "cmlt/cmh/stepping.hpp"
#include "cmlt/core/image.hpp"
#include "cmlt/render/seeding.hpp"

namespace cmlt::render {

enum class Algorithm { cmlt, mmlt, pssmlt };

const char* algorithm_name(Algorithm a);
bool algorithm_from_name(const std::string& name, Algorithm* out);

// Serial-tempering chain: the extended state is ((s,t), u) at a fixed path
// length; cached values are re-derivable from u through the forward map.
struct MltChain {
    bdpt::Technique tech;
    std::vector<double> u;
    bdpt::Path path;
    double target = 0.0;  // weighted target f*/sum p
    RGB color{};          // f
    double fstar = 0.0;
};

// Charts of every technique of one path length, shared across chains.
class ChartSet {
  public:
    ChartSet(const bdpt::Scene& scene, int max_length);
    const bdpt::TechniqueChart& chart(int k, int s) const { return *charts_[k][s]; }
    int max_length() const { return static_cast<int>(charts_.size()) - 1; }

  private:
    std::vector<std::vector<std::unique_ptr<bdpt::TechniqueChart>>> charts_;
};

MltChain make_chain(const SeedPath& seed, const bdpt::Scene& scene);

// Symmetric primary-space perturbation with the standard MH acceptance
// against the weighted target; splats proposal and current state weighted by
// A and 1-A (expected-value accumulation).
bool perturbation_step(MltChain& chain, const ChartSet& charts, const cmh::PerturbationKernel& kernel,
                       const bdpt::Scene& scene, RandomStream& rng, cmh::MoveStats& stats,
                       ImageAccumulator* accum);

// Serial-tempering chart swap with partial path inversion: proposes (s',t')
// from the energy table, re-expresses the same path in the new chart, and
// accepts on pdf ratios alone; it needs no forward maps and never evaluates
// the target. The geometric path is unchanged on acceptance.
bool chart_swap_step(MltChain& chain, const EnergyTable& energy, const bdpt::Scene& scene,
                     RandomStream& rng, cmh::MoveStats& stats);

// MMLT-style technique change: keeps u fixed and remaps it through the new
// technique's forward map, generally producing an unrelated path.
bool technique_step(MltChain& chain, const ChartSet& charts, const EnergyTable& energy,
                    const bdpt::Scene& scene, RandomStream& rng, cmh::MoveStats& stats,
                    ImageAccumulator* accum);

// Partial-inversion pdf ratio p_{s',t'} / p_{s,t} touching only the chunks
// that differ; the full recomputation is the test oracle for it.
double swap_pdf_ratio_partial(const bdpt::Path& path, bdpt::Technique from, bdpt::Technique to,
                              const bdpt::Scene& scene);

struct RenderSettings {
    Algorithm algo = Algorithm::cmlt;
    std::uint64_t mutations = 1 << 20;  // perturbation steps, split across chains
    int n_chains = 1 << 10;
    int swap_period = 16;
    std::uint64_t seed = 0;
    std::uint64_t n_init = 1 << 18;
    cmh::KernelSettings kernel;
    int checkpoints = 0;
    bool save_checkpoint_images = false;
    const Image* reference = nullptr;  // enables the RMSE column
};

struct CheckpointRow {
    std::uint64_t mutations = 0;
    double rmse = -1.0;
    double perturb_accept = 0.0;
    double swap_accept = 0.0;
    double swap_failures = 0.0;
};

struct RenderResult {
    Image image;
    double brightness = 0.0;
    cmh::MoveStats perturbations;
    cmh::MoveStats swaps;
    std::vector<CheckpointRow> convergence;
    std::vector<Image> checkpoint_images;  // filled when requested
    SeedingResult seeding_summary;         // seeds cleared, estimates kept
};

RenderResult render(const bdpt::Scene& scene, const RenderSettings& settings);

}  // namespace cmlt::render
