// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cmlt/bdpt/sampling.hpp"
#include "cmlt/core/image.hpp"

namespace cmlt::render {

struct SeedPath {
    bdpt::Path path;
    bdpt::Technique tech;
    std::vector<double> u;  // chart coordinates reproducing the path
    double scalar = 0.0;    // f* / sum_j p_j at the seed
};

// Proposal distribution over techniques of each path length, proportional to
// the per-technique energy from the seeding pass, floored and renormalized
// so acceptance q-ratios stay finite.
class EnergyTable {
  public:
    EnergyTable() = default;
    EnergyTable(std::vector<std::vector<double>> energies, double floor_frac = 1e-3);

    int max_length() const { return static_cast<int>(q_.size()) - 1; }
    double q(int k, int s) const { return q_[k][s]; }
    int propose(int k, double xi) const;
    double energy(int k, int s) const { return energies_[k][s]; }

  private:
    std::vector<std::vector<double>> q_;         // [k][s]
    std::vector<std::vector<double>> energies_;  // raw estimates
};

struct SeedingResult {
    double brightness = 0.0;  // mean-image estimate of the scalar contribution
    RGB brightness_rgb{};
    std::vector<SeedPath> seeds;  // sorted by path length
    EnergyTable energy;
    std::uint64_t nonzero_contributions = 0;
};

struct SeedingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Simplified bidirectional pass: N_init light and eye subpaths; every eye
// vertex connects to one uniformly chosen stored light vertex, light
// vertices connect to the camera, and emitter hits form the s = 0
// techniques. Stores nonzero contributions, estimates b, and resamples
// n_chains seeds by CDF inversion.
SeedingResult estimate_and_seed(std::uint64_t n_init, int n_chains, const bdpt::Scene& scene,
                                std::uint64_t seed);

// Unbiased BDPT baseline at the scene's camera resolution; `spp` samples per
// pixel on average (global uniform rasters). Also reports the scalar
// brightness estimate when asked.
Image render_bdpt(const bdpt::Scene& scene, std::uint64_t spp, std::uint64_t seed,
                  double* scalar_brightness = nullptr, RGB* rgb_brightness = nullptr);

}  // namespace cmlt::render
