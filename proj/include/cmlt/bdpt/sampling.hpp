// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cmlt/bdpt/path.hpp"
#include "cmlt/bdpt/scene.hpp"
#include "cmlt/cmh/chart.hpp"

namespace cmlt::bdpt {

// Fixed coordinate budget per vertex: one lobe-selection coordinate plus two
// direction (or position) coordinates. Chart dimension for technique (s,t)
// is 3 (s + t).
constexpr int kCoordsPerVertex = 3;

enum class SubpathKind { light, eye };

// Deterministic map from coordinates to subpath vertices; truncates when a
// sampled segment escapes or scattering is blocked. Chunk layout:
//   light chunk 0: (emitter pick, area a, area b)
//   light chunk 1: (idle, cosine u, cosine v)     emission direction
//   light chunk i: (lobe, u, v)                   BSDF at the previous vertex
//   eye   chunk 0: (idle, idle, idle)             pinhole
//   eye   chunk 1: (idle, raster x, raster y)
//   eye   chunk j: (lobe, u, v)
std::vector<PathVertex> sample_subpath(SubpathKind kind, std::span<const double> u,
                                       int n_vertices, const Scene& scene);

// Area-measure density of one chunk evaluated on a joined path; used by
// technique pdfs and by chart swaps (partial products).
double light_chunk_pdf(const Path& path, int chunk, const Scene& scene);
double eye_chunk_pdf(const Path& path, int chunk, const Scene& scene);

// p_{s,t} = product of light and eye chunk densities for splitting the path
// at edge (s-1, s). Zero when some vertex cannot be sampled by the required
// lobe or the raster misses the film.
double technique_pdf(const Path& path, int s, int t, const Scene& scene);

// Sum of p_{i,j} over the family F_k of the path's length (t >= 1).
double family_pdf_sum(const Path& path, const Scene& scene);

// Balance-heuristic weight; weights over a family sum to 1 wherever the
// denominator is positive.
double mis_weight(const Path& path, int s, int t, const Scene& scene);
double mis_weight_from_pdfs(std::span<const double> pdfs, int index);

// Number of measurement_contribution evaluations so far; lets tests verify
// that chart swaps never touch the target.
std::uint64_t measurement_eval_count();

// Measurement contribution: emission x BSDF/geometry products x camera
// response. The camera edge folds the film Jacobian into the response, so
// the value is per unit area at x_{k-1}. Zero off-film and, when
// check_visibility is set, zero if any adjacent pair is occluded.
RGB measurement_contribution(const Path& path, const Scene& scene,
                             bool check_visibility = true);

// Rebuilds the cached raster position from the camera edge; false off-film.
bool compute_raster(Path& path, const Scene& scene);

struct Connection {
    Path path;
    RGB contribution{};  // f / sum of technique pdfs, zero when occluded
};

// Joins a light prefix and an eye prefix with a visibility ray; s or t may
// be 0 only on the light side (pure path tracing hit).
Connection connect(std::span<const PathVertex> light_prefix,
                   std::span<const PathVertex> eye_prefix, const Scene& scene);

enum class TargetMode { importance_sampled, weighted, auxiliary };

// Scalar target evaluation for chart (s,t): importance-sampled f*/p_{s,t},
// weighted f*/sum_j p_j, or the auxiliary visibility indicator of the
// connecting edge. f* is the max RGB component.
double target_eval(TargetMode mode, const Path& path, int s, int t, const Scene& scene);

// Sampling chart of one bidirectional technique over paths of fixed length.
class TechniqueChart final : public cmh::Chart<Path> {
  public:
    TechniqueChart(const Scene& scene, Technique tech) : scene_(&scene), tech_(tech) {}

    Technique technique() const { return tech_; }
    int dim() const override { return kCoordsPerVertex * (tech_.s + tech_.t); }
    int reverse_dim() const override { return tech_.s + tech_.t + 2; }
    Path forward(std::span<const double> u) const override;
    double density(const Path& path) const override;
    std::optional<std::vector<double>> invert(const Path& path,
                                              std::span<const double> v) const override;

    // Inverts only the light chunks [chunk_begin, chunk_end) of the path,
    // consuming one reverse sample per chunk; building block of the partial
    // path inversion in chart swaps. Appends to `out`.
    static bool invert_light_chunks(const Path& path, int chunk_begin, int chunk_end,
                                    const Scene& scene, std::span<const double> v,
                                    std::vector<double>* out);
    static bool invert_eye_chunks(const Path& path, int chunk_begin, int chunk_end,
                                  const Scene& scene, std::span<const double> v,
                                  std::vector<double>* out);

  private:
    const Scene* scene_;
    Technique tech_;
};

// All techniques of one path length, ordered by s.
std::vector<Technique> family_of(int path_length);

}  // namespace cmlt::bdpt
