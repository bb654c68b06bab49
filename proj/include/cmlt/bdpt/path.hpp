// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <vector>

#include "cmlt/core/rgb.hpp"
#include "cmlt/core/vec.hpp"

namespace cmlt::bdpt {

// Bidirectional strategy: s light vertices, t eye vertices, s + t = k + 1.
// The pinhole camera cannot be hit, so t >= 1 always.
struct Technique {
    int s = 0;
    int t = 1;
    int path_length() const { return s + t - 1; }
};

// One surface (or camera / light) vertex. Primitives are flat, so the
// geometric normal doubles as the shading normal.
struct PathVertex {
    Vec3 position;
    Vec3 normal;
    int prim = -1;      // -1 for the camera vertex
    int material = -1;
    int emitter = -1;   // >= 0 when the vertex lies on an area light
    double fwd_pdf_area = 0.0;  // cached pdf of the technique that sampled it
};

// Full path x_0 .. x_k stored light-to-camera: x_0 on a light (for paths
// with positive contribution), x_k the camera vertex.
struct Path {
    std::vector<PathVertex> vertices;
    Technique origin;       // technique that generated the path
    double raster_x = 0.0;  // in [0,1)^2
    double raster_y = 0.0;
    bool alive = false;     // false: a sampled segment escaped the scene

    int length() const { return static_cast<int>(vertices.size()) - 1; }
};

}  // namespace cmlt::bdpt
