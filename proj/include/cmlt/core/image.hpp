// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "cmlt/core/rgb.hpp"

namespace cmlt {

// Row-major RGB float image. Pixel (0,0) is the top-left corner.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<float> pixels;  // 3 floats per pixel

    Image() = default;
    Image(int w, int h) : width(w), height(h), pixels(static_cast<size_t>(w) * h * 3, 0.0f) {}

    float* at(int x, int y) { return &pixels[(static_cast<size_t>(y) * width + x) * 3]; }
    const float* at(int x, int y) const { return &pixels[(static_cast<size_t>(y) * width + x) * 3]; }

    RGB rgb(int x, int y) const {
        const float* p = at(x, y);
        return {p[0], p[1], p[2]};
    }
    void set(int x, int y, const RGB& c) {
        float* p = at(x, y);
        p[0] = static_cast<float>(c.r);
        p[1] = static_cast<float>(c.g);
        p[2] = static_cast<float>(c.b);
    }

    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

// Splat accumulator: double-precision per-pixel sums plus the counters that
// turn them into a normalized image.
struct ImageAccumulator {
    int width = 0;
    int height = 0;
    std::vector<double> sums;      // 3 doubles per pixel
    double weight_total = 0.0;     // total splatted weight
    double brightness = 0.0;       // normalization constant b

    ImageAccumulator() = default;
    ImageAccumulator(int w, int h) : width(w), height(h), sums(static_cast<size_t>(w) * h * 3, 0.0) {}

    void splat(int x, int y, const RGB& c) {
        if (x < 0 || x >= width || y < 0 || y >= height) return;
        if (!is_finite(c)) return;
        double* p = &sums[(static_cast<size_t>(y) * width + x) * 3];
        p[0] += c.r;
        p[1] += c.g;
        p[2] += c.b;
    }

    // One unit of weight per chain step / per plain MC draw.
    void add_samples(double w) { weight_total += w; }

    // pixel = b * npix * sum / total weight; a chain whose splats average to
    // one unit of color per step yields a flat field of brightness b.
    Image normalized() const {
        Image img(width, height);
        const double scale = weight_total > 0.0
                                 ? brightness * static_cast<double>(width) * height / weight_total
                                 : 0.0;
        for (size_t i = 0; i < sums.size(); ++i)
            img.pixels[i] = static_cast<float>(sums[i] * scale);
        return img;
    }

    void merge(const ImageAccumulator& other) {
        for (size_t i = 0; i < sums.size(); ++i) sums[i] += other.sums[i];
        weight_total += other.weight_total;
    }
};

}  // namespace cmlt
