// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>

namespace cmlt {

struct RGB {
    double r = 0.0, g = 0.0, b = 0.0;

    RGB() = default;
    RGB(double r_, double g_, double b_) : r(r_), g(g_), b(b_) {}
    explicit RGB(double v) : r(v), g(v), b(v) {}

    RGB operator+(const RGB& o) const { return {r + o.r, g + o.g, b + o.b}; }
    RGB operator-(const RGB& o) const { return {r - o.r, g - o.g, b - o.b}; }
    RGB operator*(const RGB& o) const { return {r * o.r, g * o.g, b * o.b}; }
    RGB operator*(double s) const { return {r * s, g * s, b * s}; }
    RGB operator/(double s) const { return {r / s, g / s, b / s}; }
    RGB& operator+=(const RGB& o) { r += o.r; g += o.g; b += o.b; return *this; }
    RGB& operator*=(double s) { r *= s; g *= s; b *= s; return *this; }

    bool is_black() const { return r == 0.0 && g == 0.0 && b == 0.0; }
};

inline RGB operator*(double s, const RGB& c) { return c * s; }

inline double max_comp(const RGB& c) { return std::max(c.r, std::max(c.g, c.b)); }

inline bool is_finite(const RGB& c) {
    return std::isfinite(c.r) && std::isfinite(c.g) && std::isfinite(c.b);
}

inline RGB lerp(const RGB& a, const RGB& b, double t) { return a * (1.0 - t) + b * t; }

}  // namespace cmlt
