// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <string>

#include "cmlt/core/image.hpp"

namespace cmlt {

// PFM, little-endian (scale -1.0), rows bottom-up. Rejects images with
// negative or non-finite pixels. I/O errors carry the path in the message.
void write_pfm(const Image& img, const std::string& path);
Image read_pfm(const std::string& path);

// 8-bit sRGB PNG for viewing; pixels are scaled by `exposure` before the
// sRGB transfer curve. Never used for quantitative comparisons.
void write_png(const Image& img, const std::string& path, double exposure = 1.0);

// Root mean squared per-channel difference. Throws on dimension mismatch.
double rmse(const Image& a, const Image& b);

}  // namespace cmlt
