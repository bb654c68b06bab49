// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#include "cmlt/core/image_io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <vector>

namespace cmlt {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void io_fail(const std::string& what, const std::string& path) {
    throw std::runtime_error(what + ": " + path);
}

void validate_pixels(const Image& img, const std::string& path) {
    for (float v : img.pixels) {
        if (!(v >= 0.0f) || !std::isfinite(v))
            io_fail("image has negative or non-finite pixels, refusing to write", path);
    }
}

}  // namespace

void write_pfm(const Image& img, const std::string& path) {
    validate_pixels(img, path);
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) io_fail("cannot open for writing", path);
    std::fprintf(f.get(), "PF\n%d %d\n-1.0\n", img.width, img.height);
    // PFM stores the bottom row first.
    for (int y = img.height - 1; y >= 0; --y) {
        const float* row = img.at(0, y);
        if (std::fwrite(row, sizeof(float), static_cast<size_t>(img.width) * 3, f.get()) !=
            static_cast<size_t>(img.width) * 3)
            io_fail("short write", path);
    }
    if (std::fflush(f.get()) != 0) io_fail("flush failed", path);
}

Image read_pfm(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) io_fail("cannot open for reading", path);
    char magic[3] = {};
    if (std::fscanf(f.get(), "%2s", magic) != 1 || std::strcmp(magic, "PF") != 0)
        io_fail("not a color PFM file", path);
    int w = 0, h = 0;
    double scale = 0.0;
    if (std::fscanf(f.get(), "%d %d %lf", &w, &h, &scale) != 3 || w <= 0 || h <= 0)
        io_fail("bad PFM header", path);
    if (scale >= 0.0) io_fail("big-endian PFM not supported", path);
    std::fgetc(f.get());  // single whitespace byte before the raster
    Image img(w, h);
    for (int y = h - 1; y >= 0; --y) {
        float* row = img.at(0, y);
        if (std::fread(row, sizeof(float), static_cast<size_t>(w) * 3, f.get()) !=
            static_cast<size_t>(w) * 3)
            io_fail("truncated PFM raster", path);
    }
    return img;
}

namespace {

void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void png_chunk(std::vector<std::uint8_t>& out, const char type[4],
               const std::uint8_t* data, size_t n) {
    put_u32_be(out, static_cast<std::uint32_t>(n));
    const size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data, data + n);
    const auto crc = crc32(0, out.data() + start, static_cast<uInt>(out.size() - start));
    put_u32_be(out, static_cast<std::uint32_t>(crc));
}

std::uint8_t to_srgb_u8(double linear) {
    double c = std::fmax(0.0, std::fmin(1.0, linear));
    c = c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
    return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

}  // namespace

void write_png(const Image& img, const std::string& path, double exposure) {
    validate_pixels(img, path);
    const int w = img.width, h = img.height;
    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<size_t>(h) * (1 + static_cast<size_t>(w) * 3));
    for (int y = 0; y < h; ++y) {
        raw.push_back(0);  // filter: none
        for (int x = 0; x < w; ++x) {
            const float* p = img.at(x, y);
            raw.push_back(to_srgb_u8(p[0] * exposure));
            raw.push_back(to_srgb_u8(p[1] * exposure));
            raw.push_back(to_srgb_u8(p[2] * exposure));
        }
    }
    uLongf zlen = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> zdata(zlen);
    if (compress2(zdata.data(), &zlen, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK)
        io_fail("zlib compression failed", path);
    zdata.resize(zlen);

    std::vector<std::uint8_t> out;
    const std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    out.insert(out.end(), sig, sig + 8);
    std::uint8_t ihdr[13];
    ihdr[0] = static_cast<std::uint8_t>(w >> 24); ihdr[1] = static_cast<std::uint8_t>(w >> 16);
    ihdr[2] = static_cast<std::uint8_t>(w >> 8);  ihdr[3] = static_cast<std::uint8_t>(w);
    ihdr[4] = static_cast<std::uint8_t>(h >> 24); ihdr[5] = static_cast<std::uint8_t>(h >> 16);
    ihdr[6] = static_cast<std::uint8_t>(h >> 8);  ihdr[7] = static_cast<std::uint8_t>(h);
    ihdr[8] = 8;   // bit depth
    ihdr[9] = 2;   // color type: RGB
    ihdr[10] = ihdr[11] = ihdr[12] = 0;
    png_chunk(out, "IHDR", ihdr, 13);
    png_chunk(out, "IDAT", zdata.data(), zdata.size());
    png_chunk(out, "IEND", nullptr, 0);

    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) io_fail("cannot open for writing", path);
    if (std::fwrite(out.data(), 1, out.size(), f.get()) != out.size())
        io_fail("short write", path);
}

double rmse(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height)
        throw std::runtime_error("rmse: image dimensions differ");
    double sum = 0.0;
    for (size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = static_cast<double>(a.pixels[i]) - static_cast<double>(b.pixels[i]);
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(a.pixels.size()));
}

}  // namespace cmlt
