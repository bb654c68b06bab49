// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "cmlt/core/image.hpp"
#include "cmlt/core/image_io.hpp"
#include "cmlt/core/rng.hpp"

using namespace cmlt;

namespace {
std::string temp_path(const char* name) {
    return std::string("/tmp/cmlt_test_") + name;
}
}  // namespace

TEST_CASE("random streams are deterministic and independent") {
    RandomStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    bool all_equal = true, diff_stream = false, diff_seed = false;
    for (int i = 0; i < 1000; ++i) {
        const double va = a.next();
        all_equal &= va == b.next();
        diff_stream |= va != c.next();
        diff_seed |= va != d.next();
        CHECK(va >= 0.0);
        CHECK(va < 1.0);
    }
    CHECK(all_equal);
    CHECK(diff_stream);
    CHECK(diff_seed);
}

TEST_CASE("random stream is roughly uniform") {
    RandomStream rng(1, 1);
    const int bins = 64;
    std::vector<int> hist(bins, 0);
    const int n = 1 << 18;
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.next();
        mean += x;
        hist[static_cast<int>(x * bins)]++;
    }
    mean /= n;
    CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
    for (int h : hist) CHECK(std::abs(h - n / bins) < 6 * std::sqrt(n / bins));
}

TEST_CASE("pfm fixture bytes") {
    Image img(1, 1);
    img.set(0, 0, RGB{1.0, 1.0, 1.0});
    const std::string path = temp_path("one.pfm");
    write_pfm(img, path);

    std::FILE* f = std::fopen(path.c_str(), "rb");
    REQUIRE(f);
    char buf[64];
    const size_t n = std::fread(buf, 1, sizeof(buf), f);
    std::fclose(f);
    const char header[] = "PF\n1 1\n-1.0\n";
    const size_t hlen = std::strlen(header);
    REQUIRE(n == hlen + 3 * sizeof(float));
    CHECK(std::memcmp(buf, header, hlen) == 0);
    float px[3];
    std::memcpy(px, buf + hlen, sizeof(px));
    CHECK(px[0] == 1.0f);
    CHECK(px[1] == 1.0f);
    CHECK(px[2] == 1.0f);
}

TEST_CASE("pfm round trip is bit exact") {
    Image img(7, 5);
    RandomStream rng(3, 3);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            img.set(x, y, RGB{rng.next(), rng.next() * 10.0, rng.next() * 1e-3});
    const std::string path = temp_path("roundtrip.pfm");
    write_pfm(img, path);
    const Image back = read_pfm(path);
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
    CHECK(std::memcmp(back.pixels.data(), img.pixels.data(),
                      img.pixels.size() * sizeof(float)) == 0);
}

TEST_CASE("negative pixels are rejected") {
    Image img(2, 2);
    img.set(1, 1, RGB{-0.5, 0.0, 0.0});
    CHECK_THROWS(write_pfm(img, temp_path("neg.pfm")));
}

TEST_CASE("rmse basics") {
    Image a(4, 4), b(4, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            a.set(x, y, RGB{0.1 * x, 0.2 * y, 0.05 * (x + y)});
            b.set(x, y, a.rgb(x, y));
        }
    CHECK(rmse(a, a) == 0.0);
    // reference vs reference + constant c has RMSE exactly c
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) b.set(x, y, b.rgb(x, y) + RGB{0.25});
    CHECK(rmse(a, b) == doctest::Approx(0.25).epsilon(1e-6));

    Image c(3, 4);
    CHECK_THROWS(rmse(a, c));
}

TEST_CASE("rmse matches an independently computed fixture") {
    // 4x4 single-channel-ish fixture; value computed by hand:
    // differences are k/100 for k = 0..47 over 48 channel slots, so
    // rmse = sqrt(sum k^2)/100/sqrt(48) with sum k^2 = 47*48*95/6 = 35720.
    Image a(4, 4), b(4, 4);
    int k = 0;
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            b.set(x, y, RGB{k / 100.0, (k + 1) / 100.0, (k + 2) / 100.0});
            k += 3;
        }
    const double expected = std::sqrt(35720.0 / 48.0) / 100.0;
    CHECK(rmse(a, b) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("png writer emits a decodable signature") {
    Image img(3, 2);
    img.set(0, 0, RGB{1, 0, 0});
    img.set(2, 1, RGB{0, 10, 0});
    const std::string path = temp_path("view.png");
    write_png(img, path, 0.5);
    std::FILE* f = std::fopen(path.c_str(), "rb");
    REQUIRE(f);
    unsigned char sig[8];
    REQUIRE(std::fread(sig, 1, 8, f) == 8);
    std::fclose(f);
    CHECK(sig[0] == 137);
    CHECK(sig[1] == 'P');
    CHECK(sig[2] == 'N');
    CHECK(sig[3] == 'G');
}
