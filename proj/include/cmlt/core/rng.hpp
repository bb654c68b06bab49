// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <cstdint>

namespace cmlt {

// Counter-based generator (Philox 4x32-10). A stream is identified by
// (seed, stream id); draws depend only on that pair and the draw index,
// so any run is reproducible bit-for-bit and streams never collide.
class RandomStream {
  public:
    RandomStream() : RandomStream(0, 0) {}
    RandomStream(std::uint64_t seed, std::uint64_t stream)
        : key0_(static_cast<std::uint32_t>(seed)),
          key1_(static_cast<std::uint32_t>(seed >> 32)),
          stream_(stream) {}

    // Uniform double in [0,1), 53 random bits.
    double next() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    std::uint32_t next_u32() {
        if (lane_ == 4) refill();
        return block_[lane_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return lo | (hi << 32);
    }

    // Index in [0,n).
    std::uint32_t next_below(std::uint32_t n) {
        return static_cast<std::uint32_t>(next() * n) % n;
    }

  private:
    void refill() {
        std::uint32_t c0 = static_cast<std::uint32_t>(counter_);
        std::uint32_t c1 = static_cast<std::uint32_t>(counter_ >> 32);
        std::uint32_t c2 = static_cast<std::uint32_t>(stream_);
        std::uint32_t c3 = static_cast<std::uint32_t>(stream_ >> 32);
        std::uint32_t k0 = key0_, k1 = key1_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = 0xD2511F53ull * c0;
            const std::uint64_t p1 = 0xCD9E8D57ull * c2;
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            c0 = hi1 ^ c1 ^ k0;
            c1 = lo1;
            c2 = hi0 ^ c3 ^ k1;
            c3 = lo0;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        block_[0] = c0;
        block_[1] = c1;
        block_[2] = c2;
        block_[3] = c3;
        ++counter_;
        lane_ = 0;
    }

    std::uint32_t key0_, key1_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::uint32_t block_[4] = {};
    int lane_ = 4;
};

// Fixed stream-id bases so independent pipeline stages never share a stream.
namespace stream_id {
constexpr std::uint64_t kBrightness = 1ull << 32;
constexpr std::uint64_t kSeeding = 2ull << 32;
constexpr std::uint64_t kChains = 3ull << 32;   // + chain index
constexpr std::uint64_t kReference = 4ull << 32;  // + worker index
}  // namespace stream_id

}  // namespace cmlt
