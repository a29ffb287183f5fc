#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace hypoco {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r) {
        const std::uint64_t p0 = std::uint64_t{M0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{M1} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

// Uniform random bit generator for the stream (seed, index, stream).
// Distinct triples give independent streams, whatever thread draws them.
class PhiloxEngine {
public:
    using result_type = std::uint64_t;

    PhiloxEngine(std::uint64_t seed, std::uint64_t index, std::uint32_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          ctr_{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), stream, 0u} {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (pos_ == 2) {
            block_ = philox4x32(ctr_, key_);
            ++ctr_[3];
            pos_ = 0;
        }
        const result_type v = (std::uint64_t{block_[2 * pos_]} << 32) | block_[2 * pos_ + 1];
        ++pos_;
        return v;
    }

private:
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> ctr_;
    std::array<std::uint32_t, 4> block_{};
    int pos_ = 2;
};

} // namespace hypoco
