#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace msde {

/// Philox 4x32-10 counter-based block cipher (Salmon et al., SC'11).
/// Pure function of (counter, key): any block of the stream can be produced
/// independently, which makes per-path streams reproducible and
/// order-independent regardless of worker scheduling.
struct Philox4x32 {
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }
};

/// One independent random stream, addressed by (seed, stream_id).
/// Draw order within a stream is fixed; streams never interact.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream_id)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_lo_(static_cast<std::uint32_t>(stream_id)),
          stream_hi_(static_cast<std::uint32_t>(stream_id >> 32)) {}

    /// Uniform draw in the open interval (0, 1).
    double uniform() {
        if (uniform_pos_ == 2) refill();
        return uniforms_[uniform_pos_++];
    }

    /// Standard normal draw (Box-Muller over one counter block).
    double normal() {
        if (normal_pos_ == 2) {
            const double u1 = uniform();
            const double u2 = uniform();
            const double radius = std::sqrt(-2.0 * std::log(u1));
            const double angle = 2.0 * kPi * u2;
            normals_[0] = radius * std::cos(angle);
            normals_[1] = radius * std::sin(angle);
            normal_pos_ = 0;
        }
        return normals_[normal_pos_++];
    }

private:
    static constexpr double kPi = 3.14159265358979323846;

    void refill() {
        const std::array<std::uint32_t, 4> ctr = {
            static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
            stream_lo_, stream_hi_};
        const auto out = Philox4x32::block(ctr, key_);
        uniforms_[0] = to_unit(out[0], out[1]);
        uniforms_[1] = to_unit(out[2], out[3]);
        uniform_pos_ = 0;
        ++block_;
    }

    static double to_unit(std::uint32_t hi, std::uint32_t lo) {
        const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint32_t stream_lo_, stream_hi_;
    std::uint64_t block_ = 0;
    std::array<double, 2> uniforms_{};
    int uniform_pos_ = 2;
    std::array<double, 2> normals_{};
    int normal_pos_ = 2;
};

}  // namespace msde
